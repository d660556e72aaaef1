"""Matplotlib report figures written next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_metrics_figure(report, path):
    """Per-image precision/recall/F1 distributions for one configuration."""
    fig, axes = plt.subplots(1, 3, figsize=(10, 3), sharey=True)
    data = {
        "precision": [e.precision for e in report.per_image],
        "recall": [e.recall for e in report.per_image],
        "f1": [e.f1 for e in report.per_image],
    }
    for ax, (name, values) in zip(axes, data.items()):
        ax.hist(values, bins=20, range=(0, 1), color="#4878a8")
        ax.axvline(float(np.mean(values)), color="#d62728", lw=1.2)
        ax.set_xlabel(name)
    axes[0].set_ylabel("images")
    fig.suptitle("per-image metric distributions")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_ablation_figure(rows, path):
    """Ablation trajectory: P/R/F1 across the cumulative module ladder."""
    names = [name for name, _ in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    for metric, color in (
        ("mean_precision", "#1f77b4"),
        ("mean_recall", "#ff7f0e"),
        ("mean_f1", "#2ca02c"),
    ):
        ax.plot(
            names,
            [getattr(rep, metric) for _, rep in rows],
            marker="o",
            color=color,
            label=metric.replace("mean_", ""),
        )
    ax.set_ylabel("score")
    ax.set_ylim(0, 1.05)
    ax.grid(alpha=0.3)
    ax.legend()
    ax.set_title("ablation trajectory")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_pareto_figure(results, front, path):
    """Precision-recall scatter of all configurations with the Pareto front."""
    fig, ax = plt.subplots(figsize=(6, 5))
    rec = [r.mean_recall for r in results]
    prec = [r.mean_precision for r in results]
    f1 = [r.mean_f1 for r in results]
    sc = ax.scatter(rec, prec, c=f1, s=[40 + 160 * v for v in f1],
                    cmap="viridis", alpha=0.8, edgecolors="k", linewidths=0.4)
    if front:
        fr = sorted(front, key=lambda r: r.mean_recall)
        ax.plot([r.mean_recall for r in fr], [r.mean_precision for r in fr],
                "r--", lw=1.2, label="pareto front")
        ax.legend()
    fig.colorbar(sc, label="F1")
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_title("precision-recall trade-off across configurations")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_sensitivity_figure(results, params, path):
    """F1 boxplots per value for each requested config parameter."""
    n = len(params)
    fig, axes = plt.subplots(1, n, figsize=(3 * n, 3.5), squeeze=False)
    for ax, param in zip(axes[0], params):
        groups = {}
        for r in results:
            groups.setdefault(getattr(r.config, param), []).append(r.mean_f1)
        values = sorted(groups)
        ax.boxplot([groups[v] for v in values],
                   tick_labels=[f"{v:.3g}" if isinstance(v, float) else str(v)
                                for v in values])
        ax.set_xlabel(param)
        ax.tick_params(axis="x", rotation=45)
    axes[0][0].set_ylabel("F1")
    fig.suptitle("parameter sensitivity")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
