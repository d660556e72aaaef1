import pytest

from evidence_gate.fileio import save_cases
from evidence_gate.synth import make_benchmark

BENCHMARK_SEED = 2025
BENCHMARK_SCENES = 50


@pytest.fixture(scope="session")
def benchmark50():
    """The frozen 50-scene regression benchmark (in memory)."""
    return make_benchmark(BENCHMARK_SEED, BENCHMARK_SCENES)


@pytest.fixture(scope="session")
def bench_dir(benchmark50, tmp_path_factory):
    """The same benchmark written out as .case files."""
    out = tmp_path_factory.mktemp("bench")
    save_cases(benchmark50, out)
    return out


@pytest.fixture(scope="session")
def small_cases(benchmark50):
    return benchmark50[:6]
