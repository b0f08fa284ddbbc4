import numpy as np
import pytest

from covmin import DataSet, KernelSpec, SynthConfig, synth_generate

# pass/fail lines recorded by the acceptance suite, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    def record(num, ok, detail):
        line = f"criterion {num}: {'PASS' if ok else 'FAIL'} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


@pytest.fixture
def rbf():
    return KernelSpec("rbf", 0.5)


@pytest.fixture
def small_data():
    """Roughly 90 points over 6 domains, fast enough for dense fits."""
    return synth_generate(SynthConfig(T=6, mean_count=15, seed=11))


@pytest.fixture
def single_domain_data():
    d = synth_generate(SynthConfig(T=1, mean_count=60, seed=4))
    assert len(np.unique(d.d)) == 1
    return d


def random_dataset(rng, N, n=4, domains=3):
    X = rng.standard_normal((N, n))
    y = np.where(rng.standard_normal(N) >= 0, 1.0, -1.0)
    d = rng.integers(1, domains + 1, size=N)
    return DataSet(X=X, y=y, d=d)
