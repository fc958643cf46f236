import numpy as np
import pytest

from evoadapt.observe import RunTrace


def random_trace(rng: np.random.Generator, length: int, dim: int = 3,
                 pop: int = 6, width: float = 10.0) -> RunTrace:
    """Trace of a synthetic run with population points inside [-w/2, w/2]^d."""
    trace = RunTrace()
    for _ in range(length):
        genotypes = rng.uniform(-width / 2, width / 2, size=(pop, dim))
        fitnesses = rng.normal(0.0, 10.0 ** rng.uniform(-3, 3), size=pop)
        trace.append_generation(genotypes, fitnesses, np.array([0.5]))
        trace.rewards.append(0.0)
    return trace


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
