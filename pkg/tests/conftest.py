import numpy as np
import pytest

from doubletscope import SystemParams, synthetic_sector


@pytest.fixture(scope="session")
def toy_params():
    # same ring as the main geometry, shorter mode ladder: fast but realistic
    return SystemParams.from_pi_multiples(1e-4, 1.008, 40, 8, 300)


@pytest.fixture(scope="session")
def mid_params():
    return SystemParams.from_pi_multiples(1e-4, 1.008, 40, 8, 600)


def random_arrowhead(rng, n=None, tiny_couplings=False):
    """Synthetic arrowhead with sorted, well-separated poles."""
    if n is None:
        n = int(rng.integers(2, 61))
    gaps = rng.uniform(0.05, 1.0, size=n)
    poles = np.cumsum(gaps) + rng.uniform(-1.0, 1.0)
    g = np.abs(rng.normal(0.0, 0.5, size=n))
    if tiny_couplings:
        g[rng.integers(0, n)] *= 1e-9
    apex = float(rng.uniform(poles[0] - 1.0, poles[-1] + 1.0))
    return synthetic_sector(apex, poles, g)
