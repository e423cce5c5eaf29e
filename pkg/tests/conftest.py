import numpy as np
import pytest

from locobf.datasets import load_bundled_example
from locobf.domain import LocationDomain, PriorDistribution
from locobf.mechanisms import ObfuscationMatrix
from locobf.pls import SearchParams


@pytest.fixture(scope="session")
def bundled():
    domain = load_bundled_example()
    return domain, domain.prior


@pytest.fixture(scope="session")
def default_params():
    return SearchParams(epsilon=1.0, e_m=0.15, range=3)


@pytest.fixture(scope="session")
def strip():
    """Dense 1x8 line of cells along row 0; ids 1..8 left to right."""
    cells = [(i + 1, i, 0) for i in range(8)]
    return LocationDomain(order=3, cell_size_km=1.0, cells=cells)


@pytest.fixture()
def uniform_prior():
    def make(domain):
        n = len(domain)
        return PriorDistribution(np.full(n, 1.0 / n))

    return make


def raw_matrix(domain, probs, scheme="pive", epsilon=1.0):
    """Wrap hand-set probabilities for metric/audit tests."""
    probs = np.asarray(probs, dtype=float)
    n = len(domain)
    return ObfuscationMatrix(
        probs=probs,
        scheme=scheme,
        epsilon=epsilon,
        domain=domain,
        sensitivities=np.ones(n),
        row_epsilons=np.full(n, epsilon),
    )


def random_clustered_domain(seed, order=3):
    """Seeded sparse domain: a few clusters plus isolated cells, <= 64 cells.

    The isolated cells give the schemes meaningfully different sensitivities,
    which is what separates their quality loss.
    """
    rng = np.random.default_rng(seed)
    n = 1 << order
    chosen: set[tuple[int, int]] = set()
    for _ in range(int(rng.integers(2, 4))):
        cx, cy = rng.integers(1, n - 1, size=2)
        spread = rng.uniform(0.8, 1.8)
        for _ in range(int(rng.integers(6, 13))):
            col = int(np.clip(round(cx + rng.normal(0, spread)), 0, n - 1))
            row = int(np.clip(round(cy + rng.normal(0, spread)), 0, n - 1))
            chosen.add((col, row))
    for _ in range(int(rng.integers(1, 3))):
        chosen.add(tuple(int(v) for v in rng.integers(0, n, size=2)))
    cells = [(i + 1, c, r) for i, (c, r) in enumerate(sorted(chosen))]
    weights = rng.uniform(0.01, 0.03, size=len(cells))
    domain = LocationDomain(order=order, cell_size_km=1.0, cells=cells, weights=weights)
    return domain, domain.prior
