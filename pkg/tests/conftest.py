import numpy as np
import pytest

from circlecover.density import PiecewisePolyDensity


@pytest.fixture(scope="session")
def uniform():
    return PiecewisePolyDensity.uniform()


@pytest.fixture(scope="session")
def tent():
    return PiecewisePolyDensity.tent()


@pytest.fixture(scope="session")
def step():
    return PiecewisePolyDensity.step()


def random_density(rng: np.random.Generator, max_pieces: int = 6):
    """A random valid piecewise degree<=1 density (normalized)."""
    m = int(rng.integers(1, max_pieces + 1))
    cuts = np.sort(rng.random(m - 1)) if m > 1 else np.array([])
    bp = np.concatenate([[0.0], cuts, [1.0]])
    while np.any(np.diff(bp) < 1e-3):  # keep pieces non-degenerate
        cuts = np.sort(rng.random(m - 1)) if m > 1 else np.array([])
        bp = np.concatenate([[0.0], cuts, [1.0]])
    pieces = []
    for i in range(m):
        v0, v1 = rng.random(2) * 2.0 + 0.05
        w = bp[i + 1] - bp[i]
        pieces.append((bp[i], bp[i + 1], [v0, (v1 - v0) / w]))
    return PiecewisePolyDensity.from_pieces(pieces, name="random", normalize=True)
