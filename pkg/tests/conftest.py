import numpy as np
import pytest

from centrack.models import ModelSpec, grow, make_rng
from centrack.tree import new_tree


def random_edges(rng, n):
    """Birth-ordered edges of a random recursive tree on n vertices."""
    return [(v, int(rng.integers(v))) for v in range(1, n)]


def random_tree(rng, n):
    return new_tree(random_edges(rng, n))


def grown_tree(model, n, seed, stream=0):
    """Tree grown by `model` (e.g. 'pa', 'diff:3') to n vertices."""
    return grow(ModelSpec.parse(model), n, make_rng(seed, stream))


def path_tree(n):
    return new_tree([(v, v - 1) for v in range(1, n)])


def star_tree(n):
    """Star on n vertices, v1 in the middle."""
    return new_tree([(v, 0) for v in range(1, n)])


@pytest.fixture
def rng():
    return np.random.default_rng(42)
