from .config import cfg
from .models import ModelSpec, SeedGraph, grow, make_rng
from .tree import GrowingTree, centroids, new_tree, psi, top_k

__version__ = '0.1.0'
