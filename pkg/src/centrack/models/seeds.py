"""Seed graphs the growth processes can start from.

Both constructors return (child, parent) edges in birth order, i.e. the
edge-list format `centrack.tree.new_tree` reads.
"""
from ..config import cfg
from ..errors import DomainError, SizeOverflow


def make_star_hub(k):
    """Star with v1 in the middle and v2..v_{k+1} hanging off it."""
    if k < 1:
        raise DomainError(f"[!] hub size must be >= 1, got {k}")
    return [(i, 0) for i in range(1, k + 1)]


def rball_size(d, r):
    """Vertices of the closed radius-r ball of the infinite d-regular tree."""
    if r == 0:
        return 1
    return 1 + d * ((d - 1) ** r - 1) // (d - 2)


def make_rball(d, r, max_size=None):
    """All host vertices within distance r of v1, listed breadth first."""
    if d < 3:
        raise DomainError(f"[!] r-ball seeds need d >= 3, got {d}")
    if r < 0:
        raise DomainError(f"[!] radius must be >= 0, got {r}")
    if max_size is None:
        max_size = cfg.RBALL_MAX_SIZE
    size = rball_size(d, r)
    if size > max_size:
        raise SizeOverflow(f"[!] {d}-regular ball of radius {r} has {size} "
                           f"vertices (limit {max_size})")

    edges = []
    frontier = [0]
    n = 1
    for _ in range(r):
        level = []
        for u in frontier:
            for _ in range(d if u == 0 else d - 1):
                edges.append((n, u))
                level.append(n)
                n += 1
        frontier = level
    assert n == size
    return edges
