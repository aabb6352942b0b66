import heapq
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .config import cfg
from .errors import DomainError, NonTreeInput, Undefined, UnknownVertex


class GrowingTree(object):
    """Birth-ordered tree that only ever grows by attaching leaves.

    Vertex ids are 0..n-1 in order of appearance (vertex 0 is v1). Subtree
    sizes are cached with the tree rooted at vertex 0 for good, so that for any
    vertex u

        psi(u) = max(n - size_down[u], max_child_size[u])

    is an O(1) lookup. Adding a leaf touches the parent -> root path only.
    """

    def __init__(self):
        self.parent = [None]
        self.children = [[]]
        self.size_down = [1]
        self.max_child_size = [0]
        # child that first reached max_child_size, None for leaves
        self.heavy_child = [None]
        self.degree = [0]

    def __len__(self):
        return len(self.parent)

    @property
    def n(self):
        return len(self.parent)

    def add_leaf(self, parent):
        """Attaches a new vertex to `parent` and returns its id."""
        v = len(self.parent)
        if not 0 <= parent < v:
            raise UnknownVertex(parent)

        self.parent.append(parent)
        self.children.append([])
        self.size_down.append(1)
        self.max_child_size.append(0)
        self.heavy_child.append(None)
        self.degree.append(1)
        self.children[parent].append(v)
        self.degree[parent] += 1

        parents = self.parent
        size_down = self.size_down
        max_child_size = self.max_child_size
        heavy_child = self.heavy_child
        child, u = v, parent
        while u is not None:
            size_down[u] += 1
            s = size_down[child]
            if s > max_child_size[u]:
                max_child_size[u] = s
                heavy_child[u] = child
            child, u = u, parents[u]
        return v

    def check_vertex(self, u):
        if not 0 <= u < len(self.parent):
            raise UnknownVertex(u)

    def neighbors(self, u):
        p = self.parent[u]
        if p is None:
            return list(self.children[u])
        return [p] + self.children[u]

    def psi(self, u):
        self.check_vertex(u)
        n = len(self.parent)
        if n < 2:
            raise Undefined("[!] psi needs at least two vertices")
        return max(n - self.size_down[u], self.max_child_size[u])

    def edges(self):
        return [(v, self.parent[v]) for v in range(1, len(self.parent))]

    def check_consistency(self):
        """Recomputes every cached field from parent links and compares."""
        n = len(self.parent)
        size = [1] * n
        for v in range(n - 1, 0, -1):
            size[self.parent[v]] += size[v]
        assert size == self.size_down, "[!] size_down out of sync"
        for u in range(n):
            best = max((size[c] for c in self.children[u]), default=0)
            assert best == self.max_child_size[u], \
                f"[!] max_child_size out of sync at {u}"
            if self.children[u]:
                assert size[self.heavy_child[u]] == best
        assert sum(self.degree) == 2 * (n - 1), "[!] handshake violated"


@dataclass(frozen=True)
class CentroidSet:
    members: Tuple[int, ...]
    psi_value: int

    def __contains__(self, u):
        return u in self.members


@dataclass
class TopKSet:
    K: int
    # (vertex, psi) sorted by (psi, vertex)
    ordered: List[Tuple[int, int]]
    boundary_tied: bool = False
    # excluded vertices exactly as central as the K-th entry
    tied: List[int] = field(default_factory=list)

    def vertices(self):
        return [u for u, _ in self.ordered]

    def as_set(self):
        return frozenset(u for u, _ in self.ordered)


def new_tree(edges):
    """Builds a GrowingTree from (child, parent) pairs given in birth order."""
    tree = GrowingTree()
    for child, parent in edges:
        if child != tree.n:
            raise NonTreeInput(
                f"[!] child {child} out of birth order (expected {tree.n})")
        if not 0 <= parent < child:
            raise NonTreeInput(
                f"[!] parent {parent} of {child} is not an earlier vertex")
        tree.add_leaf(parent)
    return tree


def add_leaf(tree, parent):
    return tree.add_leaf(parent)


def psi(tree, u):
    return tree.psi(u)


def _settle(tree, u):
    """Walks from u toward the heavy side until no branch exceeds n/2."""
    n = tree.n
    size_down = tree.size_down
    while True:
        if 2 * (n - size_down[u]) > n:
            u = tree.parent[u]
        elif 2 * tree.max_child_size[u] > n:
            u = tree.heavy_child[u]
        else:
            return u


def _centroid_set_at(tree, u):
    n = tree.n
    if n == 1:
        return CentroidSet((0,), 0)
    up = n - tree.size_down[u]
    down = tree.max_child_size[u]
    members = [u]
    # a co-centroid is adjacent and sits behind a branch of exactly n/2
    if tree.parent[u] is not None and 2 * up == n:
        members.append(tree.parent[u])
    elif 2 * down == n:
        members.append(tree.heavy_child[u])
    return CentroidSet(tuple(sorted(members)), max(up, down))


def centroids(tree, start=0):
    """Centroid set of the tree.

    The search starts at `start` (v1 by default) and follows branches holding
    more than n/2 vertices; incremental callers pass the previous centroid.
    """
    tree.check_vertex(start)
    return _centroid_set_at(tree, _settle(tree, start))


def psi_all(tree):
    n = tree.n
    if n < 2:
        raise Undefined("[!] psi needs at least two vertices")
    size_down = np.asarray(tree.size_down, dtype=np.int64)
    return np.maximum(n - size_down, np.asarray(tree.max_child_size, dtype=np.int64))


def _top_k_sorted(tree, K, values):
    n = tree.n
    order = np.lexsort((np.arange(n), values))
    ordered = [(int(u), int(values[u])) for u in order[:K]]
    tied = []
    if K < n:
        kth = ordered[-1][1]
        tied = [int(u) for u in order[K:] if values[u] == kth]
    return TopKSet(K, ordered, bool(tied), tied)


def top_k(tree, K, validate=None, logger=None):
    """Exact top-K most central vertices, keyed by (psi, birth order).

    Best-first search outward from the centroid set: psi grows along every
    edge leading away from the centroid, so a heap over the frontier yields
    vertices in key order. With `validate` the growth is checked on every
    edge crossed and the search falls back to sorting psi_all if it fails.
    """
    n = tree.n
    if n < 2:
        raise Undefined("[!] top_k needs at least two vertices")
    if K < 1:
        raise DomainError(f"[!] K must be positive, got {K}")
    if validate is None:
        validate = cfg.DEBUG_TOPK
    if K >= n:
        return _top_k_sorted(tree, n, psi_all(tree))

    start = centroids(tree)
    heap = [(tree.psi(c), c) for c in start.members]
    heapq.heapify(heap)
    seen = set(start.members)
    ordered = []
    while len(ordered) < K:
        value, u = heapq.heappop(heap)
        ordered.append((u, value))
        for w in tree.neighbors(u):
            if w in seen:
                continue
            seen.add(w)
            w_value = tree.psi(w)
            if validate and w_value < value:
                if logger is not None:
                    logger(f"[!] psi decreases from {u} to {w}, "
                           "falling back to full sort")
                return _top_k_sorted(tree, K, psi_all(tree))
            heapq.heappush(heap, (w_value, w))

    kth = ordered[-1][1]
    tied = []
    while heap and heap[0][0] == kth:
        tied.append(heapq.heappop(heap)[1])
    return TopKSet(K, ordered, bool(tied), tied)


def subtree_size(tree, root, v):
    """Size of the subtree below v once the tree is re-rooted at `root`.

    That is every vertex whose path to `root` runs through v, v included.
    """
    tree.check_vertex(root)
    tree.check_vertex(v)
    if root == v:
        return tree.n
    parents = tree.parent
    w = root
    while w is not None and parents[w] != v:
        w = parents[w]
    if w is None:
        # root is not below v, the cached subtree is already the answer
        return tree.size_down[v]
    # w is the child of v on the way to root
    return tree.n - tree.size_down[w]


def is_adjacent(tree, u, v):
    return tree.parent[u] == v or tree.parent[v] == u


def forest_sizes(tree, K):
    """Sizes of the trees hanging off v1..vK once the edges among them are cut."""
    if not 1 <= K <= tree.n:
        raise DomainError(f"[!] K={K} outside 1..{tree.n}")
    sizes = []
    for i in range(K):
        sizes.append(1 + sum(tree.size_down[c] for c in tree.children[i] if c >= K))
    return sizes


#########################
# Brute-force oracles   #
#########################

def _adjacency(tree):
    adj = [[] for _ in range(tree.n)]
    for child, parent in tree.edges():
        adj[child].append(parent)
        adj[parent].append(child)
    return adj


def psi_brute(tree, u, adj=None):
    """psi(u) by removing u and measuring every component with a DFS."""
    if adj is None:
        adj = _adjacency(tree)
    best = 0
    for v in adj[u]:
        count = 0
        stack = [v]
        seen = {u, v}
        while stack:
            w = stack.pop()
            count += 1
            for x in adj[w]:
                if x not in seen:
                    seen.add(x)
                    stack.append(x)
        best = max(best, count)
    return best


def psi_all_brute(tree):
    adj = _adjacency(tree)
    return [psi_brute(tree, u, adj) for u in range(tree.n)]


def centroids_brute(tree):
    if tree.n == 1:
        return CentroidSet((0,), 0)
    values = psi_all_brute(tree)
    best = min(values)
    return CentroidSet(tuple(u for u, p in enumerate(values) if p == best), best)


def top_k_brute(tree, K):
    values = np.asarray(psi_all_brute(tree), dtype=np.int64)
    return _top_k_sorted(tree, min(K, tree.n), values)


#########################
# Edge-list text format #
#########################

def read_edge_list(stream) -> List[Tuple[int, int]]:
    """Parses `child parent` lines; blank lines and `#` comments are skipped."""
    edges = []
    for lineno, line in enumerate(stream, 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise NonTreeInput(f"[!] line {lineno}: expected 'child parent'")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise NonTreeInput(f"[!] line {lineno}: non-integer vertex id")
    return edges


def write_edge_list(edges, stream, header: Optional[List[str]] = None):
    for line in header or []:
        stream.write(f"# {line}\n")
    for child, parent in edges:
        stream.write(f"{child} {parent}\n")
