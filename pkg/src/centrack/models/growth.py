from collections import deque
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

from ..errors import DegreeOverflow, DomainError, InvariantViolation
from ..tree import CentroidSet, centroids, new_tree
from .factory import DIFFUSION, PREFERENTIAL, UNIFORM
from .rng import uniforms


@dataclass
class GrowthEvent:
    step: int
    new_vertex: int
    parent: int
    centroids: Optional[Tuple[int, ...]] = None

    def to_dict(self):
        record = asdict(self)
        if self.centroids is None:
            del record['centroids']
        else:
            record['centroids'] = list(self.centroids)
        return record


class UniformSampler(object):
    """Every vertex equally likely."""

    def __init__(self, tree):
        self.n = tree.n

    def draw(self, u):
        parent = int(u * self.n)
        self.n += 1
        return parent


class PreferentialSampler(object):
    """Parent chosen with probability deg / (2n - 2).

    `ends` lists both endpoints of every edge, so vertex v appears deg(v)
    times and a uniform pick from it is exactly degree proportional.
    """

    def __init__(self, tree):
        self.ends = []
        for child, parent in tree.edges():
            self.ends.append(child)
            self.ends.append(parent)
        self.n = tree.n

    def draw(self, u):
        ends = self.ends
        if not ends:
            # a lone vertex has degree 0 but is the only choice
            parent = 0
        else:
            parent = ends[int(u * len(ends))]
        ends.append(self.n)
        ends.append(parent)
        self.n += 1
        return parent


class DiffusionSampler(object):
    """Uniform over the free host-tree slots around the current tree.

    Vertex v owns d - deg(v) slots. Drawing consumes one slot of the parent
    (swap-remove) and the newcomer brings d - 1 of its own, so the boundary
    always holds (d - 2) n + 2 slots.
    """

    def __init__(self, tree, d):
        self.d = d
        self.slots = []
        for v, deg in enumerate(tree.degree):
            if deg > d:
                raise DegreeOverflow(
                    f"[!] vertex {v} has degree {deg} > d={d}")
            self.slots.extend([v] * (d - deg))
        self.n = tree.n

    @property
    def boundary_size(self):
        return len(self.slots)

    def draw(self, u):
        slots = self.slots
        i = int(u * len(slots))
        parent = slots[i]
        slots[i] = slots[-1]
        slots.pop()
        slots.extend([self.n] * (self.d - 1))
        self.n += 1
        return parent


# Fill all available samplers, change here to modify / add growth processes.
_samplers = {
    UNIFORM: lambda spec, tree: UniformSampler(tree),
    PREFERENTIAL: lambda spec, tree: PreferentialSampler(tree),
    DIFFUSION: lambda spec, tree: DiffusionSampler(tree, spec.d),
}


def make_sampler(spec, tree):
    assert spec.kind in _samplers, f"[!] Model not found: {spec.kind}"
    return _samplers[spec.kind](spec, tree)


def choose_parent(spec, tree, rng):
    """Draws the attachment point of the next vertex of `tree`."""
    return make_sampler(spec, tree).draw(rng.random())


def grow(spec, n_target, rng, hooks=(), tree=None, track_centroids=False,
         check_invariants=False):
    """Grows a tree to n_target vertices.

    Starts from `tree` if given, otherwise from the model's seed graph. Each
    hook is called as hook(tree, event) after every insertion. With
    `track_centroids` the event carries the centroid set, maintained
    incrementally from the previous one.
    """
    if tree is None:
        tree = new_tree(spec.seed_edges())
    if n_target < tree.n:
        raise DomainError(f"[!] n_target={n_target} is smaller than the "
                          f"seed graph ({tree.n} vertices)")

    sampler = make_sampler(spec, tree)
    diffusion = spec.kind == DIFFUSION
    current = centroids(tree) if track_centroids else None

    for u in uniforms(rng, n_target - tree.n):
        parent = sampler.draw(u)
        v = tree.add_leaf(parent)
        if check_invariants and diffusion:
            if sampler.boundary_size != (spec.d - 2) * tree.n + 2:
                raise InvariantViolation(
                    f"[!] boundary has {sampler.boundary_size} slots at n={tree.n}")
            if tree.degree[parent] > spec.d:
                raise DegreeOverflow(f"[!] vertex {parent} exceeds degree {spec.d}")
        if track_centroids:
            current = centroids(tree, start=current.members[0])
        event = GrowthEvent(tree.n, v, parent,
                            current.members if track_centroids else None)
        for hook in hooks:
            hook(tree, event)
    return tree


class GrowingLine(object):
    """Vertex order of a path graph grown at its two ends.

    What diff:2 produces; holds no subtree sizes, so one insertion is O(1).
    """

    def __init__(self):
        self.order = deque([0])

    @property
    def n(self):
        return len(self.order)

    def attach(self, parent, v):
        if parent == self.order[-1]:
            self.order.append(v)
        elif parent == self.order[0]:
            self.order.appendleft(v)
        else:
            raise DegreeOverflow(f"[!] vertex {parent} is not an end of the line")

    def centroids(self):
        n = len(self.order)
        members = {self.order[(n - 1) // 2], self.order[n // 2]}
        psi_value = n // 2
        return CentroidSet(tuple(sorted(members)), psi_value)


def grow_line(n_target, rng, hooks=(), line=None):
    """diff:2 from a single vertex without building a GrowingTree.

    Consumes the random stream exactly like grow() with DiffusionSampler, so
    both produce the same parents.
    """
    if n_target < 1:
        raise DomainError(f"[!] n_target must be >= 1, got {n_target}")
    if line is None:
        line = GrowingLine()
    assert line.n == 1, "[!] grow_line starts from a single vertex"
    slots = [0, 0]
    for u in uniforms(rng, n_target - 1):
        v = line.n
        i = int(u * 2)
        parent = slots[i]
        slots[i] = slots[-1]
        slots[-1] = v
        line.attach(parent, v)
        event = GrowthEvent(line.n, v, parent)
        for hook in hooks:
            hook(line, event)
    return line
