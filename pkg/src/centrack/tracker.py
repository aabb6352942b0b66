from collections import deque
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

from .tree import centroids, is_adjacent, subtree_size, top_k

# (new vertex, previous centroid) pairs whose psi difference is followed
PAIR_WINDOW = 8


@dataclass
class ReplicateTrace:
    replicate: int
    n_target: int
    # step n at which the incumbent centroid was last replaced, None if never
    last_centroid_change: Optional[int] = None
    centroid_change_count: int = 0
    # raw centroid-set changes, including 1 <-> 2 centroid flips
    centroid_set_changes: int = 0
    final_centroid: Tuple[int, ...] = ()
    v1_is_final_centroid: bool = False
    v1_always_centroid: bool = True
    # last step at which v1 belonged to the centroid set
    last_v1_centroid: Optional[int] = None
    max_centroid_count: int = 1
    K: int = 0
    last_topk_change: Optional[int] = None
    topk_change_count: int = 0
    final_topk: List[int] = field(default_factory=list)
    final_topk_tied: List[int] = field(default_factory=list)
    v1_in_final_topk: Optional[bool] = None
    invariant_violations: List[str] = field(default_factory=list)

    def to_dict(self):
        record = asdict(self)
        record['final_centroid'] = list(self.final_centroid)
        return record

    def changed_after(self, step):
        return self.last_centroid_change is not None and self.last_centroid_change > step


class CentroidTracker:
    """Follows the centroid (and optionally the top-K set) of a growing tree.

    Used as a growth hook: reset() on the seed tree, then step() after every
    insertion. The incumbent is the centroid currently held on to; it only
    changes when it drops out of the centroid set, so flips between one and
    two centroids that keep it in place are not counted as changes.
    """

    def __init__(self, K=0, checkpoints=None, check_invariants=False, logger=None):
        self.K = K
        self.checkpoints = set(checkpoints) if checkpoints else None
        self.check_invariants = check_invariants
        self.logger = logger

        self.tree = None
        self.current = None
        self.incumbent = None
        self.topk = None
        self.pairs = deque([], maxlen=PAIR_WINDOW)
        self.results = None

    def reset(self, tree, replicate=0, n_target=None):
        self.tree = tree
        self.current = centroids(tree)
        self.incumbent = self.current.members[0]
        self.topk = None
        self.pairs.clear()
        self.results = ReplicateTrace(replicate, n_target if n_target is not None else tree.n)
        self.results.v1_always_centroid = 0 in self.current
        if 0 in self.current:
            self.results.last_v1_centroid = tree.n
        self.results.max_centroid_count = len(self.current.members)
        if self.K and tree.n > self.K:
            self.topk = top_k(tree, self.K)

    def _violation(self, message):
        message = f"n={self.tree.n}: {message}"
        self.results.invariant_violations.append(message)
        if self.logger is not None:
            self.logger(f"[!] invariant violated at {message}")

    def _check_centroid_set(self, cset):
        tree = self.tree
        n = tree.n
        if len(cset.members) not in (1, 2):
            self._violation(f"{len(cset.members)} centroids")
        if 2 * cset.psi_value > n:
            self._violation(f"centroid psi {cset.psi_value} exceeds n/2")
        if len(cset.members) == 2:
            a, b = cset.members
            if not is_adjacent(tree, a, b):
                self._violation(f"centroids {a} and {b} are not adjacent")
            elif 2 * subtree_size(tree, a, b) != n or 2 * subtree_size(tree, b, a) != n:
                self._violation(f"centroids {a} and {b} do not split the tree in half")

    def _check_step(self, v, prev, cset):
        tree = self.tree
        n = tree.n
        vstar = prev.members[0]
        # the side of the newcomer facing the old centroid holds half the old tree
        if 2 * subtree_size(tree, v, vstar) < n - 1:
            self._violation(f"branch of {v} toward {vstar} below (n-1)/2")

        for pair in self.pairs:
            a, b, last = pair
            diff = tree.psi(a) - tree.psi(b)
            if abs(diff - last) > 1:
                self._violation(f"psi({a}) - psi({b}) jumped from {last} to {diff}")
            pair[2] = diff
        self.pairs.append([v, vstar, tree.psi(v) - tree.psi(vstar)])

        if not any(a == b or is_adjacent(tree, a, b)
                   for a in cset.members for b in prev.members):
            self._violation(f"centroid moved from {prev.members} to {cset.members}")

    def _observe(self, n, cset):
        prev = self.current
        self.current = cset
        results = self.results
        if cset.members != prev.members:
            results.centroid_set_changes += 1
        if self.incumbent not in cset:
            self.incumbent = cset.members[0]
            results.centroid_change_count += 1
            results.last_centroid_change = n
        if 0 in cset:
            results.last_v1_centroid = n
        else:
            results.v1_always_centroid = False
        results.max_centroid_count = max(results.max_centroid_count, len(cset.members))
        return prev

    def step(self, tree, event):
        assert tree is self.tree, "[!] tracker was reset on another tree"
        n = tree.n
        cset = centroids(tree, start=self.incumbent)
        prev = self._observe(n, cset)
        results = self.results

        if self.check_invariants:
            self._check_centroid_set(cset)
            self._check_step(event.new_vertex, prev, cset)

        if self.K and n > self.K and (self.checkpoints is None or n in self.checkpoints
                                      or n == results.n_target):
            topk = top_k(tree, self.K)
            if self.topk is not None and topk.as_set() != self.topk.as_set():
                results.topk_change_count += 1
                results.last_topk_change = n
            self.topk = topk

    def get_results(self):
        results = self.results
        results.final_centroid = self.current.members
        results.v1_is_final_centroid = 0 in self.current
        results.K = self.K
        if self.topk is not None:
            results.final_topk = self.topk.vertices()
            results.final_topk_tied = list(self.topk.tied)
            results.v1_in_final_topk = 0 in self.topk.as_set()
        if self.check_invariants:
            try:
                self.tree.check_consistency()
            except AssertionError as e:
                self._violation(str(e))
        return results


class LineCentroidTracker(CentroidTracker):
    """CentroidTracker for growth.grow_line: the centroids of a path are its
    middle vertices, so no tree queries are needed."""

    def __init__(self, logger=None):
        super().__init__(K=0, logger=logger)

    def reset(self, line, replicate=0, n_target=None):
        self.tree = line
        self.current = line.centroids()
        self.incumbent = self.current.members[0]
        self.results = ReplicateTrace(replicate, n_target if n_target is not None else line.n)
        self.results.last_v1_centroid = 1
        self.results.max_centroid_count = len(self.current.members)

    def step(self, line, event):
        self._observe(line.n, line.centroids())

    def get_results(self):
        results = self.results
        results.final_centroid = self.current.members
        results.v1_is_final_centroid = 0 in self.current
        return results
