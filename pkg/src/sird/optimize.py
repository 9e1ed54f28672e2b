"""Greedy structural-entropy minimization with merge and combine operators.

Both operators act on two brothers ``b1, b2`` under a parent ``a``:

* combine inserts a new node under ``a`` whose children are ``b1`` and ``b2``;
* merge replaces ``b1`` and ``b2`` by one node adopting their children.  A
  leaf operand is adopted as-is, so a single action can join an existing
  cluster without raising the tree height.  Two leaves are never merged;
  combine covers that case.

Scores are the entropy reduction ``H_before - H_after`` and touch only the
terms of the nodes involved, so each costs O(1) given the cached child sums
and brother cuts maintained on :class:`~sird.tree.EncodingTree`.

Only brothers joined by at least one edge can score above zero (a zero cut
makes combine exactly neutral and merge non-improving), so the heap strategy
tracks adjacent pairs only, keyed by score, with per-node stamps for lazy
invalidation.  The ``scan`` strategy rescans every brother pair each round
and exists as the reference the heap strategy is tested against.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import asdict, dataclass

from .errors import (
    HeightCapExceeded,
    InvalidInitialTree,
    InvariantViolation,
    LeafOperand,
    NotBrothers,
)
from .graph import WeightedGraph
from .tree import EncodingTree, Node, entropy_term, validate

#: minimum reduction (bits) for an operator to count as an improvement
IMPROVEMENT_TOL = 1e-12
#: scores this close to the best are ties, broken by smallest (b1, b2)
TIE_TOL = 1e-12


@dataclass
class OperatorApplication:
    kind: str
    beta1: int
    beta2: int
    delta_se: float
    height: int
    new_node: int

    def to_dict(self) -> dict:
        return asdict(self)


def _snap_boundary(g: float, scale: float) -> float:
    # cancellation in g1 + g2 - 2 cut can leave tiny residue for closed components
    return 0.0 if g <= 1e-12 * scale else g


def _brothers(t: EncodingTree, b1: int, b2: int) -> tuple[Node, Node, Node]:
    n1, n2 = t.node(b1), t.node(b2)
    if b1 == b2 or n1.parent is None or n1.parent != n2.parent:
        raise NotBrothers(f"nodes {b1} and {b2} are not brothers")
    return n1, n2, t.nodes[n1.parent]


def combine_height(t: EncodingTree, b1: int, b2: int) -> int:
    """Depth of the deepest leaf below the node a combine would create."""
    n1, n2, _ = _brothers(t, b1, b2)
    return t.depth(b1) + 1 + max(n1.h, n2.h)


def delta_combine(g: WeightedGraph | None, t: EncodingTree, b1: int, b2: int,
                  height_cap: int | None = None) -> float:
    n1, n2, a = _brothers(t, b1, b2)
    if height_cap is not None and combine_height(t, b1, b2) > height_cap:
        raise HeightCapExceeded(f"combining {b1}, {b2} exceeds height {height_cap}")
    vol = t.vol
    cut = n1.nbr.get(b2, 0.0)
    v_new = n1.V + n2.V
    g_new = _snap_boundary(n1.g + n2.g - 2.0 * cut, n1.g + n2.g)
    before = n1.term + n2.term
    after = (entropy_term(g_new, v_new, a.V, vol)
             + entropy_term(n1.g, n1.V, v_new, vol)
             + entropy_term(n2.g, n2.V, v_new, vol))
    return before - after


def _adopted_sums(nd: Node) -> tuple[float, float]:
    """(sum g, sum g*log2 V) over what a merged node adopts from ``nd``."""
    if nd.children:
        return nd.sg, nd.sgl
    return nd.g, (nd.g * math.log2(nd.V) if nd.g != 0 else 0.0)


def _inner(nd: Node, vol: float) -> float:
    """Summed entropy terms of ``nd``'s children (0 for a leaf)."""
    if not nd.children:
        return 0.0
    return (nd.sg * math.log2(nd.V) - nd.sgl) / vol


def delta_merge(g: WeightedGraph | None, t: EncodingTree, b1: int, b2: int) -> float:
    n1, n2, a = _brothers(t, b1, b2)
    if not n1.children and not n2.children:
        raise LeafOperand(f"merge needs a non-leaf operand; {b1} and {b2} are leaves")
    vol = t.vol
    cut = n1.nbr.get(b2, 0.0)
    v_new = n1.V + n2.V
    g_new = _snap_boundary(n1.g + n2.g - 2.0 * cut, n1.g + n2.g)
    s1, l1 = _adopted_sums(n1)
    s2, l2 = _adopted_sums(n2)
    before = n1.term + n2.term + _inner(n1, vol) + _inner(n2, vol)
    after = entropy_term(g_new, v_new, a.V, vol) + ((s1 + s2) * math.log2(v_new) - (l1 + l2)) / vol
    return before - after


def _relink_brothers(t: EncodingTree, new: Node, n1: Node, n2: Node) -> None:
    """Give ``new`` the union of its operands' brother cuts at the parent level."""
    acc: dict[int, float] = {}
    for src, other in ((n1, n2.id), (n2, n1.id)):
        for b, c in src.nbr.items():
            if b != other:
                acc[b] = acc.get(b, 0.0) + c
    new.nbr = acc
    for b, c in acc.items():
        nb = t.nodes[b].nbr
        nb.pop(n1.id, None)
        nb.pop(n2.id, None)
        nb[new.id] = c


def _shift_parent_sums(a: Node, removed: list[Node], added: Node) -> None:
    a.sg += added.g - math.fsum(r.g for r in removed)
    a.sgl += (added.g * math.log2(added.V) if added.g != 0 else 0.0) - math.fsum(
        r.g * math.log2(r.V) for r in removed if r.g != 0)


def apply_combine(t: EncodingTree, b1: int, b2: int, height_cap: int | None = None) -> int:
    """Insert a node over brothers ``b1`` and ``b2``; returns the new node id."""
    n1, n2, a = _brothers(t, b1, b2)
    if height_cap is not None and combine_height(t, b1, b2) > height_cap:
        raise HeightCapExceeded(f"combining {b1}, {b2} exceeds height {height_cap}")
    cut = n1.nbr.get(b2, 0.0)
    new = Node(t.new_id(), a.id, [b1, b2])
    new.V = n1.V + n2.V
    new.g = _snap_boundary(n1.g + n2.g - 2.0 * cut, n1.g + n2.g)
    t.nodes[new.id] = new
    t.refresh_term(new.id)
    _relink_brothers(t, new, n1, n2)
    n1.nbr = {b2: cut} if cut > 0 else {}
    n2.nbr = {b1: cut} if cut > 0 else {}
    a.children = [c for c in a.children if c != b1 and c != b2] + [new.id]
    n1.parent = n2.parent = new.id
    t.refresh_term(b1)
    t.refresh_term(b2)
    t.refresh_child_sums(new.id)
    _shift_parent_sums(a, [n1, n2], new)
    new.h = 1 + max(n1.h, n2.h)
    t.refresh_height(a.id)
    return new.id


def apply_merge(t: EncodingTree, b1: int, b2: int) -> int:
    """Replace brothers ``b1`` and ``b2`` by one node; returns the new node id."""
    n1, n2, a = _brothers(t, b1, b2)
    if not n1.children and not n2.children:
        raise LeafOperand(f"merge needs a non-leaf operand; {b1} and {b2} are leaves")
    if t.graph is None:
        raise InvariantViolation("merge needs the tree's graph to split cuts")
    graph = t.graph
    cut = n1.nbr.get(b2, 0.0)

    # cuts between the groups each operand contributes to the new node
    def group_of(owner: Node, vertex: int) -> int:
        return owner.id if not owner.children else t.child_toward(owner.id, vertex)

    small, large = (n1, n2) if len(t.vertices(n1.id)) <= len(t.vertices(n2.id)) else (n2, n1)
    cross: dict[tuple[int, int], list[float]] = {}
    for u in t.vertices(small.id):
        for v, w in graph.neighbors(u).items():
            if w <= 0:
                continue
            cv = t.child_toward(large.id, v) if large.children else (large.id if t.leaf_of[v] == large.id else None)
            if cv is None:
                continue
            cross.setdefault((group_of(small, u), cv), []).append(w)

    new = Node(t.new_id(), a.id)
    new.V = n1.V + n2.V
    new.g = _snap_boundary(n1.g + n2.g - 2.0 * cut, n1.g + n2.g)
    t.nodes[new.id] = new
    t.refresh_term(new.id)
    _relink_brothers(t, new, n1, n2)

    adopted = []
    for op in (n1, n2):
        if op.children:
            adopted.extend(op.children)
            del t.nodes[op.id]
        else:
            op.nbr = {}
            adopted.append(op.id)
    for (x, y), ws in cross.items():
        c = math.fsum(ws)
        nx, ny = t.nodes[x].nbr, t.nodes[y].nbr
        nx[y] = nx.get(y, 0.0) + c
        ny[x] = ny.get(x, 0.0) + c
    new.children = adopted
    for c in adopted:
        t.nodes[c].parent = new.id
        t.refresh_term(c)
    a.children = [c for c in a.children if c != b1 and c != b2] + [new.id]
    t.refresh_child_sums(new.id)
    _shift_parent_sums(a, [n1, n2], new)
    new.h = 1 + max(t.nodes[c].h for c in adopted)
    t.refresh_height(a.id)
    return new.id


def prune_pass_through(t: EncodingTree) -> int:
    """Splice out internal nodes with a single child; returns how many were removed."""
    removed = 0
    for x in [a for a in t.walk() if a != t.root]:
        nd = t.nodes[x]
        if len(nd.children) != 1:
            continue
        (c,) = nd.children
        p = t.nodes[nd.parent]
        p.children = [c if y == x else y for y in p.children]
        t.nodes[c].parent = p.id
        del t.nodes[x]
        removed += 1
    root = t.nodes[t.root]
    while len(root.children) == 1 and t.nodes[root.children[0]].children:
        (c,) = root.children
        kids = t.nodes[c].children
        for k in kids:
            t.nodes[k].parent = t.root
        root.children = list(kids)
        del t.nodes[c]
        removed += 1
    return removed


# -- greedy driver -----------------------------------------------------------

def _pick(cands: list[tuple[float, int, int]]) -> tuple[float, int, int] | None:
    """Best improving candidate; near-ties go to the smallest (b1, b2)."""
    good = [c for c in cands if c[0] > IMPROVEMENT_TOL]
    if not good:
        return None
    best = max(c[0] for c in good)
    return min((c for c in good if c[0] >= best - TIE_TOL), key=lambda c: (c[1], c[2]))


def _combine_ok(t: EncodingTree, b1: int, b2: int, cap: int) -> bool:
    return combine_height(t, b1, b2) <= cap


def _merge_ok(t: EncodingTree, b1: int, b2: int) -> bool:
    return bool(t.nodes[b1].children or t.nodes[b2].children)


class _ScanSearch:
    """Reference search: score every brother pair on every round."""

    def __init__(self, t: EncodingTree, cap: int):
        self.t, self.cap = t, cap

    def _pairs(self):
        for a in self.t.internal_nodes():
            kids = sorted(self.t.nodes[a].children)
            yield from itertools.combinations(kids, 2)

    def best_merge(self):
        t = self.t
        return _pick([(delta_merge(None, t, x, y), x, y) for x, y in self._pairs() if _merge_ok(t, x, y)])

    def best_combine(self):
        t = self.t
        return _pick([(delta_combine(None, t, x, y), x, y) for x, y in self._pairs()
                      if _combine_ok(t, x, y, self.cap)])

    def applied(self, kind: str, b1: int, b2: int, new: int) -> None:
        pass


class _HeapSearch:
    """Adjacent-pair priority queues with lazy, stamp-based invalidation."""

    def __init__(self, t: EncodingTree, cap: int):
        self.t, self.cap = t, cap
        self.stamp: dict[int, int] = {}
        self.clock = itertools.count()
        self.heaps: dict[str, list] = {"merge": [], "combine": []}
        self.refresh([a for a in t.nodes if a != t.root])

    def refresh(self, nodes) -> None:
        t = self.t
        live = [x for x in nodes if x in t.nodes and t.nodes[x].parent is not None]
        for x in live:
            self.stamp[x] = next(self.clock)
        done = set()
        for x in live:
            for y in t.nodes[x].nbr:
                pair = (x, y) if x < y else (y, x)
                if pair in done:
                    continue
                done.add(pair)
                self._push(*pair)

    def _push(self, x: int, y: int) -> None:
        t = self.t
        st = (self.stamp[x], self.stamp[y])
        if _merge_ok(t, x, y):
            heapq.heappush(self.heaps["merge"], (-delta_merge(None, t, x, y), x, y, st))
        if _combine_ok(t, x, y, self.cap):
            heapq.heappush(self.heaps["combine"], (-delta_combine(None, t, x, y), x, y, st))

    def _valid(self, entry) -> bool:
        _, x, y, st = entry
        return (x in self.t.nodes and y in self.t.nodes
                and self.stamp.get(x) == st[0] and self.stamp.get(y) == st[1])

    def _best(self, kind: str):
        heap = self.heaps[kind]
        while heap and not self._valid(heap[0]):
            heapq.heappop(heap)
        if not heap or -heap[0][0] <= IMPROVEMENT_TOL:
            return None
        best = -heap[0][0]
        pool = []
        while heap and -heap[0][0] >= best - TIE_TOL:
            e = heapq.heappop(heap)
            if self._valid(e):
                pool.append(e)
        chosen = _pick([(-e[0], e[1], e[2]) for e in pool])
        for e in pool:
            heapq.heappush(heap, e)
        if chosen is not None:
            score = (delta_merge if kind == "merge" else delta_combine)(None, self.t, chosen[1], chosen[2])
            if score != chosen[0]:
                raise InvariantViolation(f"stale {kind} score for {chosen[1:]}: {chosen[0]} vs {score}")
        return chosen

    def best_merge(self):
        return self._best("merge")

    def best_combine(self):
        return self._best("combine")

    def applied(self, kind: str, b1: int, b2: int, new: int) -> None:
        t = self.t
        touched = [new]
        if kind == "combine":
            # the operands and everything below them moved one level down
            for b in (b1, b2):
                touched.extend(t.walk(b))
        else:
            touched.extend(t.nodes[new].children)
        x = t.nodes[new].parent
        while x is not None and x != t.root:
            touched.append(x)
            x = t.nodes[x].parent
        self.refresh(touched)


def optimize(
    g: WeightedGraph,
    t0: EncodingTree,
    height_cap: int = 2,
    strategy: str = "heap",
    trace: list | None = None,
    prune: bool = True,
) -> EncodingTree:
    """Greedily apply the best merge, else the best combine, until neither improves.

    ``t0`` is left untouched; the optimized copy is returned.  Applied
    operators are appended to ``trace`` when given.
    """
    if height_cap < 2:
        raise InvalidInitialTree(f"height cap must be at least 2, got {height_cap}")
    check = validate(g, t0, height_cap)
    if not check.valid:
        raise InvalidInitialTree("; ".join(check.violations[:5]))
    t = t0.copy()
    t.graph = g
    if strategy == "heap":
        search = _HeapSearch(t, height_cap)
    elif strategy == "scan":
        search = _ScanSearch(t, height_cap)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    while True:
        kind, pick = "merge", search.best_merge()
        if pick is None:
            kind, pick = "combine", search.best_combine()
            if pick is None:
                break
        score, b1, b2 = pick
        new = apply_merge(t, b1, b2) if kind == "merge" else apply_combine(t, b1, b2, height_cap)
        if t.height > height_cap:
            raise InvariantViolation(f"height {t.height} exceeds cap {height_cap}")
        search.applied(kind, b1, b2, new)
        if trace is not None:
            trace.append(OperatorApplication(kind, b1, b2, score, t.height, new))

    if prune:
        prune_pass_through(t)
    t.rebuild_caches()
    return t
