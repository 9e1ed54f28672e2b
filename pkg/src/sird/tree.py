"""Encoding trees over a weighted graph and their structural entropy.

Every node caches its volume ``V`` (sum of member degrees), boundary weight
``g`` (weight leaving its vertex set) and its own entropy term.  The
optimizer additionally relies on three derived caches kept here so that
operator scores are O(1):

* ``h``   - height of the subtree below the node (leaves have 0),
* ``sg``  - sum of the children's ``g``,
* ``sgl`` - sum of the children's ``g * log2(V)``,
* ``nbr`` - cut weight to each brother it shares an edge with.

:func:`tree_entropy` and :func:`validate` never trust the caches; they
recompute everything from the graph.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import (
    InputError,
    InvalidNode,
    InvalidTree,
    RootHasNoTerm,
    ZeroSubtreeVolume,
    ZeroVolume,
)
from .graph import WeightedGraph

REL_TOL = 1e-9


def entropy_term(g_alpha: float, v_alpha: float, v_parent: float, vol: float) -> float:
    """``-(g/vol) * log2(V / V_parent)`` with the ``0 * log`` convention."""
    if v_alpha <= 0:
        raise ZeroSubtreeVolume("node has zero volume")
    if g_alpha == 0 or v_alpha == v_parent:
        return 0.0
    return -(g_alpha / vol) * math.log2(v_alpha / v_parent)


@dataclass(slots=True)
class Node:
    id: int
    parent: int | None
    children: list[int] = field(default_factory=list)
    vertex: int | None = None
    V: float = 0.0
    g: float = 0.0
    term: float = 0.0
    h: int = 0
    sg: float = 0.0
    sgl: float = 0.0
    nbr: dict[int, float] = field(default_factory=dict)


class EncodingTree:
    """Rooted hierarchy of vertex subsets; see the module docstring for caches."""

    def __init__(self, graph: WeightedGraph | None, vol: float, root: int):
        self.graph = graph
        self.vol = vol
        self.root = root
        self.nodes: dict[int, Node] = {}
        self.leaf_of: dict[int, int] = {}
        self.next_id = 0

    # -- structure -------------------------------------------------------
    def __contains__(self, a: int) -> bool:
        return a in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, a: int) -> Node:
        try:
            return self.nodes[a]
        except KeyError:
            raise InvalidNode(f"no node with id {a}") from None

    def is_leaf(self, a: int) -> bool:
        return not self.nodes[a].children

    def children(self, a: int) -> list[int]:
        return self.node(a).children

    def parent(self, a: int) -> int | None:
        return self.node(a).parent

    def depth(self, a: int) -> int:
        d = 0
        p = self.node(a).parent
        while p is not None:
            d += 1
            p = self.nodes[p].parent
        return d

    @property
    def height(self) -> int:
        return self.nodes[self.root].h

    def internal_nodes(self) -> list[int]:
        return [a for a, nd in self.nodes.items() if nd.children]

    def leaves(self) -> list[int]:
        return [a for a, nd in self.nodes.items() if not nd.children]

    def walk(self, a: int | None = None) -> Iterable[int]:
        """Pre-order traversal, children in stored order."""
        stack = [self.root if a is None else a]
        while stack:
            x = stack.pop()
            yield x
            stack.extend(reversed(self.nodes[x].children))

    def vertices(self, a: int) -> list[int]:
        return sorted(self.nodes[x].vertex for x in self.walk(a) if not self.nodes[x].children)

    def child_toward(self, ancestor: int, vertex: int) -> int | None:
        """Child of ``ancestor`` whose subtree holds ``vertex`` (None if outside)."""
        x = self.leaf_of[vertex]
        if x == ancestor:
            return None
        while True:
            p = self.nodes[x].parent
            if p is None:
                return None
            if p == ancestor:
                return x
            x = p

    def cached_entropy(self) -> float:
        return math.fsum(nd.term for a, nd in self.nodes.items() if a != self.root)

    def partition(self) -> list[list[int]]:
        """Vertex sets of the root's children, ordered by smallest member."""
        return sorted((self.vertices(c) for c in self.nodes[self.root].children), key=lambda s: s[0])

    def new_id(self) -> int:
        i = self.next_id
        self.next_id += 1
        return i

    def copy(self) -> "EncodingTree":
        t = EncodingTree(self.graph, self.vol, self.root)
        for a, nd in self.nodes.items():
            t.nodes[a] = Node(nd.id, nd.parent, list(nd.children), nd.vertex, nd.V, nd.g,
                              nd.term, nd.h, nd.sg, nd.sgl, dict(nd.nbr))
        t.leaf_of = dict(self.leaf_of)
        t.next_id = self.next_id
        return t

    # -- cache maintenance ------------------------------------------------
    def refresh_term(self, a: int) -> None:
        nd = self.nodes[a]
        if nd.parent is None:
            nd.term = 0.0
        else:
            nd.term = entropy_term(nd.g, nd.V, self.nodes[nd.parent].V, self.vol)

    def refresh_child_sums(self, a: int) -> None:
        nd = self.nodes[a]
        kids = [self.nodes[c] for c in nd.children]
        nd.sg = math.fsum(k.g for k in kids)
        nd.sgl = math.fsum(k.g * math.log2(k.V) for k in kids if k.g != 0)

    def refresh_height(self, a: int) -> None:
        """Recompute ``h`` for ``a`` and propagate upward while it changes."""
        x: int | None = a
        while x is not None:
            nd = self.nodes[x]
            h = 1 + max(self.nodes[c].h for c in nd.children) if nd.children else 0
            if h == nd.h and x != a:
                break
            nd.h = h
            x = nd.parent

    def rebuild_caches(self) -> None:
        """Recompute every cache from the graph (requires ``self.graph``)."""
        g = self.graph
        if g is None:
            raise InputError("tree has no graph attached")
        v_sets = _vertex_sets(self)
        for a in self._bottom_up():
            nd = self.nodes[a]
            nd.V, nd.g = _volume_and_boundary(g, v_sets[a])
            nd.h = 1 + max(self.nodes[c].h for c in nd.children) if nd.children else 0
            nd.nbr = {}
        for a in self.nodes:
            self.refresh_term(a)
            self.refresh_child_sums(a)
        pair_cuts: dict[tuple[int, int], list[float]] = {}
        for u, v, w in g.edges():
            if w <= 0:
                continue
            cu, cv = sorted(self._split_children(u, v))
            pair_cuts.setdefault((cu, cv), []).append(w)
        for (cu, cv), ws in pair_cuts.items():
            c = math.fsum(ws)
            self.nodes[cu].nbr[cv] = c
            self.nodes[cv].nbr[cu] = c

    def _split_children(self, u: int, v: int) -> tuple[int, int]:
        """The two brothers right below the lowest common ancestor of u and v."""
        path_u = self._path_to_root(self.leaf_of[u])
        on_u = {x: i for i, x in enumerate(path_u)}
        prev, x = self.leaf_of[v], self.leaf_of[v]
        while x not in on_u:
            prev, x = x, self.nodes[x].parent
        return path_u[on_u[x] - 1], prev

    def _path_to_root(self, a: int) -> list[int]:
        out = [a]
        while self.nodes[out[-1]].parent is not None:
            out.append(self.nodes[out[-1]].parent)
        return out

    def _bottom_up(self) -> list[int]:
        return list(reversed(list(self.walk())))

    # -- serialization ----------------------------------------------------
    def to_json_nodes(self) -> list[dict]:
        order = [self.root] + sorted(a for a in self.nodes if a != self.root)
        out = []
        for a in order:
            nd = self.nodes[a]
            rec = {"id": a, "parent": nd.parent, "children": list(nd.children)}
            if not nd.children:
                rec["leaf_vertex"] = nd.vertex
            rec.update(V=nd.V, g=nd.g, term=nd.term)
            out.append(rec)
        return out

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_nodes(), indent=1) + "\n")


# -- construction ------------------------------------------------------------

def from_structure(
    g: WeightedGraph,
    children: dict[int, list[int]],
    leaf_vertex: dict[int, int],
    root: int,
) -> EncodingTree:
    """Build a tree from explicit child lists and compute all caches from ``g``."""
    if not g.volume > 0:
        raise ZeroVolume("encoding trees need a graph with positive volume")
    t = EncodingTree(g, g.volume, root)
    ids = set(children) | set(leaf_vertex) | {root}
    for kids in children.values():
        ids.update(kids)
    for a in ids:
        t.nodes[a] = Node(a, None, list(children.get(a, [])), leaf_vertex.get(a))
    for a, kids in children.items():
        for c in kids:
            if t.nodes[c].parent is not None:
                raise InvalidTree(f"node {c} has two parents")
            t.nodes[c].parent = a
    if t.nodes[root].parent is not None:
        raise InvalidTree("root has a parent")
    for a, v in leaf_vertex.items():
        if v in t.leaf_of:
            raise InvalidTree(f"vertex {v} appears in two leaves")
        t.leaf_of[v] = a
    t.next_id = max(ids) + 1
    report = _structural_violations(t, g.n)
    if report:
        raise InvalidTree("; ".join(report))
    t.rebuild_caches()
    return t


def flat_tree(g: WeightedGraph) -> EncodingTree:
    """Root with one leaf per vertex; leaf ids equal vertex ids, root id is ``n``."""
    if not g.volume > 0:
        raise ZeroVolume("encoding trees need a graph with positive volume")
    n = g.n
    t = EncodingTree(g, g.volume, n)
    root = Node(n, None, list(range(n)), None, V=g.volume, g=0.0, h=1 if n else 0)
    t.nodes[n] = root
    for v in range(n):
        d = g.degree(v)
        t.nodes[v] = Node(v, n, [], v, V=d, g=d,
                          nbr={u: w for u, w in g.neighbors(v).items() if w > 0})
        t.leaf_of[v] = v
        t.refresh_term(v)
    t.refresh_child_sums(n)
    t.next_id = n + 1
    return t


def tree_from_json(data: list[dict] | str | Path, g: WeightedGraph | None = None) -> EncodingTree:
    """Load the node-array JSON format.

    Cached ``V``, ``g`` and ``term`` values are taken verbatim so that a
    write/read cycle is bit-exact.  When ``g`` is given the remaining caches
    are rebuilt from it.
    """
    if isinstance(data, (str, Path)):
        try:
            data = json.loads(Path(data).read_text())
        except (OSError, ValueError) as exc:
            raise InvalidTree(f"cannot read tree file: {exc}") from exc
    if not isinstance(data, list) or not data:
        raise InvalidTree("tree JSON must be a non-empty array of nodes")
    try:
        root = int(data[0]["id"])
        if data[0]["parent"] is not None:
            raise InvalidTree("first node must be the root")
        vol = data[0]["V"]
        t = EncodingTree(g, float(vol), root)
        for rec in data:
            a = int(rec["id"])
            if a in t.nodes:
                raise InvalidTree(f"duplicate node id {a}")
            vertex = rec.get("leaf_vertex")
            t.nodes[a] = Node(a, rec["parent"], [int(c) for c in rec["children"]],
                              None if vertex is None else int(vertex),
                              V=float(rec["V"]), g=float(rec["g"]), term=float(rec["term"]))
            if vertex is not None:
                if int(vertex) in t.leaf_of:
                    raise InvalidTree(f"vertex {vertex} appears in two leaves")
                t.leaf_of[int(vertex)] = a
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidTree(f"malformed tree JSON: {exc}") from exc
    t.next_id = max(t.nodes) + 1
    n = g.n if g is not None else len(t.leaf_of)
    problems = _structural_violations(t, n)
    if problems:
        raise InvalidTree("; ".join(problems))
    for a in t._bottom_up():
        kids = t.nodes[a].children
        t.nodes[a].h = 1 + max(t.nodes[c].h for c in kids) if kids else 0
    if g is not None:
        saved = {a: (nd.V, nd.g, nd.term) for a, nd in t.nodes.items()}
        t.rebuild_caches()
        for a, (v, gg, term) in saved.items():
            nd = t.nodes[a]
            nd.V, nd.g, nd.term = v, gg, term
    return t


# -- entropy -----------------------------------------------------------------

def node_entropy_term(g: WeightedGraph, t: EncodingTree, a: int) -> float:
    nd = t.node(a)
    if nd.parent is None:
        raise RootHasNoTerm("the root carries no entropy term")
    return entropy_term(nd.g, nd.V, t.nodes[nd.parent].V, g.volume)


def tree_entropy(g: WeightedGraph, t: EncodingTree) -> float:
    """Structural entropy of ``g`` under ``t``, recomputed from the graph alone."""
    problems = _structural_violations(t, g.n)
    if problems:
        raise InvalidTree("; ".join(problems))
    if not g.volume > 0:
        raise ZeroVolume("graph has zero volume")
    v_sets = _vertex_sets(t)
    stats = {a: _volume_and_boundary(g, s) for a, s in v_sets.items()}
    terms = []
    for a, nd in t.nodes.items():
        if nd.parent is None:
            continue
        v_a, g_a = stats[a]
        terms.append(entropy_term(g_a, v_a, stats[nd.parent][0], g.volume))
    return math.fsum(terms)


def _vertex_sets(t: EncodingTree) -> dict[int, frozenset[int]]:
    sets: dict[int, frozenset[int]] = {}
    for a in t._bottom_up():
        nd = t.nodes[a]
        if nd.children:
            sets[a] = frozenset().union(*(sets[c] for c in nd.children))
        else:
            sets[a] = frozenset() if nd.vertex is None else frozenset([nd.vertex])
    return sets


def _volume_and_boundary(g: WeightedGraph, members: frozenset[int]) -> tuple[float, float]:
    vol = math.fsum(g.degrees[v] for v in sorted(members))
    out = math.fsum(w for u in sorted(members) for v, w in g.neighbors(u).items() if v not in members)
    return vol, out


# -- validation --------------------------------------------------------------

@dataclass
class ValidationResult:
    valid: bool
    violations: list[str]

    def __bool__(self) -> bool:
        return self.valid


def _structural_violations(t: EncodingTree, n: int) -> list[str]:
    """Checks the five defining properties; returns human-readable problems."""
    out: list[str] = []
    if t.root not in t.nodes:
        return ["root node missing"]
    for a, nd in t.nodes.items():
        for c in nd.children:
            if c not in t.nodes:
                out.append(f"node {a} lists unknown child {c}")
            elif t.nodes[c].parent != a:
                out.append(f"child {c} of node {a} points to parent {t.nodes[c].parent}")
        if nd.parent is not None and (nd.parent not in t.nodes or a not in t.nodes[nd.parent].children):
            out.append(f"node {a} is not listed by its parent {nd.parent}")
        if len(set(nd.children)) != len(nd.children):
            out.append(f"node {a} lists a child twice")
    if out:
        return out
    seen: set[int] = set()
    stack = [t.root]
    while stack:
        x = stack.pop()
        if x in seen:
            return [f"cycle through node {x}"]
        seen.add(x)
        stack.extend(t.nodes[x].children)
    if len(seen) != len(t.nodes):
        out.append(f"nodes unreachable from root: {sorted(set(t.nodes) - seen)}")
        return out
    for a, nd in t.nodes.items():
        if not nd.children and (nd.vertex is None or not 0 <= nd.vertex < n):
            out.append(f"property 5: leaf {a} is not a singleton of a valid vertex")
        if nd.children and nd.vertex is not None:
            out.append(f"internal node {a} carries a leaf vertex")
    sets: dict[int, set[int]] = {}
    for a in t._bottom_up():
        nd = t.nodes[a]
        if not nd.children:
            sets[a] = {nd.vertex} if nd.vertex is not None else set()
            continue
        acc: set[int] = set()
        for c in nd.children:
            dup = acc & sets[c]
            if dup:
                out.append(f"property 4: children of node {a} overlap on {sorted(dup)}")
            acc |= sets[c]
        sets[a] = acc
    if sets[t.root] != set(range(n)):
        out.append("property 2: root does not cover exactly the vertex set")
    return out


def validate(g: WeightedGraph, t: EncodingTree, height_cap: int | None = None) -> ValidationResult:
    """Check the encoding-tree properties and every cache against recomputation."""
    violations = _structural_violations(t, g.n)
    if violations:
        return ValidationResult(False, violations)
    if height_cap is not None and t.height > height_cap:
        violations.append(f"height {t.height} exceeds cap {height_cap}")
    vol = g.volume
    atol = 1e-12 * max(vol, 1.0)

    def close(a: float, b: float) -> bool:
        return math.isclose(a, b, rel_tol=REL_TOL, abs_tol=atol)

    v_sets = _vertex_sets(t)
    stats = {a: _volume_and_boundary(g, s) for a, s in v_sets.items()}
    heights: dict[int, int] = {}
    for a in t._bottom_up():
        nd = t.nodes[a]
        heights[a] = 1 + max(heights[c] for c in nd.children) if nd.children else 0
        if nd.h != heights[a]:
            violations.append(f"node {a}: cached height {nd.h} != {heights[a]}")
        v_a, g_a = stats[a]
        if not close(nd.V, v_a):
            violations.append(f"node {a}: cached V {nd.V!r} != {v_a!r}")
        if not close(nd.g, g_a):
            violations.append(f"node {a}: cached g {nd.g!r} != {g_a!r}")
        if nd.parent is not None and v_a > 0:
            term = entropy_term(g_a, v_a, stats[nd.parent][0], vol)
            if not math.isclose(nd.term, term, rel_tol=REL_TOL, abs_tol=1e-12):
                violations.append(f"node {a}: cached term {nd.term!r} != {term!r}")
    if not math.isclose(t.vol, vol, rel_tol=REL_TOL):
        violations.append(f"tree volume {t.vol!r} != graph volume {vol!r}")
    return ValidationResult(not violations, violations)


def validate_optimizer_caches(g: WeightedGraph, t: EncodingTree) -> list[str]:
    """Audit the child sums and brother cuts used for operator scoring."""
    problems = []
    ref = t.copy()
    ref.graph = g
    ref.rebuild_caches()
    for a, nd in t.nodes.items():
        r = ref.nodes[a]
        if not math.isclose(nd.sg, r.sg, rel_tol=REL_TOL, abs_tol=1e-12):
            problems.append(f"node {a}: child g sum {nd.sg!r} != {r.sg!r}")
        if not math.isclose(nd.sgl, r.sgl, rel_tol=REL_TOL, abs_tol=1e-12):
            problems.append(f"node {a}: child g*log V sum {nd.sgl!r} != {r.sgl!r}")
        if set(nd.nbr) != set(r.nbr):
            problems.append(f"node {a}: brother set {sorted(nd.nbr)} != {sorted(r.nbr)}")
        else:
            for b, c in nd.nbr.items():
                if not math.isclose(c, r.nbr[b], rel_tol=REL_TOL, abs_tol=1e-12):
                    problems.append(f"node {a}: cut to {b} {c!r} != {r.nbr[b]!r}")
    return problems
