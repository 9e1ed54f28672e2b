"""Independent reference computations and generators shared by the tests."""

from __future__ import annotations

import itertools
import math

import numpy as np
from hypothesis import strategies as st

from sird.graph import WeightedGraph, build_graph


def complete_graph(n: int, w: float = 1.0) -> WeightedGraph:
    return build_graph(n, [(u, v, w) for u, v in itertools.combinations(range(n), 2)])


def ref_h1(adj: np.ndarray) -> float:
    """One-dimensional entropy straight from a dense adjacency matrix."""
    d = adj.sum(axis=1)
    p = d / d.sum()
    return float(-sum(x * math.log2(x) for x in p if x > 0))


def dense_knn(adj: np.ndarray, k: int) -> np.ndarray:
    """Union-rule k-NN from a dense matrix; ties prefer the lower neighbor id."""
    n = adj.shape[0]
    keep = np.zeros_like(adj, dtype=bool)
    for u in range(n):
        order = sorted((v for v in range(n) if v != u and adj[u, v] > 0), key=lambda v: (-adj[u, v], v))
        for v in order[:k]:
            keep[u, v] = keep[v, u] = True
    return np.where(keep, adj, 0.0)


def reference_selection(adj: np.ndarray) -> tuple[int, dict[int, float]]:
    n = adj.shape[0]
    w = adj[np.triu_indices(n, 1)]
    corrected = adj + (w.mean() / (2 * n)) * (1 - np.eye(n))
    hs = {k: ref_h1(dense_knn(corrected, k)) for k in range(1, n)}
    minima = [k for k in range(2, n - 1) if hs[k] < hs[k - 1] and hs[k] < hs[k + 1]]
    if minima:
        return minima[0], hs
    return min(hs, key=lambda k: (hs[k], k)), hs


def complete_from_matrix(adj: np.ndarray):
    n = adj.shape[0]
    return build_graph(n, [(u, v, float(adj[u, v])) for u, v in itertools.combinations(range(n), 2)])


def random_complete(seed: int, n: int):
    rng = np.random.default_rng(seed)
    a = rng.random((n, n))
    a = np.triu(a, 1)
    return complete_from_matrix(a + a.T)


def ref_tree_entropy(adj: np.ndarray, shape) -> float:
    """Entropy of a nested-list tree shape under the root, from dense sums.

    A shape item is a vertex id (leaf) or a list of items (internal node).
    """
    vol = adj.sum()
    deg = adj.sum(axis=1)

    def members(item):
        if isinstance(item, (list, tuple)):
            return [v for x in item for v in members(x)]
        return [item]

    def walk(items, v_parent):
        total = 0.0
        for item in items:
            s = members(item)
            mask = np.zeros(len(deg), dtype=bool)
            mask[s] = True
            v = deg[mask].sum()
            g = adj[np.ix_(mask, ~mask)].sum()
            if g > 0 and v != v_parent:
                total -= g / vol * math.log2(v / v_parent)
            if isinstance(item, (list, tuple)):
                total += walk(item, v)
        return total

    return walk(shape, vol)


@st.composite


def graphs(draw, min_n: int = 3, max_n: int = 10, connected_floor: bool = True):
    """Random weighted graphs with every vertex of positive degree."""
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    weights = st.floats(1e-3, 10.0, allow_nan=False, allow_infinity=False)
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    ws = draw(st.lists(weights, min_size=len(pairs), max_size=len(pairs)))
    edges = {p: w for p, k, w in zip(pairs, keep, ws) if k}
    if connected_floor:
        for v in range(1, n):
            edges.setdefault((v - 1, v), ws[v - 1])
    return build_graph(n, [(u, v, w) for (u, v), w in edges.items()])


def random_operation(rng: np.random.Generator, t, height_cap: int):
    """Pick a random admissible (kind, b1, b2) among brother pairs, or None."""
    from sird.optimize import combine_height

    options = []
    for a in t.internal_nodes():
        kids = t.children(a)
        for i, x in enumerate(kids):
            for y in kids[i + 1:]:
                if t.children(x) or t.children(y):
                    options.append(("merge", x, y))
                if combine_height(t, x, y) <= height_cap:
                    options.append(("combine", x, y))
    if not options:
        return None
    return options[int(rng.integers(len(options)))]
