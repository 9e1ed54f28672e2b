"""Weighted undirected graphs and one-dimensional structural entropy."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateEdge,
    InputError,
    NegativeWeight,
    OverlappingSets,
    SelfLoop,
    VertexOutOfRange,
    ZeroDegreeVertex,
    ZeroVolume,
)

Edge = tuple[int, int, float]


class GraphFormatError(InputError):
    pass


class WeightedGraph:
    """Immutable undirected weighted graph over dense vertex ids ``0..n-1``.

    Degrees and volume are computed once at construction.
    """

    __slots__ = ("n", "_weights", "_adj", "degrees", "volume")

    def __init__(self, n: int, weights: dict[tuple[int, int], float]):
        self.n = n
        self._weights = dict(sorted(weights.items()))
        adj: list[dict[int, float]] = [{} for _ in range(n)]
        for (u, v), w in self._weights.items():
            adj[u][v] = w
            adj[v][u] = w
        self._adj = [dict(sorted(a.items())) for a in adj]
        self.degrees = np.array([math.fsum(a.values()) for a in self._adj], dtype=float)
        self.volume = math.fsum(self.degrees)

    # -- queries ---------------------------------------------------------
    @property
    def m(self) -> int:
        return len(self._weights)

    def edges(self) -> list[Edge]:
        return [(u, v, w) for (u, v), w in self._weights.items()]

    def weight(self, u: int, v: int) -> float:
        if u > v:
            u, v = v, u
        return self._weights.get((u, v), 0.0)

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self._weights

    def neighbors(self, v: int) -> dict[int, float]:
        """Mapping neighbor -> weight, ordered by neighbor id. Do not mutate."""
        return self._adj[v]

    def degree(self, v: int) -> float:
        return float(self.degrees[v])

    def total_weight(self) -> float:
        return math.fsum(self._weights.values())

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for (u, v), w in self._weights.items():
            a[u, v] = a[v, u] = w
        return a

    def scaled(self, c: float) -> "WeightedGraph":
        if not c > 0:
            raise InputError(f"scale factor must be positive, got {c}")
        return WeightedGraph(self.n, {e: w * c for e, w in self._weights.items()})

    def with_weights(self, weights: dict[tuple[int, int], float]) -> "WeightedGraph":
        return WeightedGraph(self.n, weights)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return self.n == other.n and self._weights == other._weights

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.n}, m={self.m}, volume={self.volume:.6g})"


def build_graph(n: int, edge_list: Iterable[Sequence]) -> WeightedGraph:
    """Validate an edge list and build a :class:`WeightedGraph`.

    Endpoints may be given in either order; they are stored as ``u < v``.
    """
    if n < 0:
        raise VertexOutOfRange(f"vertex count must be non-negative, got {n}")
    weights: dict[tuple[int, int], float] = {}
    for item in edge_list:
        u, v, w = int(item[0]), int(item[1]), float(item[2])
        if u == v:
            raise SelfLoop(f"self-loop on vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise VertexOutOfRange(f"edge ({u}, {v}) outside 0..{n - 1}")
        if not w >= 0 or not math.isfinite(w):
            raise NegativeWeight(f"edge ({u}, {v}) has invalid weight {w}")
        key = (u, v) if u < v else (v, u)
        if key in weights:
            raise DuplicateEdge(f"duplicate edge {key}")
        weights[key] = w
    return WeightedGraph(n, weights)


def cut_weight(g: WeightedGraph, s1: Iterable[int], s2: Iterable[int]) -> float:
    """Total weight of edges with one endpoint in ``s1`` and the other in ``s2``."""
    a, b = set(s1), set(s2)
    if a & b:
        raise OverlappingSets(f"sets overlap on {sorted(a & b)}")
    if len(a) > len(b):
        a, b = b, a
    return math.fsum(w for u in sorted(a) for v, w in g.neighbors(u).items() if v in b)


def volume_of(g: WeightedGraph, s: Iterable[int]) -> float:
    return math.fsum(g.degrees[v] for v in sorted(set(s)))


def check_positive_degrees(g: WeightedGraph) -> None:
    if not g.volume > 0:
        raise ZeroVolume("graph has zero volume")
    zero = np.flatnonzero(g.degrees <= 0)
    if zero.size:
        raise ZeroDegreeVertex(f"vertices with zero degree: {zero.tolist()}")


def one_dim_entropy(g: WeightedGraph) -> float:
    """Shannon entropy (bits) of the degree distribution ``d_v / vol(G)``."""
    check_positive_degrees(g)
    vol = g.volume
    return math.fsum(-(d / vol) * math.log2(d / vol) for d in g.degrees)


# -- TSV format ------------------------------------------------------------

def format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_graph_tsv(g: WeightedGraph, path: str | Path) -> None:
    lines = [f"#n={g.n}"]
    lines += [f"{u}\t{v}\t{format_float(w)}" for u, v, w in g.edges()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_graph_tsv(path: str | Path) -> WeightedGraph:
    """Read the ``#n=<count>`` header + ``u<TAB>v<TAB>w`` edge format."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise GraphFormatError(f"cannot read graph file {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#n="):
        raise GraphFormatError(f"{path}: missing '#n=<count>' header")
    try:
        n = int(lines[0][3:].strip())
    except ValueError as exc:
        raise GraphFormatError(f"{path}: bad header {lines[0]!r}") from exc
    edges = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split("\t")
        if len(parts) != 3:
            raise GraphFormatError(f"{path}:{lineno}: expected 3 tab-separated fields")
        try:
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise GraphFormatError(f"{path}:{lineno}: {exc}") from exc
        if u == v:
            raise SelfLoop(f"{path}:{lineno}: self-loop on vertex {u}")
        if u > v:
            raise GraphFormatError(f"{path}:{lineno}: edge endpoints must satisfy u < v")
        edges.append((u, v, w))
    return build_graph(n, edges)
