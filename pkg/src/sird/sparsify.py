"""Entropy-guided k-NN sparsification of the action graph."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyGraph, KOutOfRange, TooFewVertices
from .graph import WeightedGraph, one_dim_entropy

#: entropies closer than this are treated as equal when locating minima
ENTROPY_TIE_TOL = 1e-12


@dataclass
class SparsificationReport:
    k_star: int
    entropies: dict[int, float]
    lmse_ks: list[int]
    delta: float
    mean_weight: float
    fallback: bool = False
    n: int = 0
    k_range: tuple[int, int] = field(default=(1, 1))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k_star": self.k_star,
            "delta": self.delta,
            "mean_weight": self.mean_weight,
            "lmse_ks": list(self.lmse_ks),
            "fallback": self.fallback,
            "entropies": {str(k): h for k, h in sorted(self.entropies.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SparsificationReport":
        ents = {int(k): float(v) for k, v in d["entropies"].items()}
        return cls(k_star=int(d["k_star"]), entropies=ents, lmse_ks=[int(k) for k in d["lmse_ks"]],
                   delta=float(d["delta"]), mean_weight=float(d["mean_weight"]),
                   fallback=bool(d["fallback"]), n=int(d["n"]),
                   k_range=(min(ents), max(ents)) if ents else (1, 1))

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def correct_weights(g: WeightedGraph) -> tuple[WeightedGraph, float]:
    """Shift every edge weight by ``mean_weight / (2 n)``.

    Returns the corrected graph and the shift used.
    """
    if g.m == 0:
        raise EmptyGraph("cannot correct weights of a graph without edges")
    mean_w = g.total_weight() / g.m
    delta = mean_w / (2 * g.n)
    return g.with_weights({(u, v): w + delta for u, v, w in g.edges()}), delta


def neighbor_ranking(g: WeightedGraph) -> list[list[int]]:
    """Per vertex, neighbors by decreasing weight; ties go to the lower id."""
    return [sorted(g.neighbors(u), key=lambda v, u=u: (-g.neighbors(u)[v], v)) for u in range(g.n)]


def knn_graph(g: WeightedGraph, k: int, ranking: list[list[int]] | None = None) -> WeightedGraph:
    """Keep an edge if it is among the ``k`` heaviest of either endpoint."""
    if not 1 <= k <= max(g.n - 1, 0):
        raise KOutOfRange(f"k={k} outside 1..{g.n - 1}")
    if ranking is None:
        ranking = neighbor_ranking(g)
    kept = {}
    for u in range(g.n):
        for v in ranking[u][:k]:
            key = (u, v) if u < v else (v, u)
            kept[key] = g.weight(u, v)
    return g.with_weights(kept)


def local_minima(entropies: dict[int, float], tol: float = ENTROPY_TIE_TOL) -> list[int]:
    """Interior k whose entropy is strictly below both neighbors."""
    ks = sorted(entropies)
    out = []
    for k in ks[1:-1]:
        h = entropies[k]
        if h < entropies[k - 1] - tol and h < entropies[k + 1] - tol:
            out.append(k)
    return out


def select_k_star(g: WeightedGraph) -> tuple[SparsificationReport, WeightedGraph]:
    n = g.n
    if n < 3:
        raise TooFewVertices(f"sparsification needs at least 3 vertices, got {n}")
    corrected, delta = correct_weights(g)
    ranking = neighbor_ranking(corrected)
    graphs = {k: knn_graph(corrected, k, ranking) for k in range(1, n)}
    entropies = {k: one_dim_entropy(gk) for k, gk in graphs.items()}
    lmse = local_minima(entropies)
    if lmse:
        k_star, fallback = lmse[0], False
    else:
        best = min(entropies.values())
        k_star = min(k for k, h in entropies.items() if h <= best + ENTROPY_TIE_TOL)
        fallback = True
    report = SparsificationReport(
        k_star=k_star,
        entropies=entropies,
        lmse_ks=lmse,
        delta=delta,
        mean_weight=g.total_weight() / g.m,
        fallback=fallback,
        n=n,
        k_range=(1, n - 1),
    )
    return report, graphs[k_star]

