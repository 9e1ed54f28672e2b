"""Seeded generators for planted-structure test data."""

from __future__ import annotations

import numpy as np

from .embedding import EmbeddingMatrix, TransitionTable
from .graph import WeightedGraph, build_graph


def planted_labels(n_blocks: int, block_size: int) -> np.ndarray:
    return np.repeat(np.arange(n_blocks), block_size)


def planted_embeddings(
    seed: int,
    n_blocks: int = 3,
    block_size: int = 5,
    d: int = 64,
    intra: float = 0.9,
    inter: float = 0.05,
) -> tuple[EmbeddingMatrix, np.ndarray]:
    """Embeddings whose component-wise correlation is about ``intra`` within a
    block and ``inter`` across blocks.

    Each row mixes a shared vector, a per-block vector and private noise
    with variances ``inter``, ``intra - inter`` and ``1 - intra``.
    """
    if not 0 <= inter <= intra <= 1:
        raise ValueError("need 0 <= inter <= intra <= 1")
    rng = np.random.default_rng(seed)
    labels = planted_labels(n_blocks, block_size)
    shared = rng.standard_normal(d)
    blocks = rng.standard_normal((n_blocks, d))
    noise = rng.standard_normal((labels.size, d))
    z = np.sqrt(inter) * shared + np.sqrt(intra - inter) * blocks[labels] + np.sqrt(1 - intra) * noise
    return EmbeddingMatrix(z, [f"a{i}" for i in range(labels.size)]), labels


def planted_transitions(
    seed: int,
    n_blocks: int = 3,
    block_size: int = 5,
    p: int = 40,
    rows_per_action: int = 60,
    action_jitter: float = 0.15,
    noise: float = 0.1,
) -> tuple[TransitionTable, np.ndarray]:
    """Linear dynamics where every action in a block shifts ``(o_next, r)``
    by nearly the same effect vector."""
    rng = np.random.default_rng(seed)
    labels = planted_labels(n_blocks, block_size)
    n = labels.size
    dyn = 0.5 * rng.standard_normal((p, p)) / np.sqrt(p)
    rw = rng.standard_normal(p) / np.sqrt(p)
    block_effect = rng.standard_normal((n_blocks, p + 1))
    effect = block_effect[labels] + action_jitter * rng.standard_normal((n, p + 1))
    actions = np.repeat(np.arange(n), rows_per_action)
    obs = rng.standard_normal((actions.size, p))
    nxt = obs @ dyn.T + effect[actions, :p] + noise * rng.standard_normal((actions.size, p))
    rew = obs @ rw + effect[actions, p] + noise * rng.standard_normal(actions.size)
    table = TransitionTable(actions, obs, nxt, rew, n_actions=n, labels=[f"a{i}" for i in range(n)])
    return table, labels


def two_triangles(bridge: float = 0.1) -> WeightedGraph:
    """Two unit triangles {0,1,2} and {3,4,5} joined by edge (2, 3)."""
    edges = [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (3, 4, 1.0), (3, 5, 1.0), (4, 5, 1.0)]
    if bridge > 0:
        edges.append((2, 3, bridge))
    return build_graph(6, edges)


def random_graph(rng: np.random.Generator, n: int, p_edge: float = 0.5) -> WeightedGraph:
    """Random graph with uniform(0, 1] weights and no isolated vertices."""
    edges = {}
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p_edge:
                edges[(u, v)] = 1.0 - rng.random()
    for u in range(n):
        if not any(u in e for e in edges):
            v = (u + 1 + int(rng.integers(n - 1))) % n
            edges[(min(u, v), max(u, v))] = 1.0 - rng.random()
    return build_graph(n, [(u, v, w) for (u, v), w in edges.items()])


def random_knn_graph(rng: np.random.Generator, n: int, k: int = 4, dim: int = 3) -> WeightedGraph:
    """Union k-NN graph of random points, weighted by a Gaussian kernel."""
    pts = rng.random((n, dim))
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
    np.fill_diagonal(d2, np.inf)
    scale = np.median(np.sort(d2, axis=1)[:, k - 1])
    edges = {}
    for u in range(n):
        for v in np.argsort(d2[u], kind="stable")[:k]:
            a, b = (u, int(v)) if u < v else (int(v), u)
            edges[(a, b)] = float(np.exp(-d2[u, v] / scale))
    return build_graph(n, [(a, b, w) for (a, b), w in edges.items()])
