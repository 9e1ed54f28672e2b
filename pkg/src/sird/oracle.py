"""Exhaustive minimum structural entropy for small graphs.

Height-2 trees correspond one-to-one to set partitions of the vertices;
height-3 trees to partitions whose blocks may be partitioned once more.
Single-child pass-through levels are skipped since they never change the
entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import GraphTooLarge, InputError
from .graph import WeightedGraph, check_positive_degrees
from .tree import EncodingTree, entropy_term, from_structure

TIE_TOL = 1e-9
MAX_HEIGHT = 3

# a tree shape: list of items, each a vertex id or a list of items
Shape = list


@dataclass
class OracleResult:
    min_entropy: float
    optimal_trees: list[EncodingTree] = field(default_factory=list)
    enumerated_count: int = 0
    optimal_shapes: list[Shape] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "min_entropy": self.min_entropy,
            "enumerated_count": self.enumerated_count,
            "optimal_partitions": [_shape_to_json(s) for s in self.optimal_shapes],
        }


def set_partitions(items: Sequence[int]) -> Iterator[list[list[int]]]:
    """All set partitions of ``items`` (restricted-growth order)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + [list(b) for b in part]
        for i in range(len(part)):
            yield [list(b) for b in part[:i]] + [[first] + part[i]] + [list(b) for b in part[i + 1:]]


def bell_number(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def _block_item(block: list[int]):
    return block[0] if len(block) == 1 else block


def _shapes(vertices: list[int], height: int) -> Iterator[Shape]:
    if height <= 1:
        yield list(vertices)
        return
    for part in set_partitions(vertices):
        options = [_block_options(b, height - 1) for b in part]
        yield from _product(options)


def _block_options(block: list[int], height: int) -> list:
    if len(block) == 1:
        return [block[0]]
    opts: list = [list(block)]
    if height >= 2:
        for sub in set_partitions(block):
            if len(sub) == 1 or all(len(s) == 1 for s in sub):
                continue
            opts.append([_block_item(s) for s in sub])
    return opts


def _product(options: list[list]) -> Iterator[Shape]:
    if not options:
        yield []
        return
    for head in options[0]:
        for tail in _product(options[1:]):
            yield [head] + tail


def _shape_to_json(shape) -> list:
    return [x if isinstance(x, int) else _shape_to_json(x) for x in shape]


class _SubsetStats:
    """Volume and boundary for every vertex subset (bitmask), n <= 7."""

    def __init__(self, g: WeightedGraph):
        n = g.n
        self.vol = g.volume
        self.V = [0.0] * (1 << n)
        self.g = [0.0] * (1 << n)
        for mask in range(1, 1 << n):
            members = [v for v in range(n) if mask >> v & 1]
            self.V[mask] = math.fsum(g.degrees[v] for v in members)
            self.g[mask] = math.fsum(w for u in members for v, w in g.neighbors(u).items()
                                     if not mask >> v & 1)

    def entropy(self, shape: Shape, parent_mask: int) -> float:
        total = []
        for item in shape:
            if isinstance(item, int):
                m = 1 << item
                total.append(entropy_term(self.g[m], self.V[m], self.V[parent_mask], self.vol))
            else:
                m = _mask(item)
                total.append(entropy_term(self.g[m], self.V[m], self.V[parent_mask], self.vol))
                total.append(self.entropy(item, m))
        return math.fsum(total)


def _mask(shape) -> int:
    m = 0
    for x in shape:
        m |= (1 << x) if isinstance(x, int) else _mask(x)
    return m


def shape_to_tree(g: WeightedGraph, shape: Shape) -> EncodingTree:
    n = g.n
    children: dict[int, list[int]] = {}
    next_id = [n + 1]

    def build(items) -> list[int]:
        ids = []
        for x in items:
            if isinstance(x, int):
                ids.append(x)
            else:
                node = next_id[0]
                next_id[0] += 1
                children[node] = build(x)
                ids.append(node)
        return ids

    children[n] = build(shape)
    return from_structure(g, children, {v: v for v in range(n)}, n)


def enumerate_optimal(g: WeightedGraph, height_cap: int, n_max: int = 7) -> OracleResult:
    """Minimum entropy over every encoding tree of height at most ``height_cap``."""
    if g.n > n_max:
        raise GraphTooLarge(f"oracle limited to {n_max} vertices, got {g.n}")
    if not 1 <= height_cap <= MAX_HEIGHT:
        raise InputError(f"oracle supports heights 1..{MAX_HEIGHT}, got {height_cap}")
    check_positive_degrees(g)
    stats = _SubsetStats(g)
    full = (1 << g.n) - 1
    scored = []
    for shape in _shapes(list(range(g.n)), height_cap):
        scored.append((stats.entropy(shape, full), shape))
    best = min(h for h, _ in scored)
    shapes = [s for h, s in scored if h <= best + TIE_TOL]
    return OracleResult(
        min_entropy=best,
        optimal_trees=[shape_to_tree(g, s) for s in shapes],
        enumerated_count=len(scored),
        optimal_shapes=shapes,
    )
