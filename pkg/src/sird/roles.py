"""Roles, sub-roles and their representations read off an encoding tree."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embedding import EmbeddingMatrix
from .errors import EmptyTree, InputError, InvalidNode
from .graph import WeightedGraph
from .tree import EncodingTree, node_entropy_term


@dataclass
class Role:
    id: str
    node: int
    actions: list[int]
    representation: np.ndarray | None
    subroles: list["Role"] = field(default_factory=list)

    def to_dict(self, labels: list[str]) -> dict:
        rep = [] if self.representation is None else [float(x) for x in self.representation]
        return {
            "id": self.id,
            "actions": [labels[a] for a in self.actions],
            "representation": rep,
            "subroles": [s.to_dict(labels) for s in self.subroles],
        }


@dataclass
class RoleSet:
    roles: list[Role]
    n_actions: int
    labels: list[str]

    def assignment(self) -> np.ndarray:
        """Role index per action."""
        out = np.full(self.n_actions, -1, dtype=int)
        for j, r in enumerate(self.roles):
            out[r.actions] = j
        return out

    def action_spaces(self) -> list[list[int]]:
        return [list(r.actions) for r in self.roles]

    def to_dict(self) -> dict:
        return {"roles": [r.to_dict(self.labels) for r in self.roles]}

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    def write_label_tsv(self, path: str | Path) -> None:
        assign = self.assignment()
        lines = [f"{self.labels[a]}\t{self.roles[assign[a]].id}" for a in range(self.n_actions)]
        Path(path).write_text("\n".join(lines) + "\n")


def _child_terms(g: WeightedGraph | None, t: EncodingTree, a: int) -> list[float]:
    kids = t.nodes[a].children
    if g is None:
        return [t.nodes[c].term for c in kids]
    return [node_entropy_term(g, t, c) for c in kids]


def aggregation_weights(g: WeightedGraph | None, t: EncodingTree, a: int) -> np.ndarray:
    """Children's entropy terms normalized to sum 1; uniform when all vanish."""
    terms = np.array(_child_terms(g, t, a), dtype=float)
    total = terms.sum()
    if total > 0:
        return terms / total
    return np.full(len(terms), 1.0 / len(terms))


def aggregate_representation(
    g: WeightedGraph | None,
    t: EncodingTree,
    a: int,
    e: EmbeddingMatrix,
    _memo: dict[int, np.ndarray] | None = None,
) -> np.ndarray:
    """Bottom-up entropy-weighted average of the representations below ``a``.

    Leaves take the embedding row of their action.  With ``g=None`` the
    tree's cached entropy terms are used.
    """
    if a not in t.nodes:
        raise InvalidNode(f"no node with id {a}")
    memo = {} if _memo is None else _memo
    if a in memo:
        return memo[a]
    nd = t.nodes[a]
    if not nd.children:
        z = e.values[nd.vertex]
    else:
        w = aggregation_weights(g, t, a)
        reps = np.array([aggregate_representation(g, t, c, e, memo) for c in nd.children])
        z = w @ reps
    memo[a] = z
    return z


def _subroles(g, t: EncodingTree, a: int, prefix: str, e, memo) -> list[Role]:
    internal = [c for c in t.nodes[a].children if t.nodes[c].children]
    internal.sort(key=lambda c: t.vertices(c)[0])
    out = []
    for k, c in enumerate(internal):
        rid = f"{prefix}.{k}"
        rep = None if e is None else aggregate_representation(g, t, c, e, memo)
        out.append(Role(rid, c, t.vertices(c), rep, _subroles(g, t, c, rid, e, memo)))
    return out


def extract_roles(
    g: WeightedGraph | None,
    t: EncodingTree,
    e: EmbeddingMatrix | None,
    labels: list[str] | None = None,
) -> RoleSet:
    """Roles are the root's children, ordered by their smallest action."""
    root = t.nodes[t.root]
    if not root.children:
        raise EmptyTree("tree has no roles")
    n = len(t.leaf_of)
    if e is not None and e.n != n:
        raise InputError(f"embedding has {e.n} rows but the tree covers {n} actions")
    if labels is None:
        labels = list(e.labels) if e is not None else [str(i) for i in range(n)]
    memo: dict[int, np.ndarray] = {}
    kids = sorted(root.children, key=lambda c: t.vertices(c)[0])
    roles = []
    for j, c in enumerate(kids):
        rep = None if e is None else aggregate_representation(g, t, c, e, memo)
        roles.append(Role(str(j), c, t.vertices(c), rep, _subroles(g, t, c, str(j), e, memo)))
    return RoleSet(roles, n, list(labels))
