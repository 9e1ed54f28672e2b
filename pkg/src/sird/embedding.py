"""Action representations and the action correlation graph.

The representation learner is a closed-form stand-in for an
encoder-decoder: it regresses the transition targets ``(o_next, r)`` on the
current observation, averages the residuals per action and keeps the
leading ``d`` directions of the resulting action-by-effect matrix.  Actions
whose effects are indistinguishable get identical rows.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DimensionTooLarge,
    DimensionTooSmall,
    InputError,
    MissingAction,
    TooFewActions,
)
from .graph import WeightedGraph, format_float

#: lower clamp for correlation edge weights, keeps every degree positive
EPS_WEIGHT = 1e-12


class CsvFormatError(InputError):
    pass


@dataclass
class EmbeddingMatrix:
    values: np.ndarray
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise InputError("embedding matrix must be two-dimensional")
        if not self.labels:
            self.labels = [str(i) for i in range(self.values.shape[0])]
        if len(self.labels) != self.values.shape[0]:
            raise InputError("one label per embedding row required")
        if len(set(self.labels)) != len(self.labels):
            raise InputError("duplicate action labels")
        if not np.all(np.isfinite(self.values)):
            raise InputError("embedding entries must be finite")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass
class TransitionTable:
    """Rows of ``(action, o, o_next, r)``; actions are dense ids ``0..n_actions-1``."""

    actions: np.ndarray
    obs: np.ndarray
    next_obs: np.ndarray
    reward: np.ndarray
    n_actions: int | None = None
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.actions = np.asarray(self.actions, dtype=int).reshape(-1)
        self.obs = np.atleast_2d(np.asarray(self.obs, dtype=float))
        self.next_obs = np.atleast_2d(np.asarray(self.next_obs, dtype=float))
        self.reward = np.asarray(self.reward, dtype=float).reshape(-1)
        rows = self.actions.shape[0]
        if self.obs.shape[0] != rows or self.next_obs.shape[0] != rows or self.reward.shape[0] != rows:
            raise InputError("transition columns have inconsistent row counts")
        if self.obs.shape != self.next_obs.shape:
            raise InputError("observation and next observation widths differ")
        if self.n_actions is None:
            self.n_actions = int(self.actions.max()) + 1 if rows else 0
        if rows and (self.actions.min() < 0 or self.actions.max() >= self.n_actions):
            raise InputError("action id out of range")
        if not self.labels:
            self.labels = [str(i) for i in range(self.n_actions)]
        if len(self.labels) != self.n_actions:
            raise InputError("one label per action required")

    @property
    def p(self) -> int:
        return self.obs.shape[1]


def _column_means(rows: np.ndarray) -> np.ndarray:
    # fsum: order-independent, so equal row multisets give bitwise-equal means
    return np.array([math.fsum(col) / rows.shape[0] for col in rows.T])


def learn_embeddings(t: TransitionTable, d: int) -> EmbeddingMatrix:
    n, p = t.n_actions, t.p
    counts = np.bincount(t.actions, minlength=n)
    missing = np.flatnonzero(counts == 0)
    if missing.size:
        raise MissingAction(f"actions without transitions: {missing.tolist()}")
    if d < 1 or d > min(n, p + 1):
        raise DimensionTooLarge(f"dimension {d} must lie in 1..min(n={n}, p+1={p + 1})")

    x = t.obs
    y = np.hstack([t.next_obs, t.reward[:, None]])
    coef, *_ = np.linalg.lstsq(x, y, rcond=None)

    effects = np.empty((n, p + 1))
    for a in range(n):
        sel = t.actions == a
        effects[a] = _column_means(y[sel]) - _column_means(x[sel]) @ coef

    _, s, vt = np.linalg.svd(effects, full_matrices=False)
    basis = vt[:d].T
    z = np.array([row @ basis for row in effects])
    for j in range(d):
        if z[np.argmax(np.abs(z[:, j])), j] < 0:
            z[:, j] = -z[:, j]
    return EmbeddingMatrix(z, list(t.labels))


def pearson(zi: Sequence[float], zj: Sequence[float]) -> float:
    """Pearson correlation over the components of two vectors; 0 if either is constant."""
    a = np.asarray(zi, dtype=float)
    b = np.asarray(zj, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise InputError("pearson needs two vectors of equal length")
    if a.size < 2:
        raise DimensionTooSmall("pearson needs at least 2 components")
    da = a - math.fsum(a) / a.size
    db = b - math.fsum(b) / b.size
    saa = math.fsum(da * da)
    sbb = math.fsum(db * db)
    if saa == 0.0 or sbb == 0.0:
        return 0.0
    r = math.fsum(da * db) / math.sqrt(saa * sbb)
    return min(1.0, max(-1.0, r))


def correlation_graph(e: EmbeddingMatrix, eps: float = EPS_WEIGHT) -> WeightedGraph:
    """Complete graph weighted by ``max(|pearson(z_i, z_j)|, eps)``."""
    n = e.n
    if n < 2:
        raise TooFewActions(f"need at least 2 actions for a correlation graph, got {n}")
    z = e.values
    weights = {}
    for i in range(n):
        for j in range(i + 1, n):
            weights[(i, j)] = max(abs(pearson(z[i], z[j])), eps)
    return WeightedGraph(n, weights)


# -- CSV formats -----------------------------------------------------------

def _read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise CsvFormatError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise CsvFormatError(f"{path}: empty file")
    return rows[0], rows[1:]


def _floats(row: Sequence[str], where: str) -> list[float]:
    try:
        return [float(x) for x in row]
    except ValueError as exc:
        raise CsvFormatError(f"{where}: {exc}") from exc


def write_embeddings_csv(e: EmbeddingMatrix, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["action_id"] + [f"z_{j}" for j in range(e.d)])
        for label, row in zip(e.labels, e.values):
            w.writerow([label] + [format_float(x) for x in row])


def read_embeddings_csv(path: str | Path) -> EmbeddingMatrix:
    header, rows = _read_csv(path)
    d = len(header) - 1
    if header[0] != "action_id" or header[1:] != [f"z_{j}" for j in range(d)]:
        raise CsvFormatError(f"{path}: header must be action_id,z_0,...,z_{{d-1}}")
    labels, values = [], []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != d + 1:
            raise CsvFormatError(f"{path}:{lineno}: expected {d + 1} fields")
        labels.append(row[0])
        values.append(_floats(row[1:], f"{path}:{lineno}"))
    return EmbeddingMatrix(np.array(values, dtype=float).reshape(len(rows), d), labels)


def transitions_header(p: int) -> list[str]:
    return (["action_id"] + [f"o_{j}" for j in range(p)]
            + [f"onext_{j}" for j in range(p)] + ["reward"])


def write_transitions_csv(t: TransitionTable, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(transitions_header(t.p))
        for a, o, o2, r in zip(t.actions, t.obs, t.next_obs, t.reward):
            w.writerow([t.labels[a]] + [format_float(x) for x in (*o, *o2, r)])


def read_transitions_csv(path: str | Path) -> TransitionTable:
    """Action labels are mapped to dense ids in order of first appearance."""
    header, rows = _read_csv(path)
    p = (len(header) - 2) // 2
    if p < 1 or header != transitions_header(p):
        raise CsvFormatError(f"{path}: header must be action_id,o_0..,onext_0..,reward")
    ids: dict[str, int] = {}
    actions, data = [], []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != 2 * p + 2:
            raise CsvFormatError(f"{path}:{lineno}: expected {2 * p + 2} fields")
        actions.append(ids.setdefault(row[0], len(ids)))
        data.append(_floats(row[1:], f"{path}:{lineno}"))
    if not rows:
        raise CsvFormatError(f"{path}: no transitions")
    arr = np.array(data, dtype=float)
    return TransitionTable(actions, arr[:, :p], arr[:, p:2 * p], arr[:, 2 * p],
                           n_actions=len(ids), labels=list(ids))
