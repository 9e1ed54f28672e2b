"""File-based pipeline stages and the end-to-end driver.

Each stage reads its inputs from disk and writes its outputs to disk; the
end-to-end driver chains the same stage functions through the artifact
directory, so rerunning any single stage on persisted intermediates gives
the same bytes as the full run.
"""

from __future__ import annotations

import contextlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .embedding import (
    correlation_graph,
    learn_embeddings,
    read_embeddings_csv,
    read_transitions_csv,
    write_embeddings_csv,
    write_transitions_csv,
)
from .errors import InputError, SirdError
from .graph import read_graph_tsv, write_graph_tsv
from .optimize import optimize
from .roles import extract_roles
from .sparsify import select_k_star
from .synthetic import planted_embeddings, planted_transitions
from .tree import flat_tree, tree_from_json, validate

log = logging.getLogger(__name__)

INPUT_KINDS = ("transitions", "embeddings", "graph")


@contextlib.contextmanager
def stage(name: str):
    """Tag any pipeline error raised inside with the stage it came from."""
    try:
        yield
    except SirdError as exc:
        if getattr(exc, "stage", None) is None:
            exc.stage = name
        raise


def detect_kind(path: str | Path) -> str:
    path = Path(path)
    try:
        with open(path) as fh:
            first = fh.readline().strip()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if first.startswith("#n="):
        return "graph"
    cols = first.split(",")
    if cols and cols[0] == "action_id" and cols[-1] == "reward":
        return "transitions"
    if cols and cols[0] == "action_id":
        return "embeddings"
    raise InputError(f"{path}: cannot tell the input kind from its first line")


# -- stages --------------------------------------------------------------------

def stage_embed(transitions: Path, out: Path, dim: int | None = None) -> Path:
    with stage("embed"):
        table = read_transitions_csv(transitions)
        d = dim if dim is not None else min(table.n_actions, table.p + 1)
        write_embeddings_csv(learn_embeddings(table, d), out)
    return out


def stage_graph(embeddings: Path, out: Path) -> Path:
    with stage("graph"):
        write_graph_tsv(correlation_graph(read_embeddings_csv(embeddings)), out)
    return out


def stage_sparsify(graph: Path, out: Path, report: Path, figure: Path | None = None) -> Path:
    with stage("sparsify"):
        rep, sparse = select_k_star(read_graph_tsv(graph))
        write_graph_tsv(sparse, out)
        rep.write_json(report)
        log.info("k* = %d (lmse %s, fallback=%s)", rep.k_star, rep.lmse_ks, rep.fallback)
        if figure is not None:
            from .plotting import plot_entropy_curve

            plot_entropy_curve(rep, figure)
    return out


def stage_cluster(sparse: Path, height: int, out: Path, trace: Path | None = None,
                  strategy: str = "heap") -> Path:
    with stage("cluster"):
        g = read_graph_tsv(sparse)
        steps: list = []
        t = optimize(g, flat_tree(g), height, strategy=strategy, trace=steps)
        t.write_json(out)
        if trace is not None:
            lines = [json.dumps(s.to_dict(), sort_keys=True) for s in steps]
            Path(trace).write_text("".join(line + "\n" for line in lines))
        log.info("%d operators applied, %d roles", len(steps), len(t.nodes[t.root].children))
    return out


def stage_roles(tree: Path, out: Path, embeddings: Path | None = None, labels_out: Path | None = None,
                graph: Path | None = None, figure: Path | None = None) -> Path:
    with stage("roles"):
        g = read_graph_tsv(graph) if graph is not None else None
        t = tree_from_json(tree, g)
        if g is not None:
            check = validate(g, t)
            if not check.valid:
                raise InputError("tree does not match graph: " + "; ".join(check.violations[:3]))
        e = read_embeddings_csv(embeddings) if embeddings is not None else None
        roles = extract_roles(None, t, e)
        roles.write_json(out)
        if labels_out is not None:
            roles.write_label_tsv(labels_out)
        if figure is not None and g is not None:
            from .plotting import plot_role_adjacency

            plot_role_adjacency(g, roles, figure)
    return out


# -- end to end ------------------------------------------------------------------

@dataclass
class PipelineConfig:
    out_dir: Path
    input_path: Path | None = None
    input_kind: str | None = None
    synthetic: str | None = None
    seed: int = 0
    dim: int | None = None
    height: int = 2
    embeddings_path: Path | None = None
    figures: bool = True
    strategy: str = "heap"

    def check(self) -> None:
        if (self.input_path is None) == (self.synthetic is None):
            raise InputError("give exactly one of an input file or a synthetic generator")
        if self.synthetic is not None and self.synthetic not in ("transitions", "embeddings"):
            raise InputError(f"unknown synthetic input {self.synthetic!r}")
        if self.input_kind is not None and self.input_kind not in INPUT_KINDS:
            raise InputError(f"unknown input kind {self.input_kind!r}")
        if self.height < 2:
            raise InputError(f"height must be at least 2, got {self.height}")
        if self.dim is not None and self.dim < 2:
            raise InputError(f"dimension must be at least 2, got {self.dim}")


def run_pipeline(cfg: PipelineConfig) -> dict[str, Path]:
    """Run every stage; returns the artifact paths keyed by name."""
    cfg.check()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    art: dict[str, Path] = {}

    if cfg.synthetic is not None:
        with stage("synth"):
            if cfg.synthetic == "transitions":
                table, _ = planted_transitions(cfg.seed)
                art["input"] = out / "transitions.csv"
                write_transitions_csv(table, art["input"])
                kind = "transitions"
            else:
                emb, _ = planted_embeddings(cfg.seed)
                art["input"] = out / "input_embeddings.csv"
                write_embeddings_csv(emb, art["input"])
                kind = "embeddings"
        src = art["input"]
    else:
        src = Path(cfg.input_path)
        kind = cfg.input_kind or detect_kind(src)

    embeddings: Path | None = None
    if kind == "transitions":
        embeddings = stage_embed(src, out / "embeddings.csv", cfg.dim)
    elif kind == "embeddings":
        embeddings = src
    elif cfg.embeddings_path is not None:
        embeddings = Path(cfg.embeddings_path)
    if embeddings is not None:
        art["embeddings"] = embeddings

    if kind == "graph":
        graph = src
    else:
        graph = stage_graph(embeddings, out / "graph.tsv")
        art["graph"] = graph

    figdir = out / "figures"
    if cfg.figures:
        figdir.mkdir(exist_ok=True)
    art["sparse"] = stage_sparsify(graph, out / "sparse.tsv", out / "report.json",
                                   figdir / "entropy_vs_k.png" if cfg.figures else None)
    art["report"] = out / "report.json"
    art["tree"] = stage_cluster(art["sparse"], cfg.height, out / "tree.json", out / "trace.jsonl",
                                cfg.strategy)
    art["trace"] = out / "trace.jsonl"
    art["roles"] = stage_roles(art["tree"], out / "roles.json", embeddings, out / "roles.tsv",
                               art["sparse"], figdir / "role_adjacency.png" if cfg.figures else None)
    art["role_labels"] = out / "roles.tsv"
    if cfg.figures:
        art["figure_entropy"] = figdir / "entropy_vs_k.png"
        art["figure_roles"] = figdir / "role_adjacency.png"
    return art
