"""Command line driver: ``sird <subcommand> ...``.

Exit codes: 0 success, 1 input error, 2 degenerate data, 3 internal
invariant breach.
"""

from __future__ import annotations

import argparse
import json
import logging
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import SirdError
from .graph import read_graph_tsv
from .pipeline import (
    PipelineConfig,
    run_pipeline,
    stage,
    stage_cluster,
    stage_embed,
    stage_graph,
    stage_roles,
    stage_sparsify,
)

log = logging.getLogger("sird")


def _version() -> str:
    return f"sird {__version__} (python {platform.python_version()}, numpy {np.__version__})"


def _cmd_embed(a):
    stage_embed(a.input, a.out, a.dim)


def _cmd_graph(a):
    stage_graph(a.input, a.out)


def _cmd_sparsify(a):
    stage_sparsify(a.input, a.out, a.report, a.figure)


def _cmd_cluster(a):
    stage_cluster(a.input, a.height, a.out, a.trace, a.strategy)


def _cmd_roles(a):
    stage_roles(a.input, a.out, a.embeddings, a.labels, a.graph, a.figure)


def _cmd_oracle(a):
    from .oracle import enumerate_optimal

    with stage("oracle"):
        res = enumerate_optimal(read_graph_tsv(a.input), a.height)
    text = json.dumps(res.to_dict(), indent=1) + "\n"
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_synth(a):
    from .embedding import write_embeddings_csv, write_transitions_csv
    from .graph import write_graph_tsv
    from .synthetic import planted_embeddings, planted_transitions, two_triangles

    with stage("synth"):
        if a.kind == "embeddings":
            emb, _ = planted_embeddings(a.seed, n_blocks=a.blocks, block_size=a.block_size)
            write_embeddings_csv(emb, a.out)
        elif a.kind == "transitions":
            table, _ = planted_transitions(a.seed, n_blocks=a.blocks, block_size=a.block_size)
            write_transitions_csv(table, a.out)
        else:
            write_graph_tsv(two_triangles(), a.out)


def _cmd_pipeline(a):
    cfg = PipelineConfig(
        out_dir=a.out,
        input_path=a.input,
        input_kind=None if a.kind == "auto" else a.kind,
        synthetic=a.synthetic,
        seed=a.seed,
        dim=a.dim,
        height=a.height,
        embeddings_path=a.embeddings,
        figures=not a.no_figures,
        strategy=a.strategy,
    )
    for name, path in run_pipeline(cfg).items():
        print(f"{name}\t{path}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sird", description="Structural-entropy role discovery over an action space.")
    p.add_argument("--version", action="version", version=_version())
    p.add_argument("-v", "--verbose", action="store_true", help="log stage progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("embed", help="learn action embeddings from a transitions CSV")
    s.add_argument("--in", dest="input", type=Path, required=True)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--dim", type=int, default=None, help="embedding dimension (default min(n, p+1))")
    s.set_defaults(func=_cmd_embed)

    s = sub.add_parser("graph", help="build the correlation graph from an embeddings CSV")
    s.add_argument("--in", dest="input", type=Path, required=True)
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=_cmd_graph)

    s = sub.add_parser("sparsify", help="entropy-guided k-NN sparsification")
    s.add_argument("--in", dest="input", type=Path, required=True)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--report", type=Path, required=True)
    s.add_argument("--figure", type=Path, default=None, help="also plot entropy against k")
    s.set_defaults(func=_cmd_sparsify)

    s = sub.add_parser("cluster", help="optimize the encoding tree of a sparse graph")
    s.add_argument("--in", dest="input", type=Path, required=True)
    s.add_argument("--height", type=int, default=2)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--trace", type=Path, default=None)
    s.add_argument("--strategy", choices=("heap", "scan"), default="heap")
    s.set_defaults(func=_cmd_cluster)

    s = sub.add_parser("roles", help="extract roles from an optimized tree")
    s.add_argument("--in", dest="input", type=Path, required=True, help="tree JSON")
    s.add_argument("--embeddings", type=Path, default=None)
    s.add_argument("--graph", type=Path, default=None, help="sparse graph, for validation and figures")
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--labels", type=Path, default=None, help="action<TAB>role output")
    s.add_argument("--figure", type=Path, default=None)
    s.set_defaults(func=_cmd_roles)

    s = sub.add_parser("oracle", help="brute-force minimum entropy (n <= 7)")
    s.add_argument("--in", dest="input", type=Path, required=True)
    s.add_argument("--height", type=int, default=2)
    s.add_argument("--out", type=Path, default=None)
    s.set_defaults(func=_cmd_oracle)

    s = sub.add_parser("synth", help="write a planted-structure input file")
    s.add_argument("--kind", choices=("embeddings", "transitions", "two-triangles"), default="embeddings")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--blocks", type=int, default=3)
    s.add_argument("--block-size", type=int, default=5)
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=_cmd_synth)

    s = sub.add_parser("pipeline", help="run every stage end to end")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="input", type=Path)
    src.add_argument("--synthetic", choices=("embeddings", "transitions"))
    s.add_argument("--kind", choices=("auto", "transitions", "embeddings", "graph"), default="auto")
    s.add_argument("--embeddings", type=Path, default=None, help="representations for graph input")
    s.add_argument("--out", type=Path, required=True, help="artifact directory")
    s.add_argument("--dim", type=int, default=None)
    s.add_argument("--height", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--strategy", choices=("heap", "scan"), default="heap")
    s.add_argument("--no-figures", action="store_true")
    s.set_defaults(func=_cmd_pipeline)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except SirdError as exc:
        where = getattr(exc, "stage", None) or args.command
        print(f"sird {where}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
