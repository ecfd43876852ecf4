"""Command-line harness.

Verbs: run, ablation, alpha-sweep, convert, score. Exit codes: 0 success,
1 config or I/O error, 2 training abort, 3 threshold failure in --check
mode.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .datasets import convert_citation_raw, convert_ogb_raw, load_dataset
from .errors import TopolinkError, TrainingAbort
from .experiments import (
    ExperimentConfig,
    check_thresholds,
    run_ablation_grid,
    run_alpha_sweep,
    run_experiment,
    write_report,
)
from .graph import load_edge_file
from .topo import CENTRALITY_ABBREV, SIMILARITY_ABBREV, dump_topo_scores, topo_score
from .train import TrainConfig

_CENTRALITY_ALIASES = {abbr.lower(): name for name, abbr in CENTRALITY_ABBREV.items()}
_SIMILARITY_ALIASES = {abbr.lower(): name for name, abbr in SIMILARITY_ABBREV.items()}


def _centrality(value: str) -> str:
    v = value.lower()
    return _CENTRALITY_ALIASES.get(v, v)


def _similarity(value: str) -> str:
    v = value.lower()
    return _SIMILARITY_ALIASES.get(v, v)


def _parse_check(value: str) -> tuple[str, str, float]:
    for op in (">=", "<="):
        if op in value:
            metric, threshold = value.split(op, 1)
            return metric.strip(), op, float(threshold)
    raise argparse.ArgumentTypeError(f"--check wants 'metric>=value' or 'metric<=value', got {value!r}")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", help="dataset directory (edges.txt [+features.csv]) or edge-list file")
    p.add_argument("--splits", help="pre-made split bundle directory (bypasses splitting)")
    p.add_argument("--val-frac", type=float, default=0.05)
    p.add_argument("--test-frac", type=float, default=0.10)
    p.add_argument("--alpha", type=float, default=0.5, help="centrality weight in the blended score")
    p.add_argument("--centrality", type=_centrality, default="eigenvector",
                   help="degree|eigenvector|betweenness (or DC/EC/BC)")
    p.add_argument("--similarity", type=_similarity, default="resource_allocation",
                   help="jaccard|adamic_adar|resource_allocation (or JA/AA/RA)")
    p.add_argument("--head", choices=("dot", "hadamard_mlp"), default="hadamard_mlp")
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--dim", type=int, default=256, help="hidden width (and featureless embedding width)")
    p.add_argument("--layers", type=int, default=4)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=20, help="k for Hits@k")
    p.add_argument("--out", default="runs", help="output directory for report files")
    p.add_argument("--num-nodes", type=int, default=None)
    p.add_argument("--model", choices=("gnn", "heuristic"), default="gnn",
                   help="'heuristic' scores pairs by the similarity index alone")
    p.add_argument("--fixed-train-negatives", action="store_true",
                   help="sample train negatives once instead of per epoch")
    p.add_argument("--fixed-split", action="store_true",
                   help="reuse the base-seed split for every repeat")


def _experiment_config(args) -> ExperimentConfig:
    train_cfg = TrainConfig(
        epochs=args.epochs,
        lr=args.lr,
        alpha=args.alpha,
        centrality_kind=args.centrality,
        similarity_kind=args.similarity,
        head_kind=args.head,
        embed_dim=args.dim,
        hidden_dim=args.dim,
        num_layers=args.layers,
        seed=args.seed,
        resample_train_negatives=not args.fixed_train_negatives,
        hits_k=args.k,
    )
    return ExperimentConfig(
        dataset=args.dataset,
        splits=args.splits,
        val_frac=args.val_frac,
        test_frac=args.test_frac,
        repeats=args.repeats,
        seed=args.seed,
        out_dir=args.out,
        model=args.model,
        num_nodes=args.num_nodes,
        resplit_each_repeat=not args.fixed_split,
        train=train_cfg,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topolink", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="train and evaluate over repeated seeds")
    _add_common_flags(p_run)
    p_run.add_argument("--check", type=_parse_check, action="append", default=[],
                       help="aggregate assertion, e.g. 'auc>=0.90' (exit 3 on failure)")

    p_abl = sub.add_parser("ablation", help="similarity x centrality grid")
    _add_common_flags(p_abl)

    p_sweep = sub.add_parser("alpha-sweep", help="one run per blend weight")
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--alphas", type=float, nargs="+",
                         default=[0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0])

    p_conv = sub.add_parser("convert", help="convert a raw dataset to canonical files")
    p_conv.add_argument("--format", choices=("citation", "ogb"), required=True)
    p_conv.add_argument("--content", help="citation: .content file")
    p_conv.add_argument("--cites", help="citation: .cites file")
    p_conv.add_argument("--root", help="ogb: dataset root directory")
    p_conv.add_argument("--out", required=True)

    p_score = sub.add_parser("score", help="dump blended node/edge topology scores")
    p_score.add_argument("--dataset", required=True)
    p_score.add_argument("--alpha", type=float, default=0.5)
    p_score.add_argument("--centrality", type=_centrality, default="eigenvector")
    p_score.add_argument("--similarity", type=_similarity, default="resource_allocation")
    p_score.add_argument("--num-nodes", type=int, default=None)
    p_score.add_argument("--out", required=True)

    return parser


def _cmd_run(args) -> int:
    cfg = _experiment_config(args)
    report = run_experiment(cfg)
    paths = write_report(report, cfg.out_dir, "run")
    print(paths["txt"].read_text(), end="")
    print(f"wrote {paths['json']}")
    if args.check:
        failures = check_thresholds(report, args.check)
        for f in failures:
            print(f"CHECK FAILED: {f}", file=sys.stderr)
        if failures:
            return 3
        print(f"all {len(args.check)} checks passed")
    return 0


def _cmd_ablation(args) -> int:
    cfg = _experiment_config(args)
    report = run_ablation_grid(cfg)
    paths = write_report(report, cfg.out_dir, "ablation")
    print(paths["txt"].read_text(), end="")
    print(f"wrote {paths['json']}")
    return 0


def _cmd_alpha_sweep(args) -> int:
    cfg = _experiment_config(args)
    report = run_alpha_sweep(cfg, args.alphas)
    paths = write_report(report, cfg.out_dir, "alpha_sweep")
    print(paths["txt"].read_text(), end="")
    for row in report["rows"]:
        if "endpoint_check" in row:
            status = "OK" if row["endpoint_check"] else "MISMATCH"
            print(f"alpha={row['alpha']:g} endpoint identity: {status}")
    print(f"wrote {paths['json']}")
    return 0


def _cmd_convert(args) -> int:
    if args.format == "citation":
        if not args.content or not args.cites:
            raise TopolinkError("convert --format citation needs --content and --cites")
        summary = convert_citation_raw(args.content, args.cites, args.out)
    else:
        if not args.root:
            raise TopolinkError("convert --format ogb needs --root")
        summary = convert_ogb_raw(args.root, args.out)
    for key, value in sorted(summary.items()):
        print(f"{key}: {value}")
    return 0


def _cmd_score(args) -> int:
    g, _ = load_dataset(args.dataset, num_nodes=args.num_nodes)
    score = topo_score(g, args.centrality, args.similarity, args.alpha)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    nodes_path, edges_path = out / "node_scores.csv", out / "edge_scores.csv"
    dump_topo_scores(nodes_path, edges_path, g, score)
    print(f"wrote {nodes_path} and {edges_path}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "ablation": _cmd_ablation,
    "alpha-sweep": _cmd_alpha_sweep,
    "convert": _cmd_convert,
    "score": _cmd_score,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.verb](args)
    except TrainingAbort as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TopolinkError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:  # console_scripts target
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
