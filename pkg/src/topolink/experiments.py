"""Multi-seed experiment harness: runs, ablation grids, weight sweeps, reports.

Every run writes two artifacts: a structured JSON report (the contract;
byte-stable for a fixed config, seed and BLAS thread count) and an aligned
text table for humans. Volatile values (wall-clock duration, timestamps)
go to a sidecar meta file so the structured report stays reproducible.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, replace
from itertools import product
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_info

from . import metrics
from .datasets import load_bundle_as_split, load_dataset
from .errors import TopolinkError
from .graph import Graph
from .split import DataSplit, split_edges
from .topo import (
    CENTRALITIES,
    CENTRALITY_ABBREV,
    CENTRALITY_FNS,
    SIMILARITIES,
    SIMILARITY_ABBREV,
    SIMILARITY_FNS,
    NodeScores,
    edge_similarities,
    minmax_normalize,
    topo_score,
)
from .train import TrainConfig, evaluate, train

SCHEMA_VERSION = 1
DEFAULT_COMBINATION = ("resource_allocation", "eigenvector")  # flagged in ablation tables


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str | None = None  # dataset dir or edge-list file
    splits: str | None = None  # pre-made split bundle dir (bypasses split_edges)
    val_frac: float = 0.05
    test_frac: float = 0.10
    repeats: int = 10
    seed: int = 0
    out_dir: str = "runs"
    model: str = "gnn"  # "gnn" | "heuristic"
    num_nodes: int | None = None
    resplit_each_repeat: bool = True
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.dataset is None and self.splits is None:
            raise ValueError("an experiment needs --dataset and/or --splits")
        if self.model not in ("gnn", "heuristic"):
            raise ValueError(f"unknown model {self.model!r}")


def blas_thread_count() -> int:
    infos = threadpool_info()
    return max((info.get("num_threads", 1) for info in infos), default=1)


def _aggregate(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    std = 0.0 if arr.size <= 1 else float(arr.std(ddof=1))
    return {"mean": float(arr.mean()), "std": std}


def aggregate_reports(reports: list[metrics.MetricsReport]) -> dict:
    return {
        "auc": _aggregate([r.auc for r in reports]),
        "ap": _aggregate([r.ap for r in reports]),
        "hits_at_k": _aggregate([r.hits_at_k for r in reports]),
    }


def _repeat_entry(seed: int, rep: metrics.MetricsReport) -> dict:
    return {
        "seed": seed,
        "auc": rep.auc,
        "ap": rep.ap,
        "hits_at_k": rep.hits_at_k,
        "k": rep.k,
        "n_pos": rep.n_pos,
        "n_neg": rep.n_neg,
    }


def _config_echo(cfg: ExperimentConfig) -> dict:
    echo = asdict(cfg)
    echo["train"] = asdict(cfg.train)
    return echo


class _MeasureCache:
    """Per-(seed, kind) centrality cache shared across ablation grid cells.

    Grid cells with the same repeat seed share a split, so expensive
    centralities (betweenness in particular) are computed once per seed.
    """

    def __init__(self):
        self.splits: dict[int, DataSplit] = {}
        self.centralities: dict[tuple[int, str], NodeScores] = {}

    def split_for(self, seed: int, make) -> DataSplit:
        if seed not in self.splits:
            self.splits[seed] = make()
        return self.splits[seed]

    def centrality_for(self, seed: int, kind: str, g: Graph) -> NodeScores:
        key = (seed, kind)
        if key not in self.centralities:
            self.centralities[key] = CENTRALITY_FNS[kind](g)
        return self.centralities[key]


def heuristic_report(split: DataSplit, similarity_kind: str, k: int = 20) -> metrics.MetricsReport:
    """Score test pairs directly by a similarity index on the train graph."""
    fn = SIMILARITY_FNS[similarity_kind]
    g = split.train_graph
    pos = [fn(g, int(u), int(v)) for u, v in split.test_pos]
    neg = [fn(g, int(u), int(v)) for u, v in split.test_neg]
    return metrics.report(pos, neg, k=k)


def _single_run(
    cfg: ExperimentConfig,
    g: Graph | None,
    x,
    seed: int,
    train_cfg: TrainConfig,
    cache: _MeasureCache,
) -> metrics.MetricsReport:
    if cfg.splits is not None:
        split = cache.split_for(
            -1, lambda: load_bundle_as_split(cfg.splits, num_nodes=cfg.num_nodes)
        )
    else:
        split_seed = seed if cfg.resplit_each_repeat else cfg.seed
        split = cache.split_for(
            split_seed, lambda: split_edges(g, cfg.val_frac, cfg.test_frac, split_seed)
        )
    if cfg.model == "heuristic":
        return heuristic_report(split, train_cfg.similarity_kind, k=train_cfg.hits_k)
    centrality = None
    if train_cfg.layer_kind == "edge_sage":
        centrality = cache.centrality_for(
            split.seed, train_cfg.centrality_kind, split.train_graph
        )
    model, _ = train(split, x, train_cfg, precomputed_centrality=centrality)
    return evaluate(model, split.test_pos, split.test_neg)


def run_experiment(cfg: ExperimentConfig, cache: _MeasureCache | None = None) -> dict:
    """Train/evaluate over `repeats` seeds and return the structured report."""
    started = time.perf_counter()
    g = x = None
    if cfg.dataset is not None:
        g, x = load_dataset(cfg.dataset, num_nodes=cfg.num_nodes)
    cache = cache if cache is not None else _MeasureCache()
    entries = []
    for r in range(cfg.repeats):
        seed = cfg.seed + r
        train_cfg = replace(cfg.train, seed=seed)
        rep = _single_run(cfg, g, x, seed, train_cfg, cache)
        entries.append(_repeat_entry(seed, rep))
    reports = [
        metrics.MetricsReport(
            auc=e["auc"], ap=e["ap"], hits_at_k=e["hits_at_k"],
            k=e["k"], n_pos=e["n_pos"], n_neg=e["n_neg"],
        )
        for e in entries
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "run",
        "config": _config_echo(cfg),
        "thread_count": blas_thread_count(),
        "repeats": entries,
        "aggregate": aggregate_reports(reports),
        "_duration_sec": time.perf_counter() - started,  # stripped before writing
    }


def _combo_label(similarity: str, centrality: str) -> str:
    return f"{SIMILARITY_ABBREV[similarity]}+{CENTRALITY_ABBREV[centrality]}"


def run_ablation_grid(cfg: ExperimentConfig) -> dict:
    """Run every similarity x centrality combination with shared seeds/splits."""
    started = time.perf_counter()
    g = x = None
    if cfg.dataset is not None:
        g, x = load_dataset(cfg.dataset, num_nodes=cfg.num_nodes)
    cache = _MeasureCache()
    rows = []
    for similarity, centrality in product(SIMILARITIES, CENTRALITIES):
        entries = []
        for r in range(cfg.repeats):
            seed = cfg.seed + r
            train_cfg = replace(
                cfg.train, seed=seed, similarity_kind=similarity, centrality_kind=centrality
            )
            rep = _single_run(cfg, g, x, seed, train_cfg, cache)
            entries.append(_repeat_entry(seed, rep))
        reports = [
            metrics.MetricsReport(
                auc=e["auc"], ap=e["ap"], hits_at_k=e["hits_at_k"],
                k=e["k"], n_pos=e["n_pos"], n_neg=e["n_neg"],
            )
            for e in entries
        ]
        rows.append(
            {
                "label": _combo_label(similarity, centrality),
                "similarity": similarity,
                "centrality": centrality,
                "default_combination": (similarity, centrality) == DEFAULT_COMBINATION,
                "repeats": entries,
                "aggregate": aggregate_reports(reports),
            }
        )
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "ablation",
        "config": _config_echo(cfg),
        "thread_count": blas_thread_count(),
        "rows": rows,
        "_duration_sec": time.perf_counter() - started,
    }


def run_alpha_sweep(cfg: ExperimentConfig, alphas: list[float]) -> dict:
    """One aggregated row per blend weight, shared seeds/splits across rows."""
    for a in alphas:
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"alpha {a} outside [0, 1]")
    started = time.perf_counter()
    g = x = None
    if cfg.dataset is not None:
        g, x = load_dataset(cfg.dataset, num_nodes=cfg.num_nodes)
    cache = _MeasureCache()
    rows = []
    for alpha in alphas:
        entries = []
        endpoint_check = None
        for r in range(cfg.repeats):
            seed = cfg.seed + r
            train_cfg = replace(cfg.train, seed=seed, alpha=alpha)
            rep = _single_run(cfg, g, x, seed, train_cfg, cache)
            if r == 0 and alpha in (0.0, 1.0):
                endpoint_check = _verify_alpha_endpoint(cfg, cache, train_cfg, alpha)
            entries.append(_repeat_entry(seed, rep))
        reports = [
            metrics.MetricsReport(
                auc=e["auc"], ap=e["ap"], hits_at_k=e["hits_at_k"],
                k=e["k"], n_pos=e["n_pos"], n_neg=e["n_neg"],
            )
            for e in entries
        ]
        row = {"alpha": alpha, "repeats": entries, "aggregate": aggregate_reports(reports)}
        if endpoint_check is not None:
            row["endpoint_check"] = endpoint_check
        rows.append(row)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "alpha_sweep",
        "config": _config_echo(cfg),
        "thread_count": blas_thread_count(),
        "rows": rows,
        "_duration_sec": time.perf_counter() - started,
    }


def _verify_alpha_endpoint(cfg, cache: _MeasureCache, train_cfg: TrainConfig, alpha: float) -> bool:
    """At the blend endpoints the edge score must equal one component exactly."""
    key = -1 if cfg.splits is not None else cfg.seed
    split = cache.splits[key]
    gtrain = split.train_graph
    score = topo_score(gtrain, train_cfg.centrality_kind, train_cfg.similarity_kind, alpha)
    if alpha == 0.0:
        expected = minmax_normalize(edge_similarities(gtrain, train_cfg.similarity_kind))
    else:
        c_hat = minmax_normalize(CENTRALITY_FNS[train_cfg.centrality_kind](gtrain).values)
        expected = c_hat[gtrain.neighbors]
    return bool(np.array_equal(score.edge_score, expected))


# -- report files -------------------------------------------------------------


def write_report(report: dict, out_dir, stem: str) -> dict[str, Path]:
    """Write <stem>.json (stable), <stem>.txt (table) and <stem>.meta.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    duration = report.pop("_duration_sec", None)
    json_path = out / f"{stem}.json"
    json_path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    meta_path = out / f"{stem}.meta.json"
    meta = {
        "duration_sec": duration,
        "written_at_unix": time.time(),
    }
    meta_path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    txt_path = out / f"{stem}.txt"
    txt_path.write_text(format_report_text(report, duration), encoding="utf-8")
    if duration is not None:
        report["_duration_sec"] = duration
    return {"json": json_path, "txt": txt_path, "meta": meta_path}


def _fmt_cell(agg: dict) -> str:
    return f"{agg['mean']:.4f} ({agg['std']:.4f})"


def format_report_text(report: dict, duration: float | None = None) -> str:
    lines = []
    kind = report["kind"]
    lines.append(f"{kind} report (schema v{report['schema_version']})")
    lines.append(f"threads: {report['thread_count']}")
    if duration is not None:
        lines.append(f"duration_sec: {duration:.2f}")
    lines.append("")
    header = f"{'row':<14} {'AUC':>18} {'AP':>18} {'Hits@k':>18}"
    lines.append(header)
    lines.append("-" * len(header))
    if kind == "run":
        rows = [("all", report["aggregate"], False)]
    elif kind == "ablation":
        rows = [
            (r["label"] + (" *" if r["default_combination"] else ""), r["aggregate"], r["default_combination"])
            for r in report["rows"]
        ]
    else:
        rows = [(f"alpha={r['alpha']:g}", r["aggregate"], False) for r in report["rows"]]
    for label, agg, _ in rows:
        lines.append(
            f"{label:<14} {_fmt_cell(agg['auc']):>18} {_fmt_cell(agg['ap']):>18} "
            f"{_fmt_cell(agg['hits_at_k']):>18}"
        )
    if kind == "ablation":
        lines.append("")
        lines.append("* default combination")
    lines.append("")
    return "\n".join(lines)


def check_thresholds(report: dict, checks: list[tuple[str, str, float]]) -> list[str]:
    """Evaluate `metric op value` assertions against aggregate means.

    Returns a list of human-readable failures (empty when all pass).
    """
    failures = []
    agg = report.get("aggregate")
    if agg is None:
        raise TopolinkError("report has no top-level aggregate to check")
    for metric_name, op, value in checks:
        if metric_name not in agg:
            raise TopolinkError(f"unknown metric {metric_name!r} in --check")
        mean = agg[metric_name]["mean"]
        ok = mean >= value if op == ">=" else mean <= value
        if not ok:
            failures.append(f"{metric_name} mean {mean:.4f} violates {op} {value}")
    return failures
