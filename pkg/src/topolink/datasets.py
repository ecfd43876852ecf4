"""Converters from published dataset layouts to the canonical file formats.

Canonical layout (what the rest of the package consumes): a dataset
directory with `edges.txt` (whitespace `u v` pairs, 0-based) and optionally
`features.csv` (headerless CSV, row i = node i), or a split-bundle
directory with train/valid/test edge-list files.
"""

from __future__ import annotations

import csv
import gzip
import json
from pathlib import Path

import numpy as np

from .errors import ConversionError
from .graph import build_graph, load_edge_file, load_feature_file, save_edge_list, save_features
from .split import BUNDLE_FILES, DataSplit, load_split_bundle


def convert_citation_raw(content_path, cites_path, out_dir) -> dict:
    """Convert the classic citation-network format (.content + .cites).

    .content rows: <paper_id> <feature ...> <class_label>; .cites rows:
    <cited> <citing>. Node ids follow .content file order. Citations that
    reference papers missing from .content are dropped and counted, as are
    self-citations and duplicate pairs.
    """
    content_path, cites_path = Path(content_path), Path(cites_path)
    if not content_path.exists() or not cites_path.exists():
        raise ConversionError(
            f"citation layout needs both {content_path.name} and {cites_path.name}"
        )
    ids: dict[str, int] = {}
    feature_rows: list[np.ndarray] = []
    labels: list[str] = []
    with open(content_path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            parts = raw.strip().split()
            if not parts:
                continue
            if len(parts) < 3:
                raise ConversionError(f"{content_path.name} line {lineno}: too few columns")
            paper, label = parts[0], parts[-1]
            if paper in ids:
                raise ConversionError(f"{content_path.name} line {lineno}: duplicate id {paper}")
            ids[paper] = len(ids)
            try:
                feature_rows.append(np.array([float(t) for t in parts[1:-1]]))
            except ValueError:
                raise ConversionError(
                    f"{content_path.name} line {lineno}: non-numeric feature"
                ) from None
            labels.append(label)

    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    dangling = loops = dupes = 0
    with open(cites_path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            parts = raw.strip().split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ConversionError(f"{cites_path.name} line {lineno}: expected two ids")
            a, b = parts
            if a not in ids or b not in ids:
                dangling += 1
                continue
            u, v = ids[a], ids[b]
            if u == v:
                loops += 1
                continue
            key = (u, v) if u < v else (v, u)
            if key in seen:
                dupes += 1
                continue
            seen.add(key)
            edges.append(key)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    edge_arr = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)
    save_edge_list(out / "edges.txt", edge_arr)
    features = np.vstack(feature_rows)
    save_features(out / "features.csv", features)
    (out / "labels.txt").write_text("\n".join(labels) + "\n", encoding="utf-8")
    summary = {
        "num_nodes": len(ids),
        "num_edges": int(edge_arr.shape[0]),
        "feature_dim": int(features.shape[1]),
        "dropped_dangling_citations": dangling,
        "dropped_self_citations": loops,
        "dropped_duplicate_citations": dupes,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def _read_csv_gz_pairs(path) -> np.ndarray:
    with gzip.open(path, "rt", encoding="utf-8") as fh:
        rows = [(int(r[0]), int(r[1])) for r in csv.reader(fh) if r]
    return np.array(rows, dtype=np.int64).reshape(-1, 2)


def convert_ogb_raw(root, out_dir) -> dict:
    """Convert an OGB-style link dataset directory.

    Expects `raw/edge.csv.gz` (one u,v pair per row) and optionally
    `raw/num-node-list.csv.gz`. If `split/<name>/{train,valid,test}.pt`
    tensors exist they are converted to a split bundle as well (requires
    torch, which is only imported if those files are present).
    """
    root = Path(root)
    edge_file = root / "raw" / "edge.csv.gz"
    if not edge_file.exists():
        raise ConversionError(
            f"OGB layout not recognized under {root}: expected raw/edge.csv.gz "
            "(and optionally raw/num-node-list.csv.gz, split/*/{train,valid,test}.pt)"
        )
    pairs = _read_csv_gz_pairs(edge_file)
    nn_file = root / "raw" / "num-node-list.csv.gz"
    if nn_file.exists():
        with gzip.open(nn_file, "rt", encoding="utf-8") as fh:
            num_nodes = int(next(csv.reader(fh))[0])
    else:
        num_nodes = int(pairs.max()) + 1 if pairs.size else 0

    # dedupe/canonicalize through the graph builder
    mask = pairs[:, 0] != pairs[:, 1]
    g = build_graph(pairs[mask], num_nodes)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_edge_list(out / "edges.txt", g.edge_array())
    summary = {
        "num_nodes": num_nodes,
        "num_edges": int(g.num_edges),
        "dropped_self_loops": int((~mask).sum()),
    }

    split_root = root / "split"
    split_dirs = sorted(p for p in split_root.iterdir() if p.is_dir()) if split_root.exists() else []
    if split_dirs:
        split_dir = split_dirs[0]
        try:
            import torch
        except ImportError:
            raise ConversionError(
                f"{split_dir} holds torch tensors; install torch to convert packaged splits"
            ) from None
        parts = {}
        for name in ("train", "valid", "test"):
            blob = torch.load(split_dir / f"{name}.pt", weights_only=False)
            parts[name] = {k: np.asarray(v) for k, v in blob.items()}
        bundle = out / "split"
        bundle.mkdir(exist_ok=True)
        save_edge_list(bundle / "train.edges", parts["train"]["edge"])
        save_edge_list(bundle / "valid.edges", parts["valid"]["edge"])
        save_edge_list(bundle / "valid_neg.edges", parts["valid"]["edge_neg"])
        save_edge_list(bundle / "test.edges", parts["test"]["edge"])
        save_edge_list(bundle / "test_neg.edges", parts["test"]["edge_neg"])
        (bundle / "meta.json").write_text(
            json.dumps({"num_nodes": num_nodes, "seed": 0}, sort_keys=True) + "\n"
        )
        summary["split_bundle"] = str(bundle)

    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def load_dataset(path, num_nodes: int | None = None):
    """Load (graph, features-or-None) from a dataset path.

    `path` may be a canonical dataset directory (edges.txt [+features.csv])
    or a bare edge-list file. Node count defaults to max id + 1 unless
    features pin it or `num_nodes` is given.
    """
    p = Path(path)
    if p.is_dir():
        edge_path = p / "edges.txt"
        if not edge_path.exists():
            raise ConversionError(f"dataset directory {p} has no edges.txt")
        feat_path = p / "features.csv"
    else:
        edge_path, feat_path = p, None

    edges, _ = load_edge_file(edge_path)
    inferred = int(edges.max()) + 1 if edges.size else 0
    if num_nodes is None:
        num_nodes = inferred
    elif num_nodes < inferred:
        raise ConversionError(f"--num-nodes {num_nodes} below max id {inferred - 1}")

    features = None
    if feat_path is not None and feat_path.exists():
        # feature row count is authoritative for the node count
        with open(feat_path, "r", encoding="utf-8") as fh:
            rows = sum(1 for line in fh if line.strip())
        if rows < inferred:
            raise ConversionError(
                f"features.csv has {rows} rows but edges reference node {inferred - 1}"
            )
        num_nodes = max(num_nodes, rows)
        features = load_feature_file(feat_path, num_nodes)

    return build_graph(edges, num_nodes), features


def load_bundle_as_split(bundle_dir, num_nodes: int | None = None, seed: int = 0) -> DataSplit:
    return load_split_bundle(bundle_dir, num_nodes=num_nodes, seed=seed)


__all__ = [
    "BUNDLE_FILES",
    "convert_citation_raw",
    "convert_ogb_raw",
    "load_dataset",
    "load_bundle_as_split",
]
