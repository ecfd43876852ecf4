"""Edge splits and negative sampling for link-prediction experiments."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SamplingError, SplitError
from .graph import Graph, as_edge_array, build_graph, load_edge_file, save_edge_list

BUNDLE_FILES = ("train.edges", "valid.edges", "valid_neg.edges", "test.edges", "test_neg.edges")


@dataclass(frozen=True)
class DataSplit:
    """Disjoint positive edge sets plus fixed negatives and the train graph."""

    train_pos: np.ndarray
    val_pos: np.ndarray
    test_pos: np.ndarray
    val_neg: np.ndarray
    test_neg: np.ndarray
    train_graph: Graph
    num_nodes: int
    seed: int


def _canonical(edges: np.ndarray) -> np.ndarray:
    if edges.size == 0:
        return edges.reshape(0, 2)
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    return np.column_stack([lo, hi])


def sample_negatives(g: Graph, count: int, seed: int, exclude=None) -> np.ndarray:
    """Sample `count` distinct non-edges of g, avoiding `exclude`, seeded.

    Rejection sampling against a hashed edge set; switches to explicit
    non-edge enumeration for dense graphs (or requests that would exhaust
    most of the pool) so both regimes stay bounded.
    """
    n = g.num_nodes
    count = int(count)
    if count == 0:
        return np.empty((0, 2), dtype=np.int64)
    total_pairs = n * (n - 1) // 2
    exclude = as_edge_array(exclude) if exclude is not None else np.empty((0, 2), np.int64)
    excl_keys = set()
    for u, v in _canonical(exclude):
        excl_keys.add(int(u) * n + int(v))
    available = total_pairs - g.num_edges - len(excl_keys)
    if count > available:
        raise SamplingError(
            f"requested {count} negatives but only {available} non-edges are available"
        )
    edge_keys = g.edge_key_set()
    rng = np.random.default_rng(seed)

    density = g.num_edges / total_pairs if total_pairs else 1.0
    enumerate_all = density > 0.9 or (count > 0.5 * available and n <= 4096)
    if enumerate_all:
        iu, iv = np.triu_indices(n, k=1)
        all_keys = iu.astype(np.int64) * n + iv
        blocked = np.fromiter(edge_keys | excl_keys, dtype=np.int64) if (edge_keys or excl_keys) else np.empty(0, np.int64)
        pool = np.setdiff1d(all_keys, blocked, assume_unique=False)
        chosen = rng.choice(pool, size=count, replace=False)
        chosen = np.sort(chosen)
        return np.column_stack([chosen // n, chosen % n]).astype(np.int64)

    picked: list[int] = []
    picked_set: set[int] = set()
    while len(picked) < count:
        need = count - len(picked)
        us = rng.integers(0, n, size=2 * need + 16)
        vs = rng.integers(0, n, size=2 * need + 16)
        for u, v in zip(us, vs):
            if u == v:
                continue
            key = int(min(u, v)) * n + int(max(u, v))
            if key in edge_keys or key in excl_keys or key in picked_set:
                continue
            picked_set.add(key)
            picked.append(key)
            if len(picked) == count:
                break
    keys = np.array(picked, dtype=np.int64)
    return np.column_stack([keys // n, keys % n]).astype(np.int64)


def split_edges(g: Graph, val_frac: float, test_frac: float, seed: int) -> DataSplit:
    """Seeded uniform partition of edges into train/val/test plus negatives.

    Counts are floor(frac * |E|); the remainder stays in train. Negatives
    match positive counts, avoid all original edges, and val/test negative
    pools are disjoint. The train graph is rebuilt from train edges only.
    """
    if not (0 <= val_frac < 1 and 0 <= test_frac < 1):
        raise ValueError("fractions must lie in [0, 1)")
    if val_frac + test_frac >= 1:
        raise ValueError("val_frac + test_frac must be < 1")
    m = g.num_edges
    if m == 0:
        raise SplitError("cannot split a graph with no edges")
    edges = g.edge_array()
    rng = np.random.default_rng(seed)
    perm = rng.permutation(m)
    n_val = int(val_frac * m)
    n_test = int(test_frac * m)
    val_pos = edges[perm[:n_val]]
    test_pos = edges[perm[n_val : n_val + n_test]]
    train_pos = edges[perm[n_val + n_test :]]
    val_neg = sample_negatives(g, n_val, seed=seed + 1)
    test_neg = sample_negatives(g, n_test, seed=seed + 2, exclude=val_neg)
    train_graph = build_graph(train_pos, g.num_nodes)
    return DataSplit(
        train_pos=train_pos,
        val_pos=val_pos,
        test_pos=test_pos,
        val_neg=val_neg,
        test_neg=test_neg,
        train_graph=train_graph,
        num_nodes=g.num_nodes,
        seed=seed,
    )


def save_split_bundle(split: DataSplit, out_dir) -> None:
    """Write the five edge-list files (plus a small meta file) for a split."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_edge_list(out / "train.edges", split.train_pos)
    save_edge_list(out / "valid.edges", split.val_pos)
    save_edge_list(out / "valid_neg.edges", split.val_neg)
    save_edge_list(out / "test.edges", split.test_pos)
    save_edge_list(out / "test_neg.edges", split.test_neg)
    meta = {"num_nodes": split.num_nodes, "seed": split.seed}
    (out / "meta.json").write_text(json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")


def load_split_bundle(bundle_dir, num_nodes: int | None = None, seed: int = 0) -> DataSplit:
    """Load a pre-made split from a directory of edge-list files.

    This bypasses split_edges entirely (pre-packaged benchmark splits).
    Negative counts are allowed to differ from positive counts, with a
    warning, since packaged benchmark negatives often do.
    """
    bundle = Path(bundle_dir)
    missing = [f for f in BUNDLE_FILES if not (bundle / f).exists()]
    if missing:
        raise SplitError(f"split bundle {bundle} is missing files: {', '.join(missing)}")
    parts = {}
    for name in BUNDLE_FILES:
        edges, _ = load_edge_file(bundle / name)
        parts[name] = edges
    if num_nodes is None:
        meta_path = bundle / "meta.json"
        if meta_path.exists():
            num_nodes = int(json.loads(meta_path.read_text())["num_nodes"])
        else:
            top = max((int(e.max()) for e in parts.values() if e.size), default=-1)
            num_nodes = top + 1
    for name, edges in parts.items():
        if edges.size and edges.max() >= num_nodes:
            raise SplitError(f"{name}: node id {edges.max()} out of range for n={num_nodes}")
    if parts["valid_neg.edges"].shape[0] != parts["valid.edges"].shape[0]:
        warnings.warn("bundle valid_neg count differs from valid positives", stacklevel=2)
    if parts["test_neg.edges"].shape[0] != parts["test.edges"].shape[0]:
        warnings.warn("bundle test_neg count differs from test positives", stacklevel=2)
    train_graph = build_graph(parts["train.edges"], num_nodes)
    return DataSplit(
        train_pos=_canonical(parts["train.edges"]),
        val_pos=_canonical(parts["valid.edges"]),
        test_pos=_canonical(parts["test.edges"]),
        val_neg=_canonical(parts["valid_neg.edges"]),
        test_neg=_canonical(parts["test_neg.edges"]),
        train_graph=train_graph,
        num_nodes=num_nodes,
        seed=seed,
    )


def check_split(split: DataSplit, original: Graph) -> None:
    """Raise SplitError if the split violates its structural invariants."""
    n = split.num_nodes

    def keys(edges):
        c = _canonical(edges)
        return set((c[:, 0] * n + c[:, 1]).tolist())

    kt, kv, ks = keys(split.train_pos), keys(split.val_pos), keys(split.test_pos)
    if kt & kv or kt & ks or kv & ks:
        raise SplitError("positive sets are not pairwise disjoint")
    if kt | kv | ks != original.edge_key_set():
        raise SplitError("positive sets do not partition the original edges")
    knv, kns = keys(split.val_neg), keys(split.test_neg)
    if knv & kns:
        raise SplitError("negative sets overlap")
    orig = original.edge_key_set()
    if (knv | kns) & orig:
        raise SplitError("a negative edge exists in the original graph")
    if split.train_graph.edge_key_set() != kt:
        raise SplitError("train graph does not match train positives")
