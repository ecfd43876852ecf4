"""Undirected simple graphs stored as compressed sorted neighbor lists."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse as sp

from .errors import GraphConstructionError, LoadError, ParseError

# Edge lists are plain (m, 2) int64 arrays of node-id pairs throughout the
# package; helpers below normalize whatever the caller hands in.


def as_edge_array(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.int64)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"edge list must have shape (m, 2), got {arr.shape}")
    return arr


@dataclass(frozen=True)
class ParseReport:
    """Counts of lines dropped while reading an edge-list file."""

    self_loops_dropped: int = 0
    duplicates_dropped: int = 0


class Graph:
    """Immutable undirected simple graph over 0-based node ids.

    Adjacency lives in two arrays: ``neighbors`` holds all neighbor lists
    back to back, each strictly ascending, and ``neighbor_offsets[v]`` marks
    where node v's list starts. Symmetry, no self-loops and no duplicates
    are enforced at construction.
    """

    __slots__ = (
        "num_nodes",
        "num_edges",
        "neighbor_offsets",
        "neighbors",
        "_adj",
        "_mean_mat",
        "_mean_mat_t",
        "_slot_mean_mat",
        "_slot_mean_mat_t",
        "_edge_keys",
    )

    def __init__(self, num_nodes: int, neighbor_offsets: np.ndarray, neighbors: np.ndarray):
        self.num_nodes = int(num_nodes)
        self.neighbor_offsets = neighbor_offsets
        self.neighbors = neighbors
        self.num_edges = neighbors.size // 2
        self._adj = None
        self._mean_mat = None
        self._mean_mat_t = None
        self._slot_mean_mat = None
        self._slot_mean_mat_t = None
        self._edge_keys = None

    # -- basic queries ---------------------------------------------------

    def degrees(self) -> np.ndarray:
        return np.diff(self.neighbor_offsets)

    def degree(self, u: int) -> int:
        return int(self.neighbor_offsets[u + 1] - self.neighbor_offsets[u])

    def neighbors_of(self, u: int) -> np.ndarray:
        return self.neighbors[self.neighbor_offsets[u] : self.neighbor_offsets[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors_of(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def edge_array(self) -> np.ndarray:
        """Canonical (u, v) pairs with u < v, in lexicographic order."""
        us = np.repeat(np.arange(self.num_nodes, dtype=np.int64), self.degrees())
        vs = self.neighbors
        mask = us < vs
        return np.column_stack([us[mask], vs[mask]])

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, v in self.edge_array():
            yield int(u), int(v)

    # -- cached derived structures ----------------------------------------

    def edge_key_set(self) -> set[int]:
        """Set of u * n + v keys (u < v) for O(1) membership tests."""
        if self._edge_keys is None:
            ea = self.edge_array()
            self._edge_keys = set((ea[:, 0] * self.num_nodes + ea[:, 1]).tolist())
        return self._edge_keys

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency as a scipy CSR matrix."""
        if self._adj is None:
            n = self.num_nodes
            indptr = self.neighbor_offsets.astype(np.int64)
            data = np.ones(self.neighbors.size, dtype=np.float64)
            self._adj = sp.csr_matrix((data, self.neighbors, indptr), shape=(n, n))
        return self._adj

    def mean_aggregator(self) -> sp.csr_matrix:
        """Row-normalized adjacency D^-1 A; all-zero rows for isolated nodes."""
        if self._mean_mat is None:
            deg = self.degrees().astype(np.float64)
            inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
            data = np.repeat(inv, self.degrees())
            indptr = self.neighbor_offsets.astype(np.int64)
            self._mean_mat = sp.csr_matrix(
                (data, self.neighbors, indptr), shape=(self.num_nodes, self.num_nodes)
            )
        return self._mean_mat

    def mean_aggregator_t(self) -> sp.csr_matrix:
        if self._mean_mat_t is None:
            self._mean_mat_t = self.mean_aggregator().T.tocsr()
        return self._mean_mat_t

    def slot_mean_matrix(self) -> sp.csr_matrix:
        """(n, num_slots) matrix averaging per-slot values into their target row.

        Slot j lies in node v's neighbor range and represents the directed
        message into v; row v holds 1/deg(v) at each of its slots.
        """
        if self._slot_mean_mat is None:
            deg = self.degrees().astype(np.float64)
            inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
            data = np.repeat(inv, self.degrees())
            indices = np.arange(self.neighbors.size, dtype=np.int64)
            indptr = self.neighbor_offsets.astype(np.int64)
            self._slot_mean_mat = sp.csr_matrix(
                (data, indices, indptr), shape=(self.num_nodes, self.neighbors.size)
            )
        return self._slot_mean_mat

    def slot_mean_matrix_t(self) -> sp.csr_matrix:
        if self._slot_mean_mat_t is None:
            self._slot_mean_mat_t = self.slot_mean_matrix().T.tocsr()
        return self._slot_mean_mat_t

    def slot_of(self, target: int, source: int) -> int:
        """Index into ``neighbors`` of the directed slot source -> target."""
        start = self.neighbor_offsets[target]
        nb = self.neighbors_of(target)
        i = int(np.searchsorted(nb, source))
        if i >= nb.size or nb[i] != source:
            raise KeyError(f"no edge {source}-{target}")
        return int(start) + i

    # -- invariants --------------------------------------------------------

    def validate(self) -> None:
        offs, nbrs, n = self.neighbor_offsets, self.neighbors, self.num_nodes
        if offs[0] != 0 or offs[-1] != nbrs.size or np.any(np.diff(offs) < 0):
            raise GraphConstructionError("corrupt neighbor offsets")
        if nbrs.size and (nbrs.min() < 0 or nbrs.max() >= n):
            raise GraphConstructionError("neighbor id out of range")
        for u in range(n):
            nb = self.neighbors_of(u)
            if np.any(nb == u):
                raise GraphConstructionError(f"self-loop at node {u}")
            if nb.size > 1 and np.any(np.diff(nb) <= 0):
                raise GraphConstructionError(f"neighbor list of {u} not strictly ascending")
        if int(self.degrees().sum()) != 2 * self.num_edges:
            raise GraphConstructionError("degree sum does not equal 2|E|")
        # symmetry
        for u in range(n):
            for v in self.neighbors_of(u):
                if not self.has_edge(int(v), u):
                    raise GraphConstructionError(f"asymmetric adjacency at {u}-{v}")

    def __repr__(self) -> str:  # pragma: no cover
        return f"Graph(num_nodes={self.num_nodes}, num_edges={self.num_edges})"


def build_graph(edges, num_nodes: int) -> Graph:
    """Build a Graph from undirected (u, v) pairs.

    Exact duplicate pairs are coalesced; self-loops or out-of-range ids are
    construction errors.
    """
    edges = as_edge_array(edges)
    if num_nodes < 0:
        raise GraphConstructionError("num_nodes must be nonnegative")
    if edges.size:
        if edges.min() < 0 or edges.max() >= num_nodes:
            raise GraphConstructionError(
                f"edge id out of range: ids must be in [0, {num_nodes})"
            )
        if np.any(edges[:, 0] == edges[:, 1]):
            raise GraphConstructionError("self-loops are not allowed")
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        keys = np.unique(lo * np.int64(num_nodes) + hi)
        lo, hi = keys // num_nodes, keys % num_nodes
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
    else:
        src = dst = np.empty(0, dtype=np.int64)
    counts = np.bincount(src, minlength=num_nodes) if num_nodes else np.empty(0, np.int64)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return Graph(num_nodes, offsets, dst.astype(np.int64))


def _iter_lines(text) -> Iterable[str]:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if isinstance(text, str):
        return text.splitlines()
    if isinstance(text, io.IOBase) or hasattr(text, "read"):
        data = text.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return data.splitlines()
    return text  # already an iterable of lines


def parse_edge_list(text) -> tuple[np.ndarray, ParseReport]:
    """Parse `u v` pairs from text, one per line; `#` starts a comment line.

    Self-loops and repeated undirected pairs are dropped, with counts
    reported; malformed lines raise ParseError naming the line number.
    """
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    loops = dupes = 0
    for lineno, raw in enumerate(_iter_lines(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"line {lineno}: expected two ids, got {len(tokens)} tokens")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer node id in {tokens!r}") from None
        if u < 0 or v < 0:
            raise ParseError(f"line {lineno}: negative node id")
        if u == v:
            loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen:
            dupes += 1
            continue
        seen.add(key)
        pairs.append((u, v))
    arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    return arr, ParseReport(self_loops_dropped=loops, duplicates_dropped=dupes)


def load_edge_file(path) -> tuple[np.ndarray, ParseReport]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh)


def save_edge_list(path, edges) -> None:
    edges = as_edge_array(edges)
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in edges:
            fh.write(f"{u} {v}\n")


def load_node_features(text, num_nodes: int) -> np.ndarray:
    """Read a headerless CSV of per-node feature rows (row i = node i)."""
    rows: list[np.ndarray] = []
    width = None
    for lineno, raw in enumerate(_iter_lines(text), start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split(",")
        try:
            row = np.array([float(t) for t in tokens], dtype=np.float64)
        except ValueError:
            raise LoadError(f"line {lineno}: non-numeric feature value") from None
        if width is None:
            width = row.size
        elif row.size != width:
            raise LoadError(
                f"line {lineno}: ragged row ({row.size} values, expected {width})"
            )
        if not np.all(np.isfinite(row)):
            raise LoadError(f"line {lineno}: non-finite feature value")
        rows.append(row)
    if len(rows) != num_nodes:
        raise LoadError(f"feature row count {len(rows)} does not match num_nodes {num_nodes}")
    return np.vstack(rows) if rows else np.empty((0, 0))


def load_feature_file(path, num_nodes: int) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return load_node_features(fh, num_nodes)


def save_features(path, features: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.atleast_2d(features):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
