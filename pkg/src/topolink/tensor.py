"""Dense 2-D tensors with reverse-mode automatic differentiation.

Every operation returns a new Tensor holding the forward value and a
closure that routes the output gradient back to its parents. backward()
on a scalar loss walks the recorded graph once in reverse topological
order. Everything is float64; shapes are strictly 2-D.

A SparseInput wraps a constant scipy CSR matrix so that a large fixed
feature matrix can sit on the left of a matmul without densifying; it
never receives gradients.
"""

from __future__ import annotations

import json

import numpy as np
import scipy.sparse as sp

from .errors import ShapeError
from .graph import Graph

CHECKPOINT_FORMAT_VERSION = 1


class Tensor:
    """A rows x cols float64 matrix, optionally tracked for gradients."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_backward_ran")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.atleast_2d(np.asarray(data, dtype=np.float64))
        if arr.ndim != 2:
            raise ShapeError(f"tensors are 2-D, got ndim={arr.ndim}")
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad = np.zeros_like(arr) if requires_grad else None
        self._parents: tuple = ()
        self._backward = None
        self._backward_ran = False

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.data[0, 0])

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad[...] = 0.0

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def __repr__(self) -> str:  # pragma: no cover
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


class SparseInput:
    """Constant CSR matrix usable as the left operand of matmul.

    Holds no gradient; intended for large fixed feature matrices where the
    dense product would dominate the training cost.
    """

    __slots__ = ("csr", "_csr_t")

    def __init__(self, matrix):
        self.csr = sp.csr_matrix(matrix).astype(np.float64)
        self._csr_t = None

    @property
    def rows(self) -> int:
        return self.csr.shape[0]

    @property
    def cols(self) -> int:
        return self.csr.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.csr.shape

    @property
    def requires_grad(self) -> bool:
        return False

    def transpose_csr(self):
        if self._csr_t is None:
            self._csr_t = self.csr.T.tocsr()
        return self._csr_t


def constant(data) -> Tensor:
    return Tensor(data, requires_grad=False)


def parameter(data) -> Tensor:
    return Tensor(data, requires_grad=True)


def _result(data: np.ndarray, parents: tuple, backward) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents if isinstance(p, Tensor)):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
    return out


def _check_same_shape(a, b, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} differ")


# -- primitive operations -------------------------------------------------


def matmul(a, b: Tensor) -> Tensor:
    """Matrix product; `a` may be a Tensor or a constant SparseInput."""
    if a.cols != b.rows:
        raise ShapeError(f"matmul: inner dims differ, {a.shape} @ {b.shape}")
    if isinstance(a, SparseInput):
        data = a.csr @ b.data

        def backward(g, a=a, b=b):
            if b.requires_grad:
                b._accumulate(a.transpose_csr() @ g)

        return _result(data, (b,), backward)

    data = a.data @ b.data

    def backward(g, a=a, b=b):
        if a.requires_grad:
            a._accumulate(g @ b.data.T)
        if b.requires_grad:
            b._accumulate(a.data.T @ g)

    return _result(data, (a, b), backward)


def _broadcast_pair(a: Tensor, b: Tensor, op: str):
    """Allow equal shapes, or a 1 x c bias row against an n x c matrix."""
    if a.shape == b.shape:
        return None
    if a.rows == 1 and a.cols == b.cols:
        return "a"
    if b.rows == 1 and b.cols == a.cols:
        return "b"
    raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} are not compatible")


def add(a: Tensor, b: Tensor) -> Tensor:
    which = _broadcast_pair(a, b, "add")
    data = a.data + b.data

    def backward(g, a=a, b=b, which=which):
        if a.requires_grad:
            a._accumulate(g.sum(axis=0, keepdims=True) if which == "a" else g)
        if b.requires_grad:
            b._accumulate(g.sum(axis=0, keepdims=True) if which == "b" else g)

    return _result(data, (a, b), backward)


def hadamard(a: Tensor, b: Tensor) -> Tensor:
    which = _broadcast_pair(a, b, "hadamard")
    data = a.data * b.data

    def backward(g, a=a, b=b, which=which):
        if a.requires_grad:
            ga = g * b.data
            a._accumulate(ga.sum(axis=0, keepdims=True) if which == "a" else ga)
        if b.requires_grad:
            gb = g * a.data
            b._accumulate(gb.sum(axis=0, keepdims=True) if which == "b" else gb)

    return _result(data, (a, b), backward)


def concat_cols(a: Tensor, b: Tensor) -> Tensor:
    if a.rows != b.rows:
        raise ShapeError(f"concat_cols: row counts differ, {a.shape} vs {b.shape}")
    data = np.hstack([a.data, b.data])
    split = a.cols

    def backward(g, a=a, b=b, split=split):
        if a.requires_grad:
            a._accumulate(g[:, :split])
        if b.requires_grad:
            b._accumulate(g[:, split:])

    return _result(data, (a, b), backward)


def transpose(a: Tensor) -> Tensor:
    data = a.data.T.copy()

    def backward(g, a=a):
        if a.requires_grad:
            a._accumulate(g.T)

    return _result(data, (a,), backward)


def relu(a: Tensor) -> Tensor:
    data = np.maximum(a.data, 0.0)

    def backward(g, a=a, data=data):
        if a.requires_grad:
            a._accumulate(g * (data > 0.0))

    return _result(data, (a,), backward)


def sigmoid(a: Tensor) -> Tensor:
    x = a.data
    data = np.empty_like(x)
    pos = x >= 0
    data[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    data[~pos] = ex / (1.0 + ex)

    def backward(g, a=a, data=data):
        if a.requires_grad:
            a._accumulate(g * data * (1.0 - data))

    return _result(data, (a,), backward)


def gather_rows(a: Tensor, index) -> Tensor:
    """Select rows a[index]; gradients scatter-add back into the source."""
    idx = np.asarray(index, dtype=np.int64).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= a.rows):
        raise ShapeError(f"gather_rows: index out of range for {a.rows} rows")
    data = a.data[idx]

    def backward(g, a=a, idx=idx):
        if not a.requires_grad or idx.size == 0:
            return
        # sort + reduceat is much faster than np.add.at for wide rows
        order = np.argsort(idx, kind="stable")
        sorted_idx = idx[order]
        boundaries = np.flatnonzero(np.concatenate(([True], sorted_idx[1:] != sorted_idx[:-1])))
        sums = np.add.reduceat(g[order], boundaries, axis=0)
        out = np.zeros_like(a.data)
        out[sorted_idx[boundaries]] = sums
        a._accumulate(out)

    return _result(data, (a,), backward)


def row_sum(a: Tensor) -> Tensor:
    data = a.data.sum(axis=1, keepdims=True)

    def backward(g, a=a):
        if a.requires_grad:
            a._accumulate(np.broadcast_to(g, a.shape).copy())

    return _result(data, (a,), backward)


def sum_all(a: Tensor) -> Tensor:
    data = np.array([[a.data.sum()]])

    def backward(g, a=a):
        if a.requires_grad:
            a._accumulate(np.full_like(a.data, g[0, 0]))

    return _result(data, (a,), backward)


def neighbor_mean(h, g: Graph):
    """Row v of the result is the mean of h over v's neighbors (zero if none)."""
    if h.rows != g.num_nodes:
        raise ShapeError(f"neighbor_mean: {h.rows} rows vs {g.num_nodes} nodes")
    m = g.mean_aggregator()
    if isinstance(h, SparseInput):
        return SparseInput(m @ h.csr)
    data = m @ h.data

    def backward(grad, h=h, g=g):
        if h.requires_grad:
            h._accumulate(g.mean_aggregator_t() @ grad)

    return _result(data, (h,), backward)


def weighted_neighbor_mean(h: Tensor, g: Graph, contributions: Tensor) -> Tensor:
    """Row v = mean over u in N(v) of (h_u + contributions[slot of u -> v]).

    `contributions` must carry one row per directed neighbor slot, aligned
    with the graph's flat neighbor array.
    """
    if h.rows != g.num_nodes:
        raise ShapeError(f"weighted_neighbor_mean: {h.rows} rows vs {g.num_nodes} nodes")
    if contributions.rows != g.neighbors.size:
        raise ShapeError(
            f"weighted_neighbor_mean: {contributions.rows} contribution rows for "
            f"{g.neighbors.size} directed slots"
        )
    if contributions.cols != h.cols:
        raise ShapeError(
            f"weighted_neighbor_mean: width {contributions.cols} vs {h.cols}"
        )
    m = g.mean_aggregator()
    p = g.slot_mean_matrix()
    data = m @ h.data + p @ contributions.data

    def backward(grad, h=h, contributions=contributions, g=g):
        if h.requires_grad:
            h._accumulate(g.mean_aggregator_t() @ grad)
        if contributions.requires_grad:
            contributions._accumulate(g.slot_mean_matrix_t() @ grad)

    return _result(data, (h, contributions), backward)


BCE_CLAMP = 1e-12


def bce_loss(pred: Tensor, labels: Tensor) -> Tensor:
    """Mean binary cross-entropy; predictions clamped into [1e-12, 1 - 1e-12]."""
    _check_same_shape(pred, labels, "bce_loss")
    p = np.clip(pred.data, BCE_CLAMP, 1.0 - BCE_CLAMP)
    y = labels.data
    n = p.size
    data = np.array([[float(-(y * np.log(p) + (1.0 - y) * np.log1p(-p)).sum() / n)]])

    def backward(g, pred=pred, labels=labels, p=p, y=y, n=n):
        scale = g[0, 0] / n
        if pred.requires_grad:
            gp = scale * (p - y) / (p * (1.0 - p))
            gp[pred.data != p] = 0.0  # clamped entries are locally constant
            pred._accumulate(gp)
        if labels.requires_grad:
            labels._accumulate(scale * (np.log1p(-p) - np.log(p)))

    return _result(data, (pred, labels), backward)


# -- reverse pass -----------------------------------------------------------


def _topo_order(root: Tensor) -> list[Tensor]:
    """Post-order over the op graph; reversing it yields a valid schedule."""
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if isinstance(parent, Tensor) and parent._backward is not None:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """Populate .grad on every tensor the scalar loss depends on.

    Each op closure reads the fully-accumulated gradient of its output and
    adds into its parents, so nodes must run only after all their consumers;
    reverse post-order guarantees that.
    """
    if loss.data.shape != (1, 1):
        raise ShapeError(f"backward() needs a 1x1 scalar loss, got {loss.shape}")
    if loss._backward_ran:
        raise RuntimeError("backward() already ran for this loss; rebuild the graph")
    loss._backward_ran = True
    if not loss.requires_grad:
        return  # loss touches no tracked tensor; all gradients are zero
    loss._accumulate(np.ones((1, 1)))
    for node in reversed(_topo_order(loss)):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


def zero_grads(params) -> None:
    for p in params:
        p.zero_grad()


# -- checkpoints -------------------------------------------------------------


def save_checkpoint(path, named_tensors: dict, meta: dict | None = None) -> None:
    """Dump named tensors to a versioned .npz archive."""
    payload = {f"tensor/{name}": t.data for name, t in named_tensors.items()}
    payload["__format__"] = np.array(
        json.dumps({"version": CHECKPOINT_FORMAT_VERSION, "meta": meta or {}})
    )
    np.savez(path, **payload)


def load_checkpoint(path) -> tuple[dict, dict]:
    """Return ({name: ndarray}, meta) from a checkpoint archive."""
    with np.load(path, allow_pickle=False) as archive:
        header = json.loads(str(archive["__format__"]))
        if header.get("version") != CHECKPOINT_FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {header.get('version')}")
        tensors = {
            key[len("tensor/") :]: archive[key]
            for key in archive.files
            if key.startswith("tensor/")
        }
        return tensors, header.get("meta", {})
