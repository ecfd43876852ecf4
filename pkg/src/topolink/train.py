"""Prediction heads, the end-to-end training loop, and model evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import metrics
from .errors import ShapeError, TrainingAbort
from .graph import Graph
from .layers import EncoderConfig, SageLayerParams, encode, glorot, init_encoder
from .optim import Adam
from .split import DataSplit, sample_negatives
from .tensor import (
    SparseInput,
    Tensor,
    add,
    backward,
    bce_loss,
    constant,
    gather_rows,
    hadamard,
    matmul,
    relu,
    row_sum,
    save_checkpoint,
    load_checkpoint,
    sigmoid,
)
from .topo import CENTRALITIES, SIMILARITIES, NodeScores, TopoScore, topo_score

HEAD_KINDS = ("dot", "hadamard_mlp")

# Feature matrices at least this large and this empty are fed through the
# sparse constant-input path; the arithmetic is identical, only cheaper.
SPARSE_MIN_SIZE = 500_000
SPARSE_MAX_DENSITY = 0.10


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 500
    lr: float = 0.01
    alpha: float = 0.5
    centrality_kind: str = "eigenvector"
    similarity_kind: str = "resource_allocation"
    head_kind: str = "hadamard_mlp"
    embed_dim: int = 256  # trainable table width when no features exist
    hidden_dim: int = 256
    num_layers: int = 4
    head_hidden: int = 256
    layer_kind: str = "edge_sage"
    seed: int = 0
    resample_train_negatives: bool = True
    hits_k: int = 20

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.centrality_kind not in CENTRALITIES:
            raise ValueError(f"unknown centrality {self.centrality_kind!r}")
        if self.similarity_kind not in SIMILARITIES:
            raise ValueError(f"unknown similarity {self.similarity_kind!r}")
        if self.head_kind not in HEAD_KINDS:
            raise ValueError(f"unknown head {self.head_kind!r}")

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(
            num_layers=self.num_layers,
            hidden_dim=self.hidden_dim,
            layer_kind=self.layer_kind,
        )


@dataclass
class HeadParams:
    kind: str
    weights: list[Tensor] = field(default_factory=list)
    biases: list[Tensor] = field(default_factory=list)

    def tensors(self) -> list[Tensor]:
        return [*self.weights, *self.biases]


def init_head(kind: str, embed_dim: int, hidden: int, rng: np.random.Generator) -> HeadParams:
    if kind == "dot":
        return HeadParams(kind="dot")
    dims = [(embed_dim, hidden), (hidden, hidden), (hidden, 1)]
    weights = [Tensor(glorot(rng, a, b), requires_grad=True) for a, b in dims]
    biases = [Tensor(np.zeros((1, b)), requires_grad=True) for _, b in dims]
    return HeadParams(kind=kind, weights=weights, biases=biases)


def head_forward(h_u: Tensor, h_v: Tensor, head: HeadParams) -> Tensor:
    """Edge-existence probabilities in (0,1) for row-aligned endpoint pairs."""
    if h_u.shape != h_v.shape:
        raise ShapeError(f"endpoint embeddings differ: {h_u.shape} vs {h_v.shape}")
    z = hadamard(h_u, h_v)
    if head.kind == "dot":
        return sigmoid(row_sum(z))
    out = z
    last = len(head.weights) - 1
    for i, (w, b) in enumerate(zip(head.weights, head.biases)):
        out = add(matmul(out, w), b)
        if i != last:
            out = relu(out)
    return sigmoid(out)


def head_score(h_u, h_v, head: HeadParams) -> float:
    """Score one pair of embedding rows; symmetric in (u, v) for both heads."""
    a = constant(np.atleast_2d(np.asarray(h_u, dtype=np.float64)))
    b = constant(np.atleast_2d(np.asarray(h_v, dtype=np.float64)))
    return head_forward(a, b, head).item()


@dataclass
class TrainedModel:
    encoder_params: list[SageLayerParams]
    head_params: HeadParams
    config: TrainConfig
    embeddings: np.ndarray  # encoded on the train graph with final weights
    topo: TopoScore
    train_graph: Graph

    def parameters(self) -> list[Tensor]:
        out: list[Tensor] = []
        for layer in self.encoder_params:
            out.extend(layer.tensors())
        out.extend(self.head_params.tensors())
        return out


def _score_pairs(embeddings: np.ndarray, pairs: np.ndarray, head: HeadParams) -> np.ndarray:
    h_u = constant(embeddings[pairs[:, 0]])
    h_v = constant(embeddings[pairs[:, 1]])
    return head_forward(h_u, h_v, head).data.ravel()


def _wrap_features(x: np.ndarray):
    nnz = np.count_nonzero(x)
    if x.size >= SPARSE_MIN_SIZE and nnz / x.size <= SPARSE_MAX_DENSITY:
        return SparseInput(x)
    return constant(x)


def train(
    split: DataSplit,
    x: np.ndarray | None,
    cfg: TrainConfig,
    precomputed_centrality: NodeScores | None = None,
) -> tuple[TrainedModel, list[tuple[int, float, float]]]:
    """Run the full training loop on a split.

    Per epoch: encode the train graph, score the train positives plus an
    equal number of sampled negatives, take one Adam step on the mean BCE,
    and record (epoch, loss, validation AUC). The topology score is
    computed once on the train graph, before the loop, and reused.

    Returns the trained model plus the per-epoch history.
    """
    g = split.train_graph
    if split.train_pos.shape[0] == 0:
        raise ValueError("training needs a nonempty train edge set")
    rng = np.random.default_rng(cfg.seed)

    score = None
    if cfg.layer_kind == "edge_sage":
        score = topo_score(
            g, cfg.centrality_kind, cfg.similarity_kind, cfg.alpha,
            centrality=precomputed_centrality,
        )

    if x is None:
        features = Tensor(
            rng.uniform(-0.1, 0.1, size=(g.num_nodes, cfg.embed_dim)), requires_grad=True
        )
        d_in = cfg.embed_dim
    else:
        if x.shape[0] != g.num_nodes:
            raise ShapeError(f"features have {x.shape[0]} rows for {g.num_nodes} nodes")
        features = _wrap_features(np.asarray(x, dtype=np.float64))
        d_in = features.cols

    enc_cfg = cfg.encoder_config()
    enc_params = init_encoder(d_in, enc_cfg, rng)
    head = init_head(cfg.head_kind, cfg.hidden_dim, cfg.head_hidden, rng)

    params: list[Tensor] = []
    if isinstance(features, Tensor) and features.requires_grad:
        params.append(features)
    for layer in enc_params:
        params.extend(layer.tensors())
    params.extend(head.tensors())
    opt = Adam(params, lr=cfg.lr)

    n_pos = split.train_pos.shape[0]
    labels = constant(np.concatenate([np.ones((n_pos, 1)), np.zeros((n_pos, 1))]))
    fixed_negatives = None
    if not cfg.resample_train_negatives:
        fixed_negatives = sample_negatives(g, n_pos, seed=cfg.seed)

    history: list[tuple[int, float, float]] = []
    for epoch in range(cfg.epochs):
        if cfg.resample_train_negatives:
            negatives = sample_negatives(g, n_pos, seed=cfg.seed + epoch)
        else:
            negatives = fixed_negatives
        pairs = np.vstack([split.train_pos, negatives])

        h = encode(g, features, enc_cfg, enc_params, score)
        preds = head_forward(
            gather_rows(h, pairs[:, 0]), gather_rows(h, pairs[:, 1]), head
        )
        loss = bce_loss(preds, labels)
        loss_value = loss.item()
        if not np.isfinite(loss_value):
            raise TrainingAbort(epoch)
        backward(loss)
        opt.step()
        opt.zero_grad()

        if split.val_pos.shape[0] and split.val_neg.shape[0]:
            val_auc = metrics.auc(
                _score_pairs(h.data, split.val_pos, head),
                _score_pairs(h.data, split.val_neg, head),
            )
        else:
            val_auc = float("nan")
        history.append((epoch, loss_value, val_auc))

    final = encode(g, features, enc_cfg, enc_params, score)
    model = TrainedModel(
        encoder_params=enc_params,
        head_params=head,
        config=cfg,
        embeddings=final.data,
        topo=score if score is not None else topo_score(g, cfg.centrality_kind, cfg.similarity_kind, cfg.alpha),
        train_graph=g,
    )
    return model, history


def evaluate(model: TrainedModel, pos, neg) -> metrics.MetricsReport:
    """Score listed pairs with the cached train-graph embeddings and report metrics.

    The embeddings come from message passing over the train graph only, so
    changing the evaluation lists can never change them.
    """
    pos = np.asarray(pos, dtype=np.int64).reshape(-1, 2)
    neg = np.asarray(neg, dtype=np.int64).reshape(-1, 2)
    if pos.shape[0] == 0 or neg.shape[0] == 0:
        raise ValueError("evaluate needs nonempty positive and negative pair lists")
    pos_scores = _score_pairs(model.embeddings, pos, model.head_params)
    neg_scores = _score_pairs(model.embeddings, neg, model.head_params)
    return metrics.report(pos_scores, neg_scores, k=model.config.hits_k)


def save_history(path, history: Sequence[tuple[int, float, float]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,loss,val_auc\n")
        for epoch, loss, val_auc in history:
            fh.write(f"{epoch},{loss!r},{val_auc!r}\n")


def save_model(path, model: TrainedModel) -> None:
    """Checkpoint all named parameters (versioned .npz)."""
    named: dict[str, Tensor] = {}
    for i, layer in enumerate(model.encoder_params):
        named[f"encoder.{i}.w_self"] = layer.w_self
        named[f"encoder.{i}.w_neigh"] = layer.w_neigh
        named[f"encoder.{i}.bias"] = layer.bias
        if layer.w_edge is not None:
            named[f"encoder.{i}.w_edge"] = layer.w_edge
    for i, w in enumerate(model.head_params.weights):
        named[f"head.{i}.weight"] = w
    for i, b in enumerate(model.head_params.biases):
        named[f"head.{i}.bias"] = b
    meta = {"head_kind": model.head_params.kind, "num_layers": model.config.num_layers}
    save_checkpoint(path, named, meta)


def load_model_params(path) -> tuple[dict, dict]:
    """Raw named arrays + meta from a checkpoint (inverse of save_model)."""
    return load_checkpoint(path)
