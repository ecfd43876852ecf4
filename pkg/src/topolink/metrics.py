"""Ranking and classification metrics for link prediction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class MetricsReport:
    auc: float
    ap: float
    hits_at_k: float
    k: int
    n_pos: int
    n_neg: int

    def as_dict(self) -> dict:
        return {
            "auc": self.auc,
            "ap": self.ap,
            f"hits_at_{self.k}": self.hits_at_k,
            "n_pos": self.n_pos,
            "n_neg": self.n_neg,
        }


def auc(pos_scores, neg_scores) -> float:
    """Probability that a positive outranks a negative, ties counting half.

    Computed from midrank statistics in O((p+q) log(p+q)); equal by
    construction to counting all p*q pairwise comparisons.
    """
    pos = np.asarray(pos_scores, dtype=np.float64).ravel()
    neg = np.asarray(neg_scores, dtype=np.float64).ravel()
    if pos.size == 0 or neg.size == 0:
        raise ValueError("auc needs nonempty positive and negative scores")
    ranks = rankdata(np.concatenate([pos, neg]), method="average")
    u = ranks[: pos.size].sum() - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


def average_precision(scores, labels) -> float:
    """Recall-weighted mean of precision over descending score thresholds.

    One threshold per ranked item; ties are broken by stable input order
    (items are ranked by score, then by original position).
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if s.size != y.size:
        raise ValueError(f"scores ({s.size}) and labels ({y.size}) differ in length")
    total_pos = int(np.sum(y == 1))
    if total_pos == 0:
        raise ValueError("average precision needs at least one positive label")
    order = np.lexsort((np.arange(s.size), -s))
    hits = (y[order] == 1).astype(np.float64)
    tp = np.cumsum(hits)
    precision = tp / np.arange(1, s.size + 1)
    # sum over thresholds of (R_n - R_{n-1}) * P_n; recall jumps by
    # 1/total_pos exactly at the positive items
    return float((precision * hits).sum() / total_pos)


def hits_at_k(pos_scores, neg_scores, k: int) -> float:
    """Fraction of positives ranked within the top k against the negatives.

    rank(t) = 1 + #{negatives with score >= score(t)}: a positive tied with
    the k-th negative does not count (pessimistic tie rule).
    """
    pos = np.asarray(pos_scores, dtype=np.float64).ravel()
    neg = np.asarray(neg_scores, dtype=np.float64).ravel()
    if k < 1:
        raise ValueError("k must be >= 1")
    if neg.size < k:
        raise ValueError(f"hits@k undefined: only {neg.size} negatives for k={k}")
    if pos.size == 0:
        raise ValueError("hits@k needs at least one positive score")
    kth_best_neg = np.partition(neg, -k)[-k]
    return float(np.mean(pos > kth_best_neg))


def confusion(scores, labels, threshold: float) -> tuple[int, int, int, int]:
    """(TP, FP, TN, FN) with predicted-positive iff score >= threshold."""
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if s.size != y.size:
        raise ValueError(f"scores ({s.size}) and labels ({y.size}) differ in length")
    pred = s >= threshold
    actual = y == 1
    tp = int(np.sum(pred & actual))
    fp = int(np.sum(pred & ~actual))
    tn = int(np.sum(~pred & ~actual))
    fn = int(np.sum(~pred & actual))
    return tp, fp, tn, fn


def report(pos_scores, neg_scores, k: int = 20) -> MetricsReport:
    """Bundle AUC, AP and Hits@k for one positive/negative score split."""
    pos = np.asarray(pos_scores, dtype=np.float64).ravel()
    neg = np.asarray(neg_scores, dtype=np.float64).ravel()
    scores = np.concatenate([pos, neg])
    labels = np.concatenate([np.ones(pos.size), np.zeros(neg.size)])
    return MetricsReport(
        auc=auc(pos, neg),
        ap=average_precision(scores, labels),
        hits_at_k=hits_at_k(pos, neg, k),
        k=k,
        n_pos=int(pos.size),
        n_neg=int(neg.size),
    )
