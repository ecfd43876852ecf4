"""Node centralities, pairwise similarity indices, and the blended edge score.

The blended score attaches a convex combination of a normalized centrality
and a normalized similarity to every directed train-graph edge (and a
per-node variant for self terms); the GNN layer consumes it as an edge
feature.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .graph import Graph

CENTRALITIES = ("degree", "eigenvector", "betweenness")
SIMILARITIES = ("jaccard", "adamic_adar", "resource_allocation")

# Short labels used in ablation tables and CLI flags.
CENTRALITY_ABBREV = {"degree": "DC", "eigenvector": "EC", "betweenness": "BC"}
SIMILARITY_ABBREV = {"jaccard": "JA", "adamic_adar": "AA", "resource_allocation": "RA"}


@dataclass(frozen=True)
class NodeScores:
    """Per-node centrality values of one kind."""

    values: np.ndarray
    kind: str


@dataclass(frozen=True)
class TopoScore:
    """Blended centrality/similarity scores for a train graph.

    edge_score is aligned with the graph's flat neighbor array: the slot
    holding u within v's neighbor range carries the score of the directed
    message u -> v (centrality of the source u, similarity of the edge).
    node_score blends the node's own centrality with the mean similarity
    of its incident edges (zero for isolated nodes).
    """

    alpha: float
    node_score: np.ndarray
    edge_score: np.ndarray
    centrality_kind: str
    similarity_kind: str


def degree_centrality(g: Graph) -> NodeScores:
    if g.num_nodes < 2:
        raise ValueError("degree centrality needs at least 2 nodes")
    values = g.degrees().astype(np.float64) / (g.num_nodes - 1)
    return NodeScores(values, "degree")


def eigenvector_centrality(g: Graph, tol: float = 1e-10, max_iter: int = 1000) -> NodeScores:
    """Leading adjacency eigenvector by power iteration from a uniform start.

    Iterates on A + I: the identity shift keeps the dominant eigenvalue
    strictly separated on bipartite graphs (where +/-lambda pairs would make
    plain power iteration oscillate) without changing the eigenvector.
    Stops once the residual ||Ax - lambda x||_inf falls below tol, with
    lambda the Rayleigh quotient.
    """
    if g.num_edges == 0:
        raise ValueError("eigenvector centrality is undefined on an edgeless graph")
    adj = g.adjacency()
    n = g.num_nodes
    x = np.full(n, 1.0 / math.sqrt(n))
    for _ in range(max_iter):
        ax = adj @ x
        lam = float(x @ ax)
        residual = float(np.max(np.abs(ax - lam * x)))
        if residual <= tol:
            return NodeScores(x, "eigenvector")
        y = ax + x
        x = y / np.linalg.norm(y)
    raise ConvergenceError(
        f"power iteration did not reach tol={tol} in {max_iter} iterations "
        f"(final residual {residual:.3e})"
    )


def betweenness_centrality(g: Graph, pivots: int | None = None, seed: int = 0) -> NodeScores:
    """Exact betweenness via Brandes' dependency accumulation.

    Sums sigma_st(u)/sigma_st over unordered pairs {s, t}; the accumulation
    visits every source and counts each pair twice, so the total is halved.
    With `pivots` set, only that many sampled sources are used and the sum
    is rescaled (opt-in approximation for very large graphs).
    """
    n = g.num_nodes
    adj = [g.neighbors_of(u).tolist() for u in range(n)]
    bc = np.zeros(n)
    if pivots is not None and pivots < n:
        rng = np.random.default_rng(seed)
        sources = rng.choice(n, size=pivots, replace=False).tolist()
        scale = n / pivots
    else:
        sources = range(n)
        scale = 1.0
    for s in sources:
        dist = [-1] * n
        sigma = [0.0] * n
        preds: list[list[int]] = [[] for _ in range(n)]
        dist[s] = 0
        sigma[s] = 1.0
        order: list[int] = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            dv = dist[v]
            sv = sigma[v]
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dv + 1
                    queue.append(w)
                if dist[w] == dv + 1:
                    sigma[w] += sv
                    preds[w].append(v)
        delta = [0.0] * n
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return NodeScores(bc * (scale / 2.0), "betweenness")


def _common_neighbors(g: Graph, u: int, v: int) -> np.ndarray:
    return np.intersect1d(g.neighbors_of(u), g.neighbors_of(v), assume_unique=True)


def jaccard(g: Graph, u: int, v: int) -> float:
    nu, nv = g.neighbors_of(u), g.neighbors_of(v)
    common = _common_neighbors(g, u, v).size
    union = nu.size + nv.size - common
    if union == 0:
        return 0.0
    return common / union


def adamic_adar(g: Graph, u: int, v: int) -> float:
    total = 0.0
    for w in _common_neighbors(g, u, v):
        d = g.degree(int(w))
        if d < 2:
            # unreachable on a simple graph (a common neighbor of two
            # distinct nodes has degree >= 2); kept as a guard
            raise ValueError(f"common neighbor {w} has degree {d}; log weight undefined")
        total += 1.0 / math.log(d)
    return total


def resource_allocation(g: Graph, u: int, v: int) -> float:
    return float(sum(1.0 / g.degree(int(w)) for w in _common_neighbors(g, u, v)))


CENTRALITY_FNS = {
    "degree": degree_centrality,
    "eigenvector": eigenvector_centrality,
    "betweenness": betweenness_centrality,
}

SIMILARITY_FNS = {
    "jaccard": jaccard,
    "adamic_adar": adamic_adar,
    "resource_allocation": resource_allocation,
}


def minmax_normalize(values) -> np.ndarray:
    """Map values to [0, 1] by (v - min) / (max - min); constant input -> zeros."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot normalize an empty vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("cannot normalize non-finite values")
    lo, hi = arr.min(), arr.max()
    if hi == lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)


def edge_similarities(g: Graph, similarity_kind: str) -> np.ndarray:
    """Raw similarity for every directed neighbor slot of g."""
    fn = SIMILARITY_FNS[similarity_kind]
    sims = np.zeros(g.neighbors.size)
    for u, v in g.edge_array():
        s = fn(g, int(u), int(v))
        sims[g.slot_of(int(v), int(u))] = s  # message u -> v
        sims[g.slot_of(int(u), int(v))] = s  # message v -> u
    return sims


def topo_score(
    g: Graph,
    centrality_kind: str,
    similarity_kind: str,
    alpha: float,
    centrality: NodeScores | None = None,
) -> TopoScore:
    """Blend normalized centrality and similarity into per-edge/per-node scores.

    g must be the train graph: scores feed message passing during training,
    so computing them on anything containing held-out edges would leak.
    Each measure is min-max normalized over its own population first, which
    makes alpha a true convex weight between the two.

    A precomputed `centrality` (matching centrality_kind) may be passed to
    avoid recomputing expensive measures across runs.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if centrality_kind not in CENTRALITY_FNS:
        raise ValueError(f"unknown centrality kind {centrality_kind!r}")
    if similarity_kind not in SIMILARITY_FNS:
        raise ValueError(f"unknown similarity kind {similarity_kind!r}")
    if centrality is None:
        centrality = CENTRALITY_FNS[centrality_kind](g)
    elif centrality.kind != centrality_kind:
        raise ValueError(f"precomputed centrality is {centrality.kind!r}, wanted {centrality_kind!r}")
    c_hat = minmax_normalize(centrality.values)

    if g.neighbors.size:
        s_hat = minmax_normalize(edge_similarities(g, similarity_kind))
        sources = g.neighbors  # slot j in v's range holds source node u
        edge_score = alpha * c_hat[sources] + (1.0 - alpha) * s_hat
        # mean similarity of each node's incident edges; 0 when isolated
        deg = g.degrees().astype(np.float64)
        sums = np.add.reduceat(
            np.concatenate([s_hat, [0.0]]),  # sentinel guards empty tail ranges
            g.neighbor_offsets[:-1],
        )
        sums[deg == 0] = 0.0
        mean_sim = np.divide(sums, deg, out=np.zeros_like(sums), where=deg > 0)
    else:
        edge_score = np.zeros(0)
        mean_sim = np.zeros(g.num_nodes)
    node_score = alpha * c_hat + (1.0 - alpha) * mean_sim
    return TopoScore(
        alpha=float(alpha),
        node_score=node_score,
        edge_score=edge_score,
        centrality_kind=centrality_kind,
        similarity_kind=similarity_kind,
    )


def slot_mean_edge_score(g: Graph, score: TopoScore) -> np.ndarray:
    """Per-node mean of incoming directed edge scores (zero when isolated)."""
    if score.edge_score.size != g.neighbors.size:
        raise ValueError("edge score is not aligned with this graph")
    deg = g.degrees().astype(np.float64)
    if g.neighbors.size == 0:
        return np.zeros(g.num_nodes)
    sums = np.add.reduceat(
        np.concatenate([score.edge_score, [0.0]]),
        g.neighbor_offsets[:-1],
    )
    sums[deg == 0] = 0.0
    return np.divide(sums, deg, out=np.zeros_like(sums), where=deg > 0)


def dump_node_scores(path, scores: NodeScores) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node,score\n")
        for i, v in enumerate(scores.values):
            fh.write(f"{i},{float(v)!r}\n")


def dump_topo_scores(path_nodes, path_edges, g: Graph, score: TopoScore) -> None:
    """Write node scores as `node,score` and directed edge scores as `src,dst,score`."""
    with open(path_nodes, "w", encoding="utf-8") as fh:
        fh.write("node,score\n")
        for i, v in enumerate(score.node_score):
            fh.write(f"{i},{float(v)!r}\n")
    with open(path_edges, "w", encoding="utf-8") as fh:
        fh.write("src,dst,score\n")
        for dst in range(g.num_nodes):
            start, end = g.neighbor_offsets[dst], g.neighbor_offsets[dst + 1]
            for slot in range(start, end):
                src = g.neighbors[slot]
                fh.write(f"{src},{dst},{float(score.edge_score[slot])!r}\n")
