import math

import numpy as np
import pytest

from topolink import (
    ConvergenceError,
    adamic_adar,
    betweenness_centrality,
    build_graph,
    degree_centrality,
    eigenvector_centrality,
    jaccard,
    minmax_normalize,
    resource_allocation,
    topo_score,
)
from topolink.topo import edge_similarities, slot_mean_edge_score

from conftest import er_graph, is_connected


# -- independent oracles ------------------------------------------------------


def dense_eigenvector_oracle(g):
    """Leading eigenvector from a dense symmetric eigensolver, sign-aligned
    to the nonnegative orientation."""
    a = g.adjacency().toarray()
    w, v = np.linalg.eigh(a)
    x = v[:, np.argmax(w)]
    if x.sum() < 0:
        x = -x
    return x


def betweenness_oracle(g):
    """Direct path-counting: BFS from every node gives distances and path
    counts; sigma_st(u) factors as sigma_s(u) * sigma_t(u) on shortest paths."""
    n = g.num_nodes
    dist = np.full((n, n), -1, dtype=np.int64)
    sigma = np.zeros((n, n))
    for s in range(n):
        dist[s, s] = 0
        sigma[s, s] = 1.0
        frontier = [s]
        d = 0
        while frontier:
            nxt = []
            for v in frontier:
                for w in g.neighbors_of(v):
                    w = int(w)
                    if dist[s, w] < 0:
                        dist[s, w] = d + 1
                        nxt.append(w)
                    if dist[s, w] == d + 1:
                        sigma[s, w] += sigma[s, v]
            frontier = nxt
            d += 1
    bc = np.zeros(n)
    for s in range(n):
        for t in range(s + 1, n):
            if sigma[s, t] == 0:
                continue
            for u in range(n):
                if u in (s, t) or dist[s, u] < 0 or dist[t, u] < 0:
                    continue
                if dist[s, u] + dist[t, u] == dist[s, t]:
                    bc[u] += sigma[s, u] * sigma[t, u] / sigma[s, t]
    return bc


def similarity_oracles(g, u, v):
    """Direct set-based evaluation of all three indices."""
    nu = set(g.neighbors_of(u).tolist())
    nv = set(g.neighbors_of(v).tolist())
    common = nu & nv
    union = nu | nv
    ja = len(common) / len(union) if union else 0.0
    aa = sum(1.0 / math.log(g.degree(w)) for w in common)
    ra = sum(1.0 / g.degree(w) for w in common)
    return ja, aa, ra


# -- centralities -------------------------------------------------------------


class TestDegreeCentrality:
    def test_triangle(self, triangle):
        assert degree_centrality(triangle).values.tolist() == [1.0, 1.0, 1.0]

    def test_path(self, path3):
        assert degree_centrality(path3).values.tolist() == [0.5, 1.0, 0.5]

    def test_star(self, star5):
        values = degree_centrality(star5).values
        assert values[0] == 1.0 and np.all(values[1:] == 0.25)

    def test_single_node_rejected(self):
        with pytest.raises(ValueError):
            degree_centrality(build_graph([], 1))


class TestEigenvectorCentrality:
    def test_triangle_symmetry(self, triangle):
        values = eigenvector_centrality(triangle).values
        np.testing.assert_allclose(values, 1.0 / math.sqrt(3), atol=1e-10)

    def test_star_closed_form(self, star5):
        values = eigenvector_centrality(star5).values
        assert abs(values[0] - 1.0 / math.sqrt(2)) < 1e-9
        np.testing.assert_allclose(values[1:], 1.0 / math.sqrt(8), atol=1e-9)

    def test_path_closed_form(self, path3):
        values = eigenvector_centrality(path3).values
        np.testing.assert_allclose(values, [0.5, 1.0 / math.sqrt(2), 0.5], atol=1e-9)

    def test_matches_dense_oracle(self):
        hits = 0
        for seed in range(40):
            g = er_graph(int(5 + seed % 26), 0.3, seed=seed)
            if g.num_edges == 0 or not is_connected(g):
                continue
            hits += 1
            x = eigenvector_centrality(g, max_iter=5000).values
            np.testing.assert_allclose(x, dense_eigenvector_oracle(g), atol=1e-8)
        assert hits >= 10

    def test_unit_norm_and_nonnegative(self):
        g = er_graph(20, 0.3, seed=3)
        x = eigenvector_centrality(g).values
        assert abs(np.linalg.norm(x) - 1.0) < 1e-12
        assert np.all(x >= -1e-15)

    def test_edgeless_rejected(self):
        with pytest.raises(ValueError):
            eigenvector_centrality(build_graph([], 3))

    def test_convergence_error_reports_residual(self):
        g = er_graph(20, 0.3, seed=3)
        with pytest.raises(ConvergenceError, match="residual"):
            eigenvector_centrality(g, tol=1e-10, max_iter=2)


class TestBetweennessCentrality:
    def test_path(self, path3):
        assert betweenness_centrality(path3).values.tolist() == [0.0, 1.0, 0.0]

    def test_triangle(self, triangle):
        assert betweenness_centrality(triangle).values.tolist() == [0.0, 0.0, 0.0]

    def test_star(self, star5):
        values = betweenness_centrality(star5).values
        assert values[0] == 6.0  # C(4, 2) leaf pairs routed through the hub
        assert np.all(values[1:] == 0.0)

    def test_isolated_nodes_score_zero(self):
        g = build_graph([(0, 1), (1, 2)], 5)
        values = betweenness_centrality(g).values
        assert values[3] == 0.0 and values[4] == 0.0

    def test_matches_bfs_oracle(self):
        for seed in range(12):
            g = er_graph(int(8 + 2 * seed), 0.25, seed=seed + 50)
            got = betweenness_centrality(g).values
            np.testing.assert_allclose(got, betweenness_oracle(g), atol=1e-9)

    def test_pivot_mode_is_exact_when_pivots_cover_all(self):
        g = er_graph(15, 0.3, seed=9)
        exact = betweenness_centrality(g).values
        approx = betweenness_centrality(g, pivots=15).values
        np.testing.assert_allclose(approx, exact, atol=1e-12)


# -- similarities -------------------------------------------------------------


class TestSimilarities:
    def test_jaccard_shared_neighborhood(self):
        g = build_graph([(0, 1), (1, 2), (2, 3), (0, 3)], 4)
        assert jaccard(g, 0, 2) == 1.0

    def test_jaccard_disjoint_stars(self):
        g = build_graph([(0, 1), (0, 2), (3, 4), (3, 5)], 6)
        assert jaccard(g, 1, 4) == 0.0

    def test_jaccard_isolated_pair(self):
        g = build_graph([(0, 1)], 4)
        assert jaccard(g, 2, 3) == 0.0

    def test_adamic_adar_single_common(self):
        # 0 and 2 share neighbor 1 of degree 2
        g = build_graph([(0, 1), (1, 2)], 3)
        assert abs(adamic_adar(g, 0, 2) - 1.0 / math.log(2)) < 1e-12

    def test_adamic_adar_no_common(self):
        g = build_graph([(0, 1), (2, 3)], 4)
        assert adamic_adar(g, 0, 2) == 0.0

    def test_adamic_adar_two_common(self):
        # common neighbors of degrees 2 and 4
        g = build_graph([(0, 1), (1, 2), (0, 3), (3, 2), (3, 4), (3, 5)], 6)
        want = 1.0 / math.log(2) + 1.0 / math.log(4)
        assert abs(adamic_adar(g, 0, 2) - want) < 1e-12
        assert abs(want - 2.164042561333445) < 1e-12

    def test_resource_allocation(self):
        g = build_graph([(0, 1), (1, 2)], 3)
        assert resource_allocation(g, 0, 2) == 0.5
        g2 = build_graph([(0, 1), (1, 2), (0, 3), (3, 2), (3, 4), (3, 5)], 6)
        assert resource_allocation(g2, 0, 2) == 0.75

    def test_symmetry_and_bounds_random(self):
        rng = np.random.default_rng(0)
        for seed in range(6):
            g = er_graph(18, 0.25, seed=seed + 300)
            for _ in range(30):
                u, v = rng.integers(0, 18, size=2)
                u, v = int(u), int(v)
                for fn in (jaccard, adamic_adar, resource_allocation):
                    assert fn(g, u, v) == fn(g, v, u)
                ja, aa, ra = similarity_oracles(g, u, v)
                assert abs(jaccard(g, u, v) - ja) < 1e-12
                assert abs(adamic_adar(g, u, v) - aa) < 1e-12
                assert abs(resource_allocation(g, u, v) - ra) < 1e-12
                assert 0.0 <= jaccard(g, u, v) <= 1.0
                # every common neighbor has degree >= 2 on a simple graph
                common = len(
                    set(g.neighbors_of(u).tolist()) & set(g.neighbors_of(v).tolist())
                )
                assert resource_allocation(g, u, v) <= common / 2 + 1e-12


# -- normalization and the blended score -------------------------------------


class TestMinmaxNormalize:
    def test_basic(self):
        assert minmax_normalize([0, 5, 10]).tolist() == [0.0, 0.5, 1.0]

    def test_degenerate_range(self):
        assert minmax_normalize([3, 3, 3]).tolist() == [0.0, 0.0, 0.0]

    def test_two_values(self):
        assert minmax_normalize([-1, 1]).tolist() == [0.0, 1.0]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            minmax_normalize([])

    def test_preserves_order_and_argmax(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            v = rng.normal(size=17)
            out = minmax_normalize(v)
            assert np.argmax(out) == np.argmax(v)
            assert np.array_equal(np.argsort(out, kind="stable"), np.argsort(v, kind="stable"))


class TestTopoScore:
    def test_alpha_one_is_pure_centrality(self):
        g = er_graph(15, 0.3, seed=2)
        score = topo_score(g, "degree", "jaccard", 1.0)
        c_hat = minmax_normalize(degree_centrality(g).values)
        assert np.array_equal(score.edge_score, c_hat[g.neighbors])

    def test_alpha_zero_is_pure_similarity(self):
        g = er_graph(15, 0.3, seed=2)
        score = topo_score(g, "degree", "jaccard", 0.0)
        s_hat = minmax_normalize(edge_similarities(g, "jaccard"))
        assert np.array_equal(score.edge_score, s_hat)

    def test_blend_arithmetic(self):
        # e.g. chat=0.8, shat=0.4, alpha=0.5 -> 0.6; checked for every edge slot
        g = er_graph(15, 0.3, seed=2)
        score = topo_score(g, "degree", "jaccard", 0.5)
        c_hat = minmax_normalize(degree_centrality(g).values)
        s_hat = minmax_normalize(edge_similarities(g, "jaccard"))
        np.testing.assert_allclose(
            score.edge_score, 0.5 * c_hat[g.neighbors] + 0.5 * s_hat, atol=0
        )
        assert 0.5 * 0.8 + 0.5 * 0.4 == pytest.approx(0.6)

    def test_affine_in_alpha(self):
        g = er_graph(18, 0.3, seed=5)
        hi = topo_score(g, "eigenvector", "resource_allocation", 1.0)
        lo = topo_score(g, "eigenvector", "resource_allocation", 0.0)
        for alpha in (0.25, 0.5, 0.75):
            mid = topo_score(g, "eigenvector", "resource_allocation", alpha)
            np.testing.assert_allclose(
                mid.edge_score, alpha * hi.edge_score + (1 - alpha) * lo.edge_score, atol=1e-14
            )
            np.testing.assert_allclose(
                mid.node_score, alpha * hi.node_score + (1 - alpha) * lo.node_score, atol=1e-14
            )

    def test_alpha_out_of_range(self):
        g = er_graph(10, 0.4, seed=1)
        with pytest.raises(ValueError):
            topo_score(g, "degree", "jaccard", 1.5)

    def test_scores_in_unit_interval(self):
        g = er_graph(20, 0.3, seed=8)
        score = topo_score(g, "betweenness", "adamic_adar", 0.4)
        assert np.all(score.edge_score >= 0.0) and np.all(score.edge_score <= 1.0)
        assert np.all(score.node_score >= 0.0) and np.all(score.node_score <= 1.0)

    def test_isolated_node_gets_pure_centrality_term(self):
        g = build_graph([(0, 1), (1, 2)], 4)  # node 3 isolated
        score = topo_score(g, "degree", "jaccard", 0.5)
        c_hat = minmax_normalize(degree_centrality(g).values)
        assert score.node_score[3] == 0.5 * c_hat[3]  # mean similarity term is 0

    def test_node_score_uses_mean_incident_similarity(self):
        g = er_graph(14, 0.35, seed=4)
        score = topo_score(g, "degree", "resource_allocation", 0.5)
        s_hat = minmax_normalize(edge_similarities(g, "resource_allocation"))
        c_hat = minmax_normalize(degree_centrality(g).values)
        for v in range(g.num_nodes):
            start, end = g.neighbor_offsets[v], g.neighbor_offsets[v + 1]
            mean_sim = s_hat[start:end].mean() if end > start else 0.0
            assert abs(score.node_score[v] - (0.5 * c_hat[v] + 0.5 * mean_sim)) < 1e-14

    def test_slot_mean_matches_manual(self):
        g = er_graph(12, 0.3, seed=6)
        score = topo_score(g, "degree", "jaccard", 0.3)
        sbar = slot_mean_edge_score(g, score)
        for v in range(g.num_nodes):
            start, end = g.neighbor_offsets[v], g.neighbor_offsets[v + 1]
            want = score.edge_score[start:end].mean() if end > start else 0.0
            assert abs(sbar[v] - want) < 1e-14
