import io

import numpy as np
import pytest

from topolink import (
    GraphConstructionError,
    LoadError,
    ParseError,
    build_graph,
    load_node_features,
    parse_edge_list,
)
from topolink.graph import save_edge_list

from conftest import er_graph


class TestParseEdgeList:
    def test_plain_pairs(self):
        edges, report = parse_edge_list("0 1\n1 2\n")
        assert edges.tolist() == [[0, 1], [1, 2]]
        assert report.self_loops_dropped == 0
        assert report.duplicates_dropped == 0

    def test_self_loop_dropped(self):
        edges, report = parse_edge_list("0 0\n0 1\n")
        assert edges.tolist() == [[0, 1]]
        assert report.self_loops_dropped == 1

    def test_undirected_duplicate_dropped(self):
        edges, report = parse_edge_list("0 1\n1 0\n")
        assert edges.tolist() == [[0, 1]]
        assert report.duplicates_dropped == 1

    def test_comments_and_blank_lines(self):
        edges, _ = parse_edge_list("# header\n\n0 1\n")
        assert edges.tolist() == [[0, 1]]

    def test_byte_stream(self):
        edges, _ = parse_edge_list(io.BytesIO(b"3 4\n"))
        assert edges.tolist() == [[3, 4]]

    def test_wrong_token_count_names_line(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_edge_list("0 1\n0 1 2\n")

    def test_non_integer_names_line(self):
        with pytest.raises(ParseError, match="line 1"):
            parse_edge_list("a b\n")


class TestBuildGraph:
    def test_path(self):
        g = build_graph([(0, 1), (1, 2)], 3)
        assert g.degrees().tolist() == [1, 2, 1]
        assert g.num_edges == 2
        g.validate()

    def test_triangle(self):
        g = build_graph([(0, 1), (1, 2), (0, 2)], 3)
        assert g.degrees().tolist() == [2, 2, 2]
        g.validate()

    def test_empty(self):
        g = build_graph([], 4)
        assert g.degrees().tolist() == [0, 0, 0, 0]
        assert g.num_edges == 0
        g.validate()

    def test_out_of_range_id(self):
        with pytest.raises(GraphConstructionError):
            build_graph([(0, 5)], 3)

    def test_self_loop_rejected(self):
        with pytest.raises(GraphConstructionError):
            build_graph([(1, 1)], 3)

    def test_has_edge_and_neighbors(self):
        g = build_graph([(0, 1), (1, 2)], 3)
        assert g.has_edge(0, 1) and g.has_edge(1, 0)
        assert not g.has_edge(0, 2)
        assert g.neighbors_of(1).tolist() == [0, 2]

    def test_degree_sum_identity_random(self):
        for seed in range(10):
            g = er_graph(25, 0.2, seed)
            assert int(g.degrees().sum()) == 2 * g.num_edges
            g.validate()

    def test_edge_list_round_trip(self, tmp_path):
        g = er_graph(30, 0.15, seed=42)
        path = tmp_path / "edges.txt"
        save_edge_list(path, g.edge_array())
        reparsed, report = parse_edge_list(path.read_text())
        assert report == type(report)()  # nothing dropped
        g2 = build_graph(reparsed, g.num_nodes)
        assert np.array_equal(g.neighbor_offsets, g2.neighbor_offsets)
        assert np.array_equal(g.neighbors, g2.neighbors)


class TestLoadNodeFeatures:
    def test_identity(self):
        x = load_node_features("1,0\n0,1\n", 2)
        assert np.array_equal(x, np.eye(2))

    def test_row_count_mismatch(self):
        with pytest.raises(LoadError, match="row count"):
            load_node_features("1,2\n3,4\n5,6\n", 4)

    def test_ragged_rows(self):
        with pytest.raises(LoadError, match="line 2"):
            load_node_features("1,2\n3\n", 2)

    def test_non_numeric(self):
        with pytest.raises(LoadError, match="non-numeric"):
            load_node_features("1,x\n", 1)

    def test_non_finite_rejected(self):
        with pytest.raises(LoadError, match="non-finite"):
            load_node_features("1,inf\n", 1)
