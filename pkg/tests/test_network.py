import numpy as np
import pytest

from simplexmd import (
    Graph,
    MixingMatrix,
    generate_graph,
    is_connected,
    load_graph,
    load_matrix,
    metropolis_weights,
    save_graph,
    save_matrix,
    second_singular_value,
    verify_assumptions,
)

PATH3 = Graph(3, frozenset({(0, 1), (1, 2)}))


def complete_graph(n):
    return Graph(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))


class TestGraph:
    def test_validation(self):
        with pytest.raises(ValueError):
            Graph(1, frozenset())
        with pytest.raises(ValueError):
            Graph(3, frozenset({(0, 3)}))
        with pytest.raises(ValueError):
            Graph(3, frozenset({(2, 1)}))  # not (i < j)

    def test_degrees(self):
        assert list(PATH3.degrees()) == [1, 2, 1]

    def test_connectivity(self):
        assert is_connected(PATH3)
        assert not is_connected(Graph(4, frozenset({(0, 1), (2, 3)})))


class TestGenerateGraph:
    def test_exact_edge_counts_and_connectivity(self):
        for n, m in ((100, 939), (100, 2678), (10, 9), (10, 45)):
            g = generate_graph(n, m, seed=5)
            assert g.n == n
            assert g.m == m
            assert is_connected(g)

    def test_three_nodes_two_edges_is_a_path(self):
        g = generate_graph(3, 2, seed=0)
        assert sorted(g.degrees()) == [1, 1, 2]

    def test_max_edges_is_complete(self):
        g = generate_graph(4, 6, seed=0)
        assert g.edges == complete_graph(4).edges

    def test_deterministic_per_seed(self):
        a = generate_graph(30, 60, seed=3)
        b = generate_graph(30, 60, seed=3)
        assert a.edges == b.edges
        c = generate_graph(30, 60, seed=4)
        assert c.edges != a.edges

    def test_infeasible_counts(self):
        with pytest.raises(ValueError):
            generate_graph(5, 3, seed=0)  # below spanning tree
        with pytest.raises(ValueError):
            generate_graph(5, 11, seed=0)  # above complete


class TestMetropolisWeights:
    def test_complete_graph_is_uniform_averaging(self):
        for n in (2, 5):
            A = metropolis_weights(complete_graph(n))
            assert np.array_equal(A.weights, np.full((n, n), 1.0 / n))

    def test_path3_exact_matrix(self):
        A = metropolis_weights(PATH3)
        want = np.array(
            [[2 / 3, 1 / 3, 0.0], [1 / 3, 1 / 3, 1 / 3], [0.0, 1 / 3, 2 / 3]]
        )
        assert np.array_equal(A.weights, want)

    def test_two_node_graph(self):
        A = metropolis_weights(Graph(2, frozenset({(0, 1)})))
        assert np.array_equal(A.weights, np.full((2, 2), 0.5))

    def test_doubly_stochastic_and_pattern(self):
        g = generate_graph(40, 100, seed=1)
        A = metropolis_weights(g)
        W = A.weights
        assert np.max(np.abs(W.sum(axis=0) - 1.0)) <= 1e-12
        assert np.max(np.abs(W.sum(axis=1) - 1.0)) <= 1e-12
        assert np.min(W) >= 0.0
        assert np.array_equal(W, W.T)
        off = ~np.eye(40, dtype=bool)
        edge_set = {(i, j) for i, j in g.edges} | {(j, i) for i, j in g.edges}
        nz = np.argwhere((W > 0) & off)
        assert {(int(i), int(j)) for i, j in nz} == edge_set

    def test_disconnected_rejected(self):
        with pytest.raises(ValueError, match="connected"):
            metropolis_weights(Graph(4, frozenset({(0, 1), (2, 3)})))


class TestSecondSingularValue:
    def test_complete_graph_averaging_is_rank_one(self):
        A = metropolis_weights(complete_graph(5))
        assert second_singular_value(A) <= 1e-12

    def test_path3_value(self):
        A = metropolis_weights(PATH3)
        assert abs(A.sigma2 - 2 / 3) <= 1e-10

    def test_two_node_value(self):
        A = metropolis_weights(Graph(2, frozenset({(0, 1)})))
        assert A.sigma2 <= 1e-12

    def test_against_svd_oracle(self):
        for seed, (n, m) in enumerate(((10, 20), (25, 60), (40, 200))):
            A = metropolis_weights(generate_graph(n, m, seed=seed))
            svals = np.linalg.svd(A.weights, compute_uv=False)
            assert abs(A.sigma2 - svals[1]) <= 1e-9

    def test_identity_has_sigma2_one(self):
        assert abs(second_singular_value(np.eye(4)) - 1.0) <= 1e-10


class TestVerifyAssumptions:
    def test_generated_graphs_pass(self):
        for n, m, seed in ((100, 939, 2), (100, 2678, 2), (12, 20, 0)):
            A = metropolis_weights(generate_graph(n, m, seed=seed))
            rep = verify_assumptions(A)
            assert rep.all_ok, str(rep)
            assert rep.sigma2 < 1.0

    def test_identity_not_irreducible(self):
        rep = verify_assumptions(np.eye(3))
        assert not rep.irreducible
        assert rep.aperiodic  # positive diagonal
        assert not rep.contractive  # sigma2 == 1
        assert not rep.all_ok

    def test_path3_report(self):
        rep = verify_assumptions(metropolis_weights(PATH3))
        assert rep.all_ok
        assert rep.sigma2 == pytest.approx(2 / 3, abs=1e-10)

    def test_asymmetric_flagged(self):
        W = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
        rep = verify_assumptions(W)
        assert rep.doubly_stochastic
        assert not rep.symmetric

    def test_report_string(self):
        rep = verify_assumptions(np.eye(2))
        text = str(rep)
        assert "irreducible" in text and "NO" in text


class TestContraction:
    def test_centered_matrices_contract(self):
        rng = np.random.default_rng(9)
        for seed in range(3):
            g = generate_graph(20, 50, seed=seed)
            A = metropolis_weights(g)
            for _ in range(20):
                X = rng.normal(size=(20, 6))
                X -= X.mean(axis=0)  # zero column mean: orthogonal to ones
                lhs = np.linalg.norm(A.weights @ X)
                assert lhs <= A.sigma2 * np.linalg.norm(X) + 1e-9

    def test_complete_graph_averages_exactly(self):
        A = metropolis_weights(complete_graph(6))
        rng = np.random.default_rng(2)
        X = rng.normal(size=(6, 3))
        mixed = A.weights @ X
        assert np.allclose(mixed, X.mean(axis=0), atol=1e-12)


class TestFileIO:
    def test_graph_round_trip(self, tmp_path):
        g = generate_graph(15, 30, seed=4)
        path = tmp_path / "graph.txt"
        save_graph(g, path)
        assert path.read_text().splitlines()[0] == "15 30"
        assert load_graph(path).edges == g.edges

    def test_disconnected_file_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("4 2\n0 1\n2 3\n")
        with pytest.raises(ValueError, match="not connected"):
            load_graph(path)

    def test_malformed_graph_file(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3 2\n0 1\n")
        with pytest.raises(ValueError, match="expected 2 edge lines"):
            load_graph(path)

    def test_matrix_round_trip(self, tmp_path):
        A = metropolis_weights(generate_graph(8, 14, seed=1))
        path = tmp_path / "mix.txt"
        save_matrix(A, path)
        B = load_matrix(path)
        assert np.array_equal(A.weights, B.weights)
        assert A.sigma2 == B.sigma2

    def test_nonsquare_matrix_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0.5 0.5\n0.5\n")
        with pytest.raises(ValueError, match="square"):
            load_matrix(path)

    def test_from_weights_validation(self):
        with pytest.raises(ValueError):
            MixingMatrix.from_weights(np.ones((2, 3)))
        with pytest.raises(ValueError):
            MixingMatrix.from_weights(np.array([[np.nan, 1.0], [1.0, 0.0]]))
