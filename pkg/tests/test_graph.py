import numpy as np
import pytest
from pydantic import ValidationError

from conftest import THREE_AGENT_XI, make_random_digraph, make_random_sc_digraph
from nlconsensus.core.exceptions import DegenerateNullspace, NotStronglyConnected
from nlconsensus.models.graph_models import Laplacian, WeightedDigraph
from nlconsensus.modules.graph import graph_module
from nlconsensus.modules.oracle import oracle_module


def test_weighted_digraph_rejects_invalid_weights():
    """Test weight validation."""
    with pytest.raises(ValidationError):
        WeightedDigraph(weights=[[0, -1], [1, 0]])
    with pytest.raises(ValidationError):
        WeightedDigraph(weights=[[1, 1], [1, 0]])  # self-loop
    with pytest.raises(ValidationError):
        WeightedDigraph(weights=[[0, 1, 0], [1, 0, 0]])  # not square


def test_weighted_digraph_is_read_only(three_agent_graph):
    """Test digraph weights are read-only."""
    with pytest.raises(ValueError):
        three_agent_graph.weights[0, 1] = 5.0


def test_neighbors_follow_receive_convention(three_agent_graph):
    """Node i's neighbors are the nodes it receives from (a_ij > 0)."""
    assert three_agent_graph.neighbors(0) == [1, 2]
    assert three_agent_graph.neighbors(1) == [2]
    assert three_agent_graph.neighbors(2) == [0]


def test_from_edges_matches_matrix(three_agent_graph):
    """Test edge construction matches the matrix."""
    g = WeightedDigraph.from_edges(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
    assert np.array_equal(g.weights, three_agent_graph.weights)


# ==================== build_laplacian ====================

def test_build_laplacian_three_agent_graph(three_agent_laplacian):
    """Test L of the three-agent graph."""
    expected = np.array([[2, -1, -1], [0, 1, -1], [-1, 0, 1]], dtype=float)
    assert np.array_equal(three_agent_laplacian.entries, expected)


def test_build_laplacian_empty_graph():
    """Test an edgeless graph gives a zero L."""
    L = graph_module.build_laplacian(WeightedDigraph(weights=np.zeros((4, 4))))
    assert np.array_equal(L.entries, np.zeros((4, 4)))


def test_build_laplacian_complete_graph_is_symmetric():
    """Test L of a complete graph is symmetric."""
    L = graph_module.build_laplacian(WeightedDigraph(weights=np.ones((3, 3)) - np.eye(3)))
    expected = np.array([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]], dtype=float)
    assert np.array_equal(L.entries, expected)


def test_laplacian_rows_sum_to_zero_on_random_graphs(rng):
    """Test zero row sums on random graphs."""
    for _ in range(200):
        n = int(rng.integers(1, 9))
        g = make_random_digraph(rng, n, p=0.5, weights=(0.5, 1.0, 2.0, 4.0))
        L = graph_module.build_laplacian(g)
        assert np.all(L.entries.sum(axis=1) == 0)
        assert np.all(L.entries @ np.ones(n) == 0)


def test_laplacian_rejects_positive_off_diagonal():
    """Test Laplacian validation."""
    with pytest.raises(ValidationError):
        Laplacian(entries=[[1, 1], [-1, 1]])


# ==================== connectivity ====================

def test_connectivity_three_agent_graph(three_agent_graph):
    """Test the three-agent graph is SC."""
    report = graph_module.connectivity(three_agent_graph)
    assert report.strongly_connected is True
    assert report.has_spanning_tree is True
    assert report.scc_count == 1
    assert report.root_candidates == frozenset({0, 1, 2})


def test_connectivity_leader_follower():
    """Test a leader-follower pair has a spanning tree rooted at the leader."""
    # node 1 (index 0) listens to node 2 (index 1): node 2's value flows to node 1
    g = WeightedDigraph(weights=[[0, 1], [0, 0]])
    report = graph_module.connectivity(g)
    assert report.strongly_connected is False
    assert report.has_spanning_tree is True
    assert report.scc_count == 2
    assert report.root_candidates == frozenset({1})


def test_connectivity_directed_cycle():
    """Test a directed cycle is SC."""
    a = np.zeros((4, 4))
    for i in range(4):
        a[i, (i + 1) % 4] = 1.0
    report = graph_module.connectivity(WeightedDigraph(weights=a))
    assert report.strongly_connected is True
    assert report.root_candidates == frozenset(range(4))


def test_connectivity_two_leaders_has_no_spanning_tree():
    """Test two leaders leave no spanning tree."""
    # nodes 0 and 1 both listen to nobody; node 2 listens to both
    g = WeightedDigraph(weights=[[0, 0, 0], [0, 0, 0], [1, 1, 0]])
    report = graph_module.connectivity(g)
    assert report.has_spanning_tree is False
    assert report.root_candidates == frozenset()
    assert report.scc_count == 3


def test_single_node_is_strongly_connected():
    """Test a single node is SC."""
    g = WeightedDigraph(weights=[[0.0]])
    report = graph_module.connectivity(g)
    assert report.strongly_connected and report.scc_count == 1
    xi = graph_module.left_eigenvector(graph_module.build_laplacian(g))
    assert xi.xi.tolist() == [1.0]


def test_connectivity_agrees_with_reachability_oracle(rng):
    """Test connectivity against Boolean closure."""
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        g = make_random_digraph(rng, n, p=float(rng.uniform(0.1, 0.6)))
        report = graph_module.connectivity(g)
        reach = oracle_module.reachability(g)
        assert report.strongly_connected == reach.strongly_connected
        assert report.root_candidates == reach.roots()
        assert report.has_spanning_tree == bool(reach.roots())


# ==================== left_eigenvector ====================

def test_left_eigenvector_three_agent_graph(three_agent_xi):
    """Test xi of the three-agent graph."""
    assert np.allclose(three_agent_xi.xi, THREE_AGENT_XI, atol=1e-10, rtol=0)


def test_left_eigenvector_balanced_graph_is_uniform():
    """Test a balanced graph has uniform xi."""
    L = graph_module.build_laplacian(WeightedDigraph(weights=np.ones((3, 3)) - np.eye(3)))
    assert graph_module.is_balanced(L)
    xi = graph_module.left_eigenvector(L)
    assert np.allclose(xi.xi, 1.0 / 3.0, atol=1e-14)


def test_left_eigenvector_rejects_non_sc_graph():
    """Test xi needs an SC graph."""
    L = graph_module.build_laplacian(WeightedDigraph(weights=[[0, 1], [0, 0]]))
    with pytest.raises(NotStronglyConnected):
        graph_module.left_eigenvector(L)


def test_left_eigenvector_properties_on_random_sc_graphs(rng):
    """Test xi is positive, sums to 1 and solves L^T xi = 0."""
    for _ in range(300):
        n = int(rng.integers(2, 9))
        L = graph_module.build_laplacian(make_random_sc_digraph(rng, n))
        xi = graph_module.left_eigenvector(L)
        assert np.all(xi.xi > 0)
        assert abs(xi.xi.sum() - 1.0) < 1e-12
        assert np.max(np.abs(L.entries.T @ xi.xi)) <= xi.tol


def test_left_eigenvector_matches_bruteforce_nullspace(rng):
    """Test xi against elimination."""
    for _ in range(50):
        L = graph_module.build_laplacian(make_random_sc_digraph(rng, 5))
        basis = oracle_module.nullspace_bruteforce(L.entries.T)
        assert len(basis) == 1
        v = basis[0] / basis[0].sum()
        assert np.allclose(graph_module.left_eigenvector(L).xi, v, atol=1e-10, rtol=0)


def test_left_eigenvector_is_scale_invariant(rng):
    """Test scaling weights leaves xi unchanged."""
    g = make_random_sc_digraph(rng, 6)
    scaled = WeightedDigraph(weights=g.weights * 7.5)
    xi = graph_module.left_eigenvector(graph_module.build_laplacian(g)).xi
    xi_scaled = graph_module.left_eigenvector(graph_module.build_laplacian(scaled)).xi
    assert np.allclose(xi, xi_scaled, atol=1e-12)


def test_left_eigenvector_degenerate_nullspace_detected():
    """Test a near-split graph is reported degenerate."""
    # two closed pairs joined only by 1e-14 links: SC support, numerically two zero eigenvalues
    a = np.array([
        [0, 1, 0, 0],
        [1, 0, 1e-14, 0],
        [0, 0, 0, 1],
        [1e-14, 0, 1, 0],
    ])
    L = graph_module.build_laplacian(WeightedDigraph(weights=a))
    with pytest.raises(DegenerateNullspace):
        graph_module.left_eigenvector(L, tol=1e-9)


# ==================== rank_defect ====================

def test_rank_defect_three_agent_graph(three_agent_laplacian):
    """Test rank defect of the three-agent graph."""
    assert graph_module.rank_defect(three_agent_laplacian, 1e-9) == 1


def test_rank_defect_zero_matrix():
    """Test rank defect of a zero matrix."""
    L = graph_module.build_laplacian(WeightedDigraph(weights=np.zeros((3, 3))))
    assert graph_module.rank_defect(L, 1e-9) == 3


def test_rank_defect_two_disjoint_cycles():
    """Test rank defect of two disjoint cycles."""
    a = np.zeros((4, 4))
    a[0, 1] = a[1, 0] = 1.0
    a[2, 3] = a[3, 2] = 2.0
    L = graph_module.build_laplacian(WeightedDigraph(weights=a))
    assert graph_module.rank_defect(L, 1e-9) == 2
    assert len(oracle_module.nullspace_bruteforce(L.entries)) == 2


def test_rank_defect_is_one_on_random_sc_graphs(rng):
    """Test rank defect on random SC graphs."""
    for _ in range(200):
        n = int(rng.integers(1, 7))
        L = graph_module.build_laplacian(make_random_sc_digraph(rng, n))
        assert graph_module.rank_defect(L) == 1


def test_rank_defect_counts_closed_components(rng):
    """Disjoint union of k strongly connected blocks has k zero eigenvalues."""
    for k in (2, 3):
        blocks = [make_random_sc_digraph(rng, int(rng.integers(2, 4))).weights for _ in range(k)]
        size = sum(b.shape[0] for b in blocks)
        a = np.zeros((size, size))
        offset = 0
        for b in blocks:
            m = b.shape[0]
            a[offset:offset + m, offset:offset + m] = b
            offset += m
        L = graph_module.build_laplacian(WeightedDigraph(weights=a))
        assert graph_module.rank_defect(L) == k


def test_sc_spectrum_has_positive_real_parts(rng):
    """Test nonzero eigenvalues of SC Laplacians lie in the right half-plane."""
    for _ in range(50):
        L = graph_module.build_laplacian(make_random_sc_digraph(rng, int(rng.integers(2, 8))))
        eig = graph_module.laplacian_spectrum(L)
        assert abs(eig[0]) < 1e-9
        assert np.all(eig[1:].real > 1e-9)
