import numpy as np
import pytest

from conftest import make_random_sc_digraph, max_gap_to_fine_euler
from nlconsensus.models.graph_models import WeightedDigraph
from nlconsensus.models.state import SimulationConfig
from nlconsensus.modules.dynamics import dynamics_module
from nlconsensus.modules.graph import graph_module
from nlconsensus.modules.oracle import oracle_module
from nlconsensus.modules.protocol import protocol_module


def test_reachability_three_agent_graph(three_agent_graph):
    """Test reachability on the three-agent graph."""
    reach = oracle_module.reachability(three_agent_graph)
    assert reach.strongly_connected
    assert reach.roots() == frozenset({0, 1, 2})


def test_reachability_follows_information_flow():
    """Test reachability direction."""
    # node 0 listens to node 1, node 1 listens to node 2
    g = WeightedDigraph(weights=[[0, 1, 0], [0, 0, 1], [0, 0, 0]])
    reach = oracle_module.reachability(g)
    assert reach.reach[0, 2]
    assert not reach.reach[2, 0]
    assert reach.roots() == frozenset({2})
    assert not reach.strongly_connected


def test_nullspace_bruteforce_known_matrices():
    """Test elimination null spaces."""
    basis = oracle_module.nullspace_bruteforce(np.array([[1.0, 2.0], [2.0, 4.0]]))
    assert len(basis) == 1
    v = basis[0]
    assert np.allclose(np.array([[1.0, 2.0], [2.0, 4.0]]) @ v, 0.0)

    assert oracle_module.nullspace_bruteforce(np.eye(3)) == []
    assert len(oracle_module.nullspace_bruteforce(np.zeros((3, 3)))) == 3


def test_nullspace_bruteforce_three_agent_laplacian(three_agent_laplacian):
    """Test left and right null spaces of the three-agent L."""
    right = oracle_module.nullspace_bruteforce(three_agent_laplacian.entries)
    left = oracle_module.nullspace_bruteforce(three_agent_laplacian.entries.T)
    assert len(right) == 1 and len(left) == 1
    assert np.allclose(right[0] / right[0][0], 1.0)
    assert np.allclose(left[0] / left[0].sum(), [0.25, 0.25, 0.5])


def test_euler_reference_converges_to_closed_form_linear():
    """Linear protocol with a 2x2 leader pair: x' = -(x - y), y fixed."""
    L = graph_module.build_laplacian(WeightedDigraph(weights=[[0, 1], [0, 0]]))
    x = oracle_module.euler_reference(L, protocol_module.linear(1.0), [0.0, 1.0], 1e-5, 1.0)
    assert x[1] == 1.0
    assert x[0] == pytest.approx(1.0 - np.exp(-1.0), abs=1e-5)


def test_rk4_agrees_with_fine_euler_on_random_instances(rng):
    """Test RK4 against fine Euler at every recorded sample."""
    cfg = SimulationConfig(dt=1e-3, t_max=0.1, consensus_tol=1e-12, record_every=10)
    for _ in range(60):
        n = int(rng.integers(2, 6))
        # Euler alone is off by O(dt_fine) on unit-scale weights; smaller weights keep it inside 1e-5
        g = make_random_sc_digraph(rng, n, low=0.05, high=0.2, integer=False)
        if rng.random() < 0.5:
            p = protocol_module.linear(float(rng.uniform(1.0, 1.5)))
        else:
            p = protocol_module.linear_plus_sine(float(rng.uniform(1.5, 2.0)))
        x0 = rng.uniform(-0.5, 0.5, size=n)
        traj = dynamics_module.simulate(g, p, x0, cfg)
        assert traj.times[-1] == pytest.approx(0.1)
        assert max_gap_to_fine_euler(traj, graph_module.build_laplacian(g), p) <= 1e-5


def test_case1_rk4_agrees_with_fine_euler(three_agent_graph, three_agent_laplacian):
    """Test the 2w + sin w run against fine Euler."""
    p = protocol_module.linear_plus_sine(2.0)
    cfg = SimulationConfig(dt=1e-3, t_max=2.0, consensus_tol=1e-12, record_every=100)
    traj = dynamics_module.simulate(three_agent_graph, p, [1.0, 2.0, 3.0], cfg)
    assert max_gap_to_fine_euler(traj, three_agent_laplacian, p) <= 1e-4
