import os

# Keep test runs from writing log files; must happen before settings load
os.environ.setdefault("LOG_TO_FILE", "false")

import numpy as np
import pytest

from nlconsensus.models.graph_models import WeightedDigraph
from nlconsensus.models.state import SimulationConfig
from nlconsensus.modules.graph import graph_module
from nlconsensus.modules.oracle import oracle_module
from nlconsensus.modules.protocol import protocol_module

THREE_AGENT_XI = np.array([0.25, 0.25, 0.5])


@pytest.fixture
def three_agent_graph():
    return graph_module.three_agent_graph()


@pytest.fixture
def three_agent_laplacian(three_agent_graph):
    return graph_module.build_laplacian(three_agent_graph)


@pytest.fixture
def three_agent_xi(three_agent_laplacian):
    return graph_module.left_eigenvector(three_agent_laplacian)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def make_random_digraph(rng, n, p=0.4, weights=(1.0, 2.0, 3.0)):
    """Random support with edge probability p; weights drawn from the given set."""
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    values = rng.choice(np.asarray(weights), size=(n, n))
    return WeightedDigraph(weights=np.where(mask, values, 0.0))


def make_random_sc_digraph(rng, n, p=0.3, low=1.0, high=3.0, integer=True):
    """Random digraph made strongly connected by threading a random Hamiltonian cycle through it."""
    mask = rng.random((n, n)) < p
    order = rng.permutation(n)
    for k in range(n):
        mask[order[(k + 1) % n], order[k]] = True
    np.fill_diagonal(mask, False)
    if integer:
        values = rng.integers(int(low), int(high) + 1, size=(n, n)).astype(float)
    else:
        values = rng.uniform(low, high, size=(n, n))
    return WeightedDigraph(weights=np.where(mask, values, 0.0))


def make_random_monotone_protocol(rng):
    if rng.random() < 0.5:
        return protocol_module.linear(float(rng.uniform(1.0, 2.0)))
    return protocol_module.linear_plus_sine(float(rng.uniform(1.5, 2.0)))


@pytest.fixture
def random_digraph(rng):
    def factory(n, p=0.4):
        return make_random_digraph(rng, n, p=p, weights=(1.0, 2.0, 3.0))
    return factory


@pytest.fixture
def random_sc_digraph(rng):
    def factory(n, **kwargs):
        return make_random_sc_digraph(rng, n, **kwargs)
    return factory


@pytest.fixture
def fast_config():
    return SimulationConfig(dt=1e-2, t_max=20.0, consensus_tol=1e-6, record_every=5, integrator="rk4")


@pytest.fixture
def tmp_out(tmp_path):
    out = tmp_path / "out"
    out.mkdir()
    return out


def max_gap_to_fine_euler(traj, L, p, dt_fine=1e-5):
    """Largest |RK4 - Euler| over every recorded sample, Euler chained sample to sample."""
    ref = traj.states[0]
    gap = 0.0
    for k in range(1, len(traj)):
        ref = oracle_module.euler_reference(L, p, ref, dt_fine, float(traj.times[k] - traj.times[k - 1]))
        gap = max(gap, float(np.max(np.abs(traj.states[k] - ref))))
    return gap
