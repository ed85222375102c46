"""
Tests for RK4 integration of the replicator dynamics.
"""

import csv
import io

import numpy as np
import pytest

from forkpool_evolution.integrator import CALM_STEPS, Trajectory, integrate
from forkpool_evolution.market import PoolMarket, PopulationState
from forkpool_model.errors import DomainError
from forkpool_model.params import NetworkParams


@pytest.fixture
def two_pools():
    """Two-pool market with omega = [30, 20]."""
    return PoolMarket([30, 20], 5000, unit_cost=0.01)


@pytest.fixture
def four_pools():
    """Four-pool market with strictly decreasing specifications."""
    return PoolMarket([40, 30, 20, 10], 5000, unit_cost=0.015)


def network(tau=0.5, theta=0.0, reward=1200):
    return NetworkParams(lam=0.1, tau=tau, reward=reward, theta=theta)


START = PopulationState([0.6, 0.4])


def test_integrate_validation(two_pools):
    """Test integrator argument checks."""
    with pytest.raises(DomainError, match="Step"):
        integrate(START, two_pools, network(), step=0.0)
    with pytest.raises(DomainError, match="t_max"):
        integrate(START, two_pools, network(), t_max=-1.0)
    with pytest.raises(DomainError, match="sample_every"):
        integrate(START, two_pools, network(), sample_every=0)
    with pytest.raises(DomainError, match="entries"):
        integrate(PopulationState.uniform(3), two_pools, network())


def test_vertex_is_constant(two_pools):
    """Test that a vertex start never moves and converges immediately."""
    traj = integrate(PopulationState.vertex(1, 2), two_pools, network(), step=0.1, t_max=100.0)
    assert traj.converged
    assert traj.steps == CALM_STEPS
    assert traj.residual == 0.0
    assert all(row.tolist() == [0.0, 1.0] for row in traj.states)
    assert traj.terminal == PopulationState.vertex(1, 2)


def test_trajectory_sampling(two_pools):
    """Test sample times and the t_max stop."""
    traj = integrate(START, two_pools, network(), step=0.5, t_max=100.0, sample_every=40)
    assert not traj.converged
    assert traj.steps == 200
    assert traj.times.tolist() == [0.0, 20.0, 40.0, 60.0, 80.0, 100.0]
    assert traj.states[0].tolist() == [0.6, 0.4]
    assert traj.final_time == 100.0
    assert len(traj.state_list()) == 6

    sparse = integrate(START, two_pools, network(), step=0.5, t_max=10.0, sample_every=None)
    assert sparse.times.tolist() == [0.0, 10.0]


def test_simplex_preserved(four_pools):
    """Test that every state stays on the simplex."""
    traj = integrate(
        PopulationState([0.7, 0.1, 0.1, 0.1]), four_pools, network(tau=10.0, reward=1500),
        step=0.5, t_max=2000.0, sample_every=10,
    )
    assert np.all(traj.states >= 0.0)
    assert np.all(np.abs(traj.states.sum(axis=1) - 1.0) <= 1e-9)
    assert np.all(np.diff(traj.times) > 0)


def test_faces_are_invariant(four_pools):
    """Test that an empty pool stays empty."""
    traj = integrate(
        PopulationState([0.5, 0.0, 0.3, 0.2]), four_pools, network(tau=3.0, reward=1500),
        step=0.5, t_max=500.0, sample_every=1,
    )
    assert np.all(traj.states[:, 1] == 0.0)


@pytest.mark.parametrize("mode", ["exact", "approx"])
def test_small_spec_pool_dominates_with_delay(two_pools, mode):
    """Test that the smaller-spec pool wins most miners under forks."""
    traj = integrate(START, two_pools, network(tau=0.5), mode=mode, step=0.5, t_max=1e4)
    assert traj.terminal[1] > 0.65


def test_uncle_compensated_interior_state(two_pools):
    """Test convergence to (R - omega_2 p N) / (p N (omega_1 - omega_2))."""
    traj = integrate(START, two_pools, network(theta=1 - 1e-9), step=0.5, t_max=1e4, eps_converge=1e-10)
    assert traj.converged
    assert traj.terminal[0] == pytest.approx(0.4, abs=1e-3)


def test_step_halving(two_pools):
    """Test that halving the step barely moves the terminal state."""
    coarse = integrate(START, two_pools, network(), step=0.5, t_max=1e4, eps_converge=1e-10)
    fine = integrate(START, two_pools, network(), step=0.25, t_max=1e4, eps_converge=1e-10)
    assert coarse.converged and fine.converged
    assert coarse.terminal.distance(fine.terminal) < 1e-6


@pytest.mark.parametrize("size", [2, 3, 4])
def test_equal_spec_larger_pool_takes_over(size):
    """Test that with equal specifications the initially larger pool absorbs everyone."""
    market = PoolMarket([10] * size, 5000, unit_cost=0.001)
    p = network(tau=5.0, reward=12000)
    rng = np.random.default_rng(100 + size)
    runs = 0
    while runs < 20:
        r0 = rng.dirichlet(np.ones(size))
        ranked = np.sort(r0)[::-1]
        if ranked[0] - ranked[1] < 0.05:
            continue
        traj = integrate(PopulationState(r0), market, p, step=0.5, t_max=1e4)
        assert traj.converged
        assert traj.terminal[int(np.argmax(r0))] > 0.999
        runs += 1


def test_trajectory_serialization(two_pools):
    """Test JSON-ready dict and CSV output."""
    traj = integrate(START, two_pools, network(), step=0.5, t_max=5.0, sample_every=5)
    data = traj.to_dict()
    assert data["times"] == [0.0, 2.5, 5.0]
    assert data["terminal"] == traj.states[-1].tolist()
    assert data["converged"] is False
    assert data["steps"] == 10

    rows = list(csv.reader(io.StringIO(traj.to_csv())))
    assert rows[0] == ["t", "r_1", "r_2"]
    assert len(rows) == 4
    assert float(rows[-1][0]) == 5.0
    assert float(rows[-1][1]) == traj.terminal[0]
    assert "Trajectory(samples=3" in repr(traj)


def test_trajectory_constructor():
    """Test that a hand-built trajectory exposes its terminal state."""
    traj = Trajectory(np.array([0.0, 1.0]), np.array([[0.5, 0.5], [0.25, 0.75]]), True, 0.0, 1)
    assert traj.terminal.to_list() == [0.25, 0.75]
