"""
Tests for Jacobian minors, manifold sampling and invasion checks.
"""

import numpy as np
import pytest

from forkpool_equilibrium.classifier import two_pool_ess, two_pool_ess_limit
from forkpool_equilibrium.stability import (
    basin_probe,
    default_invaders,
    finite_difference_jacobian,
    invasion_test,
    jacobian_minors,
    leading_minors,
    reduced_jacobian,
    sample_manifold_points,
)
from forkpool_evolution.integrator import integrate
from forkpool_evolution.market import PoolMarket, PopulationState
from forkpool_model.errors import DomainError
from forkpool_model.params import NetworkParams


@pytest.fixture
def two_pools():
    """Two-pool market with omega = [30, 20]."""
    return PoolMarket([30, 20], 5000, unit_cost=0.01)


@pytest.fixture
def four_pools():
    """Four-pool market with omega = [40, 30, 20, 10]."""
    return PoolMarket([40, 30, 20, 10], 5000, unit_cost=0.015)


def network(tau=0.5, theta=1.0, reward=1500):
    return NetworkParams(lam=0.1, tau=tau, reward=reward, theta=theta)


def test_sample_manifold_points(four_pools):
    """Test that sampled points are interior and on the manifold."""
    points = sample_manifold_points(four_pools, network(), 50, seed=3)
    assert len(points) == 50
    for r in points:
        assert r.is_interior()
        assert r.weighted_hash(four_pools) == pytest.approx(20.0, abs=1e-9)
    assert sample_manifold_points(four_pools, network(), 5, seed=3)[0] == points[0]


def test_sample_manifold_points_errors(four_pools):
    """Test manifold sampling preconditions."""
    with pytest.raises(DomainError, match="strictly between"):
        sample_manifold_points(four_pools, network(reward=6000), 5)
    with pytest.raises(DomainError, match="fork penalty"):
        sample_manifold_points(four_pools, network(theta=0.0), 5)


def test_jacobian_minors_four_pools(four_pools):
    """Test the rank-one minor pattern on the four-pool manifold."""
    r = PopulationState([0.1, 0.2, 0.3, 0.4])
    report = jacobian_minors(r, four_pools, network())
    assert report.minors[0] == pytest.approx(0.015 * 0.1 * (1 - 2) * 30)
    assert report.minors[1:] == [0.0, 0.0]
    assert not report.negative_definite
    assert report.transverse_eigenvalue < 0
    assert report.transversally_stable
    assert report.stability == "lyapunov_stable"

    minors, negative_definite = report
    assert minors == report.minors
    assert negative_definite is False


def test_transverse_eigenvalue_is_trace(four_pools):
    """Test that the transverse eigenvalue equals the Jacobian trace."""
    for r in sample_manifold_points(four_pools, network(), 10, seed=5):
        report = jacobian_minors(r, four_pools, network())
        assert report.transverse_eigenvalue == pytest.approx(np.trace(report.jacobian), rel=1e-9)
        assert np.linalg.matrix_rank(report.jacobian) == 1


def test_jacobian_minors_two_pools(two_pools):
    """Test the single minor of the two-pool manifold point."""
    p = NetworkParams(lam=0.1, tau=0.5, reward=1200, theta=1.0)
    report = jacobian_minors(PopulationState([0.4, 0.6]), two_pools, p)
    assert report.minors == pytest.approx([(1200 - 1000) * (1200 - 1500) / (5000 * 1200)])
    assert report.minors[0] == pytest.approx(-0.01)
    assert report.negative_definite
    assert report.stability == "asymptotically_stable"


def test_jacobian_minors_preconditions(four_pools):
    """Test the manifold and regime checks."""
    with pytest.raises(DomainError, match="off the NSS manifold"):
        jacobian_minors(PopulationState.uniform(4), four_pools, network())
    with pytest.raises(DomainError, match="fork penalty"):
        jacobian_minors(PopulationState([0.1, 0.2, 0.3, 0.4]), four_pools, network(theta=0.0))


def test_closed_form_matches_finite_differences(four_pools):
    """Test the closed-form Jacobian against central differences."""
    p = network()
    for r in sample_manifold_points(four_pools, p, 20, seed=7):
        closed = reduced_jacobian(r, four_pools, p)
        numeric = finite_difference_jacobian(r, four_pools, p, h=1e-6)
        assert numeric == pytest.approx(closed, abs=1e-8)

        report = jacobian_minors(r, four_pools, p)
        numeric_minors = leading_minors(numeric)
        assert numeric_minors[0] == pytest.approx(report.minors[0], rel=1e-4)
        assert numeric_minors[1:] == pytest.approx(report.minors[1:], abs=1e-8)
        assert report.minors[0] < 0


def test_minors_at_integrated_terminal(four_pools):
    """Test the minor report at the end of a four-pool trajectory."""
    p = network()
    traj = integrate(PopulationState([0.1, 0.2, 0.3, 0.4]), four_pools, p, step=0.5)
    report = jacobian_minors(traj.terminal, four_pools, p, tol=1e-6)
    assert report.minors[0] < 0
    assert report.transversally_stable


def test_default_invaders():
    """Test the default invader set."""
    invaders = default_invaders(3, count=10, seed=1)
    assert len(invaders) == 10
    assert invaders[:3] == [PopulationState.vertex(i, 3) for i in range(3)]
    assert invaders[3] == PopulationState.uniform(3)
    assert default_invaders(3, count=10, seed=1)[9] == invaders[9]


def test_invasion_confirms_fork_free_ess(two_pools):
    """Test that the closed-form two-pool ESS resists invasion."""
    p = NetworkParams(lam=0.1, tau=0.5, reward=1200, theta=1.0)
    r_star = two_pool_ess_limit(two_pools, p).state
    report = invasion_test(r_star, two_pools, p, epsilons=[0.01, 0.1, 0.4], invaders=default_invaders(2, 100))
    assert report.verdict == "ess_confirmed"
    assert report.min_margin > 0
    assert report.checked == 300


def test_invasion_confirms_delayed_ess(two_pools):
    """Test the cubic ESS under Taylor payoffs with the default grid."""
    p = NetworkParams(lam=0.1, tau=0.5, reward=1200, theta=0.0)
    r_star = two_pool_ess(two_pools, p).state
    assert invasion_test(r_star, two_pools, p, mode="approx").verdict == "ess_confirmed"


def test_invasion_confirms_delayed_ess_with_exact_payoffs(two_pools):
    """Test the cubic ESS against exact payoffs, the default of invasion_test."""
    p = NetworkParams(lam=0.1, tau=0.5, reward=1200, theta=0.0)
    r_star = two_pool_ess(two_pools, p).state
    assert r_star[0] == pytest.approx(0.31819764, abs=1e-7)
    report = invasion_test(r_star, two_pools, p)
    assert report.verdict == "ess_confirmed"
    assert report.min_margin > 0


def test_exact_dynamics_settle_next_to_cubic_ess(two_pools):
    """Test that the exact-payoff ODE rest point lies within 1e-4 of the Taylor cubic root."""
    p = NetworkParams(lam=0.1, tau=0.5, reward=1200, theta=0.0)
    r_star = two_pool_ess(two_pools, p).state
    traj = integrate(PopulationState([0.6, 0.4]), two_pools, p, step=0.5, eps_converge=1e-11)
    assert traj.terminal[0] == pytest.approx(0.31822224, abs=1e-5)
    assert traj.terminal.distance(r_star) < 1e-4


def test_invasion_on_manifold_is_neutral(four_pools):
    """Test that a manifold point is only neutrally stable against manifold invaders."""
    p = network()
    incumbent, invader = sample_manifold_points(four_pools, p, 2, seed=9)
    report = invasion_test(incumbent, four_pools, p, invaders=[invader])
    assert report.verdict == "nss_confirmed"
    assert report.zero_pairs == 5

    assert invasion_test(incumbent, four_pools, p).verdict == "nss_confirmed"


def test_invasion_refutes_non_equilibrium(two_pools):
    """Test that a state away from the ESS is invaded."""
    p = NetworkParams(lam=0.1, tau=0.5, reward=1200, theta=1.0)
    report = invasion_test(PopulationState([0.9, 0.1]), two_pools, p)
    assert report.verdict == "refuted"
    assert report.witness["margin"] < 0
    assert set(report.witness) == {"epsilon", "invader", "margin"}

    rng = np.random.default_rng(21)
    states = [r for r in rng.uniform(0, 1, size=60) if abs(r - 0.4) > 0.05][:20]
    assert len(states) == 20
    for r1 in states:
        assert invasion_test(PopulationState([r1, 1 - r1]), two_pools, p).verdict == "refuted"


def test_invasion_never_refutes_certified_points(four_pools):
    """Test that manifold points with stable minors are not invaded."""
    p = network()
    for r in sample_manifold_points(four_pools, p, 5, seed=13):
        assert jacobian_minors(r, four_pools, p).transversally_stable
        assert invasion_test(r, four_pools, p, invaders=default_invaders(4, 40)).verdict != "refuted"


def test_invasion_errors(two_pools):
    """Test invasion argument checks."""
    p = network()
    with pytest.raises(DomainError, match="Invading share"):
        invasion_test(PopulationState([0.4, 0.6]), two_pools, p, epsilons=[0.0])
    with pytest.raises(DomainError, match="entries"):
        invasion_test(PopulationState.uniform(3), two_pools, p)


def test_ess_attracts_nearby_starts(two_pools):
    """Test that starts within L1 distance 0.05 return to the ESS."""
    p = NetworkParams(lam=0.1, tau=0.5, reward=1200, theta=0.0)
    r_star = two_pool_ess(two_pools, p).state
    starts = [PopulationState([r_star[0] + d, r_star[1] - d]) for d in (-0.025, -0.01, 0.01, 0.025)]
    for start in starts:
        traj = integrate(start, two_pools, p, mode="approx", step=0.5, eps_converge=1e-10)
        assert traj.terminal.distance(r_star) < 1e-3


def test_ess_attracts_nearby_starts_with_exact_payoffs(two_pools):
    """Test that exact-payoff trajectories from within L1 distance 0.05 return to the ESS."""
    p = NetworkParams(lam=0.1, tau=0.5, reward=1200, theta=0.0)
    r_star = two_pool_ess(two_pools, p).state
    for d in (-0.025, -0.01, 0.01, 0.025):
        start = PopulationState([r_star[0] + d, r_star[1] - d])
        traj = integrate(start, two_pools, p, step=0.5, eps_converge=1e-10)
        assert traj.terminal.distance(r_star) < 1e-3


def test_basin_probe(two_pools):
    """Test basin probing between two candidate vertices."""
    p = NetworkParams(lam=0.1, tau=5.0, reward=1200, theta=0.0)
    candidates = [PopulationState([1.0, 0.0]), PopulationState([0.0, 1.0])]
    hits = basin_probe(candidates, two_pools, p, [PopulationState([0.6, 0.4])], step=0.5)
    assert hits == [([0.6, 0.4], 0)]
