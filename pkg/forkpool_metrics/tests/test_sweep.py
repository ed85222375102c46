"""
Tests for (tau, theta) sweeps.
"""

import csv
import io

import pytest

from forkpool_evolution.market import PoolMarket, PopulationState
from forkpool_metrics.sweep import (
    SweepRow,
    SweepSpec,
    csv_header,
    dominance_threshold,
    evaluate_point,
    sweep,
    to_csv,
)
from forkpool_model.errors import DomainError
from forkpool_model.params import NetworkParams

FAST_ODE = {"step": 0.5, "t_max": 1e4, "eps_converge": 1e-10}


@pytest.fixture
def two_pools():
    """Two-pool market with omega = [30, 20]."""
    return PoolMarket([30, 20], 5000, unit_cost=0.01)


@pytest.fixture
def base():
    """Network with lambda = 0.1 and R = 1200."""
    return NetworkParams(lam=0.1, tau=0.5, reward=1200)


def make_spec(market, params, taus, thetas, **kwargs):
    kwargs.setdefault("ode_options", FAST_ODE)
    kwargs.setdefault("r0", PopulationState([0.6, 0.4]))
    return SweepSpec(market, params, taus, thetas, **kwargs)


def test_sweep_spec_validation(two_pools, base):
    """Test sweep grid checks."""
    with pytest.raises(DomainError, match="empty"):
        SweepSpec(two_pools, base, [], [0.0])
    with pytest.raises(DomainError, match="non-negative"):
        SweepSpec(two_pools, base, [-1.0], [0.0])
    with pytest.raises(DomainError, match="uncle fraction"):
        SweepSpec(two_pools, base, [0.5], [1.5])
    with pytest.raises(DomainError, match="sweep method"):
        SweepSpec(two_pools, base, [0.5], [0.0], method="bisect")
    with pytest.raises(DomainError, match="entries"):
        SweepSpec(two_pools, base, [0.5], [0.0], r0=PopulationState.uniform(3))
    with pytest.raises(DomainError, match="workers"):
        SweepSpec(two_pools, base, [0.5], [0.0], workers=0)


def test_sweep_spec_defaults(two_pools, base):
    """Test method aliases and default start."""
    spec = SweepSpec(two_pools, base, [0.5, 1.0], [0.0, 1.0], method="ode_integration")
    assert spec.method == "ode"
    assert spec.r0 == PopulationState([0.5, 0.5])
    assert spec.points() == [(0.5, 0.0), (0.5, 1.0), (1.0, 0.0), (1.0, 1.0)]
    assert spec.to_dict()["ode_options"]["step"] == 0.1


def test_sweep_rows_are_tau_major(two_pools, base):
    """Test row order."""
    rows = sweep(make_spec(two_pools, base, [0.1, 0.5], [0.0, 1.0]))
    assert [(row.tau, row.theta) for row in rows] == [(0.1, 0.0), (0.1, 1.0), (0.5, 0.0), (0.5, 1.0)]
    assert all(row.method == "analytic" and row.status == "ok" for row in rows)


def test_uncle_compensated_rows_ignore_delay(two_pools, base):
    """Test that with theta = 1 the terminal Gini does not depend on tau."""
    taus = [0.0, 0.5, 2.0, 10.0]
    for method in ("analytic", "ode"):
        rows = sweep(make_spec(two_pools, base, taus, [1.0], method=method))
        assert len({row.gini for row in rows}) == 1
        assert rows[0].r == pytest.approx([0.4, 0.6], abs=1e-3)


def test_zero_delay_matches_uncle_compensation(two_pools, base):
    """Test that the tau = 0 column equals the theta = 1 behavior."""
    rows = sweep(make_spec(two_pools, base, [0.0, 3.0], [0.0, 0.5, 1.0], method="ode"))
    zero_delay = [row for row in rows if row.tau == 0.0]
    compensated = [row for row in rows if row.theta == 1.0]
    assert {tuple(row.r) for row in zero_delay} == {tuple(compensated[0].r)}
    assert {row.gini for row in zero_delay + compensated} == {compensated[0].gini}


def test_dominating_pool_flips_with_delay(two_pools, base):
    """Test that longer delays hand the majority to the large-spec pool."""
    rows = sweep(make_spec(two_pools, base, [0.1, 0.5, 5.0], [0.0], method="ode"))
    assert [row.dominant for row in rows] == [1, 1, 0]
    assert dominance_threshold(rows, 0.0) == 5.0
    assert dominance_threshold(rows, 1.0) is None


def test_analytic_bistable_point_falls_back(two_pools, base):
    """Test that a bistable grid point is integrated and flagged."""
    row = evaluate_point(make_spec(two_pools, base, [5.0], [0.0]), 5.0, 0.0)
    assert row.status == "ode_fallback"
    assert row.r[0] > 0.999


def test_manifold_and_error_rows(base):
    """Test rows without a single terminal state."""
    market = PoolMarket([40, 30, 20, 10], 5000, unit_cost=0.015)
    params = NetworkParams(lam=0.1, tau=0.5, reward=1500)
    spec = make_spec(market, params, [0.5], [1.0], r0=PopulationState.uniform(4))
    [row] = sweep(spec)
    assert row.status == "nss_manifold"
    assert row.r is None and row.gini is None
    assert "20" in row.detail

    market = PoolMarket([30, 20], 5000, unit_cost=0.01)
    broken = make_spec(market, base, [5.0], [0.0], ode_options={"step": -1.0})
    [failed] = sweep(broken)
    assert failed.status == "error"
    assert "Step must be positive" in failed.detail


def test_sweep_csv(two_pools, base):
    """Test the CSV layout, including blank cells."""
    rows = sweep(make_spec(two_pools, base, [0.1], [0.0, 1.0]))
    rows.append(SweepRow(1.0, 0.0, None, None, "analytic", "error", "boom"))
    table = list(csv.reader(io.StringIO(to_csv(rows, 2))))
    assert table[0] == csv_header(2) == ["tau", "theta", "r_1", "r_2", "gini", "method", "status"]
    assert len(table) == 4
    assert table[1][-2:] == ["analytic", "ok"]
    assert float(table[2][2]) == pytest.approx(0.4)
    assert table[3] == ["1.0", "0.0", "", "", "", "analytic", "error"]


def test_sweep_is_deterministic_across_workers(two_pools, base):
    """Test identical rows and CSV for repeated and parallel runs."""
    serial = sweep(make_spec(two_pools, base, [0.1, 0.5], [0.0, 0.5], method="ode"))
    again = sweep(make_spec(two_pools, base, [0.1, 0.5], [0.0, 0.5], method="ode"))
    parallel = sweep(make_spec(two_pools, base, [0.1, 0.5], [0.0, 0.5], method="ode", workers=2))
    assert serial == again == parallel
    assert to_csv(serial, 2) == to_csv(parallel, 2)
