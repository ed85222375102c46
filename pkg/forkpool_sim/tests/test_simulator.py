"""
Tests for the Monte Carlo mining simulator.
"""

import math

import numpy as np
import pytest

from forkpool_model.errors import DomainError
from forkpool_model.fork_model import uncle_probabilities
from forkpool_model.params import HashDistribution, NetworkParams
from forkpool_sim.config import SimConfig
from forkpool_sim.report import empirical_rates, initiator_uncle_rates
from forkpool_sim.simulator import simulate

ETHEREUM_SHARES = [0.33, 0.21, 0.11, 0.08, 0.04] + [0.0023] * 100


def params_for(lambda_tau, theta=0.0, reward=1.0, lam=0.1):
    return NetworkParams(lam=lam, tau=lambda_tau / lam, reward=reward, theta=theta)


def binomial_se(p, n):
    return math.sqrt(p * (1 - p) / n)


@pytest.fixture
def symmetric_config():
    """Two equal pools with 1 - exp(-lambda tau) = 0.2."""
    return SimConfig(
        params=params_for(math.log(1.25), reward=2.0, theta=0.5),
        x=HashDistribution([0.5, 0.5]),
        horizon_blocks=1_000_000,
        seed=20240601,
    )


def test_config_validation():
    """Test SimConfig invariants."""
    p = params_for(0.2)
    x = HashDistribution([0.5, 0.5])
    with pytest.raises(DomainError, match="horizon_blocks must be a positive integer"):
        SimConfig(p, x, horizon_blocks=0)
    with pytest.raises(DomainError, match="64-bit unsigned"):
        SimConfig(p, x, horizon_blocks=10, seed=-1)
    with pytest.raises(DomainError, match="64-bit unsigned"):
        SimConfig(p, x, horizon_blocks=10, seed=2 ** 64)
    with pytest.raises(DomainError, match="Unknown tie_mode"):
        SimConfig(p, x, horizon_blocks=10, tie_mode="coin")
    with pytest.raises(DomainError, match="Unknown split_mode"):
        SimConfig(p, x, horizon_blocks=10, split_mode="half")
    with pytest.raises(DomainError, match="pool names"):
        SimConfig(p, x, horizon_blocks=10, pool_names=["only_one"])


def test_monopoly_never_forks():
    """Test a single pool wins every block."""
    cfg = SimConfig(params_for(0.8, reward=3.0), HashDistribution([1.0]), horizon_blocks=1000)
    report = simulate(cfg)
    pool = report.pools[0]
    assert report.fork_events == 0
    assert pool.uncles == 0
    assert pool.blocks_won == 1000
    assert pool.reward == 3000.0
    assert empirical_rates(report) == [(0.0, 0.0, 0.0)]


def test_conservation_and_rewards():
    """Test block conservation and exact reward accounting."""
    cfg = SimConfig(
        params_for(0.6, theta=0.375, reward=8.0),
        HashDistribution([0.5, 0.3, 0.2]),
        horizon_blocks=50_000,
        seed=7,
        split_mode="random_per_pool",
    )
    report = simulate(cfg)
    assert sum(pool.blocks_won for pool in report.pools) == cfg.horizon_blocks
    assert sum(pool.blocks_initiated for pool in report.pools) == cfg.horizon_blocks
    assert sum(pool.uncles for pool in report.pools) == report.fork_events
    assert sum(pool.forks_initiated for pool in report.pools) == report.fork_events
    assert sum(pool.forks_involved for pool in report.pools) == 2 * report.fork_events
    assert report.fork_events <= report.total_blocks
    for pool in report.pools:
        assert pool.reward == pool.blocks_won * 8.0 + pool.uncles * 0.375 * 8.0
        assert pool.forks_lost == pool.uncles
        assert pool.initiated_lost <= pool.forks_initiated


def test_seed_determinism(symmetric_config):
    """Test identical configs produce identical reports."""
    cfg = SimConfig(symmetric_config.params, symmetric_config.x, horizon_blocks=200_000, seed=99)
    first = simulate(cfg)
    second = simulate(cfg)
    assert first.to_json() == second.to_json()

    other = simulate(SimConfig(cfg.params, cfg.x, horizon_blocks=200_000, seed=100))
    assert other.to_json() != first.to_json()


def test_event_log_does_not_change_results():
    """Test that recording events leaves the counters untouched."""
    cfg = SimConfig(params_for(0.4), HashDistribution([0.6, 0.4]), horizon_blocks=70_000, seed=3)
    plain = simulate(cfg)
    logged = simulate(cfg, record_events=True)
    assert plain.to_json() == logged.to_json()

    events = logged.events
    assert events.canonical.size == cfg.horizon_blocks
    assert events.fork_heights.size == logged.fork_events
    assert np.all(events.initiator != events.rival)
    assert np.all(np.diff(events.fork_heights) > 0)


def test_symmetric_uncle_rate_matches_closed_form(symmetric_config):
    """Test the initiator uncle rate against the closed-form value 0.05."""
    report = simulate(symmetric_config)
    expected = uncle_probabilities(symmetric_config.x, symmetric_config.params)
    assert expected == pytest.approx([0.05, 0.05])

    for pool, rate in zip(report.pools, initiator_uncle_rates(report)):
        se = binomial_se(0.05, pool.blocks_initiated)
        assert abs(rate - 0.05) <= 3 * se


def test_symmetric_pools_agree(symmetric_config):
    """Test the two symmetric pools have matching empirical rates."""
    report = simulate(symmetric_config)
    (u0, f0, l0), (u1, f1, l1) = empirical_rates(report)
    n0 = report.pools[0].blocks_mined
    n1 = report.pools[1].blocks_mined
    assert abs(u0 - u1) <= 3 * math.hypot(binomial_se(u0, n0), binomial_se(u1, n1))
    assert abs(f0 - f1) <= 3 * math.hypot(binomial_se(f0, n0), binomial_se(f1, n1))
    # each fork has exactly one loser among the two pools
    assert l0 + l1 == pytest.approx(1.0)
    assert abs(l0 - 0.5) <= 3 * binomial_se(0.5, report.fork_events)

    share = report.pools[0].blocks_won / report.total_blocks
    assert abs(share - 0.5) <= 3 * binomial_se(0.5, report.total_blocks)


def test_zero_delay_win_share():
    """Test canonical shares follow hash power when forks cannot happen."""
    shares = [0.5, 0.3, 0.15, 0.05]
    cfg = SimConfig(NetworkParams(lam=0.1, tau=0.0), HashDistribution(shares),
                    horizon_blocks=400_000, seed=11)
    report = simulate(cfg)
    assert report.fork_events == 0
    for pool, x in zip(report.pools, shares):
        assert pool.blocks_won == pool.blocks_initiated
        assert abs(pool.blocks_won / cfg.horizon_blocks - x) <= 3 * binomial_se(x, cfg.horizon_blocks)


def test_tie_mode_invariance_at_symmetry():
    """Test coin flips and repeated races give the same fail rate for equal pools."""
    p = params_for(1.0)
    x = HashDistribution([0.5, 0.5])
    coin = simulate(SimConfig(p, x, horizon_blocks=200_000, seed=5, tie_mode="coin_flip"))
    race = simulate(SimConfig(p, x, horizon_blocks=200_000, seed=6, tie_mode="recursive_race"))
    fail_coin = empirical_rates(coin)[0][2]
    fail_race = empirical_rates(race)[0][2]
    sigma = math.hypot(binomial_se(0.5, coin.fork_events), binomial_se(0.5, race.fork_events))
    assert abs(fail_coin - fail_race) < 3 * sigma


@pytest.mark.parametrize("lambda_tau", [0.05, 0.2, 1.0])
def test_ethereum_distribution_matches_closed_form(lambda_tau):
    """Test per-pool initiator uncle rates against the exact closed form."""
    x = HashDistribution(ETHEREUM_SHARES)
    cfg = SimConfig(params_for(lambda_tau), x, horizon_blocks=1_000_000, seed=2016)
    report = simulate(cfg)
    expected = uncle_probabilities(x, cfg.params, "exact")
    rates = initiator_uncle_rates(report)

    # the five named pools individually, the hundred identical small pools pooled
    for i in range(5):
        se = binomial_se(expected[i], report.pools[i].blocks_initiated)
        assert abs(rates[i] - expected[i]) <= 4 * se

    small = report.pools[5:]
    lost = sum(pool.initiated_lost for pool in small)
    started = sum(pool.blocks_initiated for pool in small)
    se = binomial_se(expected[5], started)
    assert abs(lost / started - expected[5]) <= 4 * se

    for i in range(5):
        share = report.pools[i].blocks_initiated / cfg.horizon_blocks
        assert abs(share - ETHEREUM_SHARES[i]) <= 4 * binomial_se(ETHEREUM_SHARES[i], cfg.horizon_blocks)
