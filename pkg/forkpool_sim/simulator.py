"""
Discrete-event Monte Carlo simulator of proof-of-work mining with temporary forks.

Each height is settled in one step: the first block goes to a pool drawn in
proportion to hash power. With probability 1 - exp(-lambda * tau) another
block lands inside the propagation window, mined by a pool again drawn in
proportion to hash power; if that pool is the one that found the first block
it simply extends its own block (last-block effect) and no fork happens.
Otherwise the two blocks race: non-combatant pools split between branches,
each branch draws the arrival time of its next block, and a branch wins once
its block leads by at least tau. Ties go to a coin flip or a fresh race.

Heights are processed in fixed-size vectorized chunks with a numpy PCG64
generator, so a given config and seed always produce the same report.
"""

import logging
import time
from typing import List

import numpy as np

from forkpool_model.errors import NumericalFailureError

from .config import SimConfig
from .report import PoolTally, SimEvents, SimReport

logger = logging.getLogger(__name__)

CHUNK_HEIGHTS = 1 << 16
MAX_RACE_ROUNDS = 10_000


def _draw_pools(rng: np.random.Generator, cdf: np.ndarray, n: int) -> np.ndarray:
    """Draw n pool indices in proportion to hash power."""
    picks = np.searchsorted(cdf, rng.random(n), side="right")
    return np.minimum(picks, cdf.size - 1)


def _initiator_shares(
    rng: np.random.Generator,
    shares: np.ndarray,
    initiator: np.ndarray,
    rival: np.ndarray,
    split_mode: str,
) -> np.ndarray:
    """Hash share mining on the initiator's branch for each fork."""
    if split_mode == "deterministic_half":
        return (1.0 + shares[initiator] - shares[rival]) / 2.0

    joins = rng.random((initiator.size, shares.size)) < 0.5
    contrib = np.where(joins, shares[None, :], 0.0)
    rows = np.arange(initiator.size)
    contrib[rows, initiator] = 0.0
    contrib[rows, rival] = 0.0
    return shares[initiator] + contrib.sum(axis=1)


def _run_races(
    rng: np.random.Generator,
    s1: np.ndarray,
    lam: float,
    tau: float,
    tie_mode: str,
) -> np.ndarray:
    """Return True where the initiator's branch wins."""
    s2 = np.maximum(1.0 - s1, 0.0)
    initiator_won = np.zeros(s1.size, dtype=bool)
    pending = np.arange(s1.size)

    for _ in range(MAX_RACE_ROUNDS):
        if pending.size == 0:
            return initiator_won
        with np.errstate(divide="ignore"):
            t1 = rng.standard_exponential(pending.size) / (lam * s1[pending])
            t2 = rng.standard_exponential(pending.size) / (lam * s2[pending])
        c1_wins = t2 >= t1 + tau
        c2_wins = t1 >= t2 + tau
        initiator_won[pending[c1_wins]] = True
        ties = pending[~(c1_wins | c2_wins)]

        if tie_mode == "coin_flip":
            initiator_won[ties] = rng.random(ties.size) < 0.5
            return initiator_won
        pending = ties

    raise NumericalFailureError(
        f"{pending.size} fork races still tied after {MAX_RACE_ROUNDS} rounds"
    )


def simulate(cfg: SimConfig, record_events: bool = False) -> SimReport:
    """
    Simulate cfg.horizon_blocks heights of mining.

    Args:
        cfg: Run configuration
        record_events: Keep the per-height event log for CSV export

    Returns:
        SimReport: Per-pool counters and totals
    """
    started = time.perf_counter()
    shares = np.asarray(cfg.x.shares, dtype=float)
    m = shares.size
    cdf = np.cumsum(shares)
    cdf[-1] = 1.0
    lam = cfg.params.lam
    tau = cfg.params.tau
    p_delta = cfg.params.p_delta
    theta = cfg.params.theta
    rng = np.random.Generator(np.random.PCG64(cfg.seed))

    counts = {name: np.zeros(m, dtype=np.int64) for name in PoolTally.FIELDS}
    fork_events = 0
    canonical_log: List[np.ndarray] = []
    fork_log: List[np.ndarray] = []

    done = 0
    while done < cfg.horizon_blocks:
        n = min(CHUNK_HEIGHTS, cfg.horizon_blocks - done)
        first = _draw_pools(rng, cdf, n)
        concurrent = rng.random(n) < p_delta
        second = _draw_pools(rng, cdf, n)

        forked = np.flatnonzero(concurrent & (second != first))
        initiator = first[forked]
        rival = second[forked]
        s1 = _initiator_shares(rng, shares, initiator, rival, cfg.split_mode)
        initiator_won = _run_races(rng, s1, lam, tau, cfg.tie_mode)

        canonical = first.copy()
        canonical[forked[~initiator_won]] = rival[~initiator_won]
        losers = np.where(initiator_won, rival, initiator)

        counts["blocks_initiated"] += np.bincount(first, minlength=m)
        counts["blocks_won"] += np.bincount(canonical, minlength=m)
        counts["uncles"] += np.bincount(losers, minlength=m)
        counts["forks_lost"] += np.bincount(losers, minlength=m)
        counts["forks_initiated"] += np.bincount(initiator, minlength=m)
        counts["forks_involved"] += np.bincount(initiator, minlength=m) + np.bincount(rival, minlength=m)
        counts["initiated_lost"] += np.bincount(initiator[~initiator_won], minlength=m)
        fork_events += int(forked.size)

        if record_events:
            canonical_log.append(canonical)
            fork_log.append(np.column_stack([forked + done, initiator, rival, initiator_won]))
        done += n

    pools = []
    for i in range(m):
        tally = PoolTally(**{name: int(counts[name][i]) for name in PoolTally.FIELDS})
        tally.reward = tally.blocks_won * cfg.params.reward + tally.uncles * theta * cfg.params.reward
        pools.append(tally)

    events = None
    if record_events:
        forks = np.concatenate(fork_log) if fork_log else np.zeros((0, 4), dtype=np.int64)
        forks = forks.astype(np.int64)
        events = SimEvents(
            canonical=np.concatenate(canonical_log),
            fork_heights=forks[:, 0],
            initiator=forks[:, 1],
            rival=forks[:, 2],
            initiator_won=forks[:, 3].astype(bool),
        )

    elapsed = time.perf_counter() - started
    logger.info(
        "Simulated %d blocks across %d pools: %d forks in %.2fs",
        cfg.horizon_blocks, m, fork_events, elapsed,
    )
    return SimReport(
        pools=pools,
        total_blocks=cfg.horizon_blocks,
        fork_events=fork_events,
        seed=cfg.seed,
        wall_time=elapsed,
        events=events,
    )
