"""
Closed-form probabilities and expected rewards of the temporary-fork model.

A pool that has just mined a block keeps mining on it at once (last-block
effect) while every other pool waits out the propagation delay tau. A rival
block found inside that window forks the chain into two branches; the branch
whose next block leads by at least tau wins, and a tie is settled by a fair
coin. The losing block becomes an uncle paid theta * R.

All functions are pure and accept ``mode="exact"`` (the exponential race
formula) or ``mode="approx"`` (its first-order Taylor form).
"""

import math
from typing import List, Optional, Tuple

import numpy as np
from typing_extensions import Literal

from .errors import DomainError
from .params import BlockSizeModel, ForkRace, HashDistribution, NetworkParams

Mode = Literal["exact", "approx"]
MODES = ("exact", "approx")


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise DomainError(f"Unknown probability mode {mode!r}; expected one of {MODES}")


def propagation_delay(m: BlockSizeModel) -> float:
    """
    Return the propagation delay s / (gamma * c) + beta * s in seconds.

    Args:
        m: Block-size model (validated at construction)
    """
    return m.delay()


def prob_concurrent_block(p: NetworkParams) -> float:
    """Return 1 - exp(-lambda * tau), the chance of a second block within the delay."""
    return p.p_delta


def prob_fork_after(i: int, x: HashDistribution, p: NetworkParams) -> float:
    """
    Probability that a fork follows a block mined by pool i.

    Only the other pools can produce the competing block, so the result is
    (1 - x_i) * (1 - exp(-lambda * tau)).

    Raises:
        DomainError: If i is not a pool index
    """
    x.check_index(i)
    return (1.0 - x[i]) * p.p_delta


def prob_no_fork(i: int, x: HashDistribution, p: NetworkParams) -> float:
    """Probability that pool i's block is extended without a fork."""
    return 1.0 - prob_fork_after(i, x, p)


def race_win_probabilities(race: ForkRace, p: NetworkParams) -> Tuple[float, float, float]:
    """
    Outcome probabilities of the next period of a two-branch race.

    Returns:
        Tuple[float, float, float]: (initiator branch wins, rival branch wins, tie)
    """
    lt = p.lambda_tau
    p_c1 = race.eta2 * math.exp(-lt * race.eta1)
    p_c2 = race.eta1 * math.exp(-lt * race.eta2)
    p_tie = max(0.0, 1.0 - p_c1 - p_c2)
    return p_c1, p_c2, p_tie


def _pair_fail_matrix(shares: np.ndarray, lambda_tau: float, mode: str) -> np.ndarray:
    """Matrix F[i, j]: chance that initiator i loses a race against rival j."""
    xi = shares[:, None]
    xj = shares[None, :]
    eta1 = (1.0 - xi + xj) / 2.0
    if mode == "approx":
        return eta1
    eta2 = (1.0 + xi - xj) / 2.0
    return 0.5 * (1.0 + eta1 * np.exp(-lambda_tau * eta2) - eta2 * np.exp(-lambda_tau * eta1))


def uncle_vector(shares: np.ndarray, lambda_tau: float, mode: str = "exact") -> np.ndarray:
    """
    Uncle probabilities of every pool for a raw share vector.

    P_uncle_i = P_fork_i * P_fail_i collapses to (1 - exp(-lambda tau)) times
    the sum over rivals j != i of x_j * F[i, j], so no division by 1 - x_i is
    needed and a monopoly gets 0.

    Args:
        shares: Hash fractions (need not be validated; used inside ODE steps)
        lambda_tau: lambda * tau
        mode: "exact" or "approx"

    Returns:
        np.ndarray: P_uncle_i for each pool
    """
    _check_mode(mode)
    shares = np.asarray(shares, dtype=float)
    if shares.size < 2 or lambda_tau == 0.0:
        return np.zeros_like(shares)
    weighted = shares[None, :] * _pair_fail_matrix(shares, lambda_tau, mode)
    np.fill_diagonal(weighted, 0.0)
    return -math.expm1(-lambda_tau) * weighted.sum(axis=1)


def prob_fail(i: int, x: HashDistribution, p: NetworkParams, mode: Mode = "exact") -> float:
    """
    Probability that pool i's block loses the race, given that a fork happened.

    The rival is pool j with probability x_j / (1 - x_i). In exact mode a race
    against j is lost with probability 0.5 * (1 + eta1 e^{-lambda tau eta2} -
    eta2 e^{-lambda tau eta1}); approx mode replaces it with eta1.

    Raises:
        DomainError: If M < 2 or x_i = 1 (no possible rival)
    """
    _check_mode(mode)
    x.check_index(i)
    if x.size < 2:
        raise DomainError("Fail probability needs at least two pools")
    rest = 1.0 - x[i]
    if rest <= 0.0:
        raise DomainError(f"Pool {i} holds all hash power; no rival can fork it")

    fails = _pair_fail_matrix(x.shares, p.lambda_tau, mode)[i]
    total = 0.0
    for j in range(x.size):
        if j != i:
            total += x[j] / rest * float(fails[j])
    return min(1.0, max(0.0, total))


def prob_uncle(i: int, x: HashDistribution, p: NetworkParams, mode: Mode = "exact") -> float:
    """
    Probability that a block mined by pool i ends up stale.

    Returns 0 for a single-pool network and for a pool holding all hash power.
    """
    _check_mode(mode)
    x.check_index(i)
    if x.size < 2 or x[i] >= 1.0:
        return 0.0
    return prob_fork_after(i, x, p) * prob_fail(i, x, p, mode)


def uncle_probabilities(x: HashDistribution, p: NetworkParams, mode: Mode = "exact") -> List[float]:
    """Uncle probability of every pool, in pool order."""
    return [float(v) for v in uncle_vector(x.shares, p.lambda_tau, mode)]


def fail_probabilities(
    x: HashDistribution, p: NetworkParams, mode: Mode = "exact"
) -> List[Optional[float]]:
    """
    Fail probability of every pool, in pool order.

    A pool holding all hash power has no rival and gets None.

    Raises:
        DomainError: If M < 2
    """
    _check_mode(mode)
    if x.size < 2:
        raise DomainError("Fail probability needs at least two pools")
    weighted = x.shares[None, :] * _pair_fail_matrix(x.shares, p.lambda_tau, mode)
    np.fill_diagonal(weighted, 0.0)
    rest = 1.0 - x.shares
    fails: List[Optional[float]] = []
    for total, free in zip(weighted.sum(axis=1).tolist(), rest.tolist()):
        fails.append(min(1.0, max(0.0, total / free)) if free > 0.0 else None)
    return fails


def expected_reward(i: int, x: HashDistribution, p: NetworkParams, mode: Mode = "exact") -> float:
    """Expected reward per block period, x_i * R * (1 - (1 - theta) * P_uncle_i)."""
    uncle = prob_uncle(i, x, p, mode)
    return x[i] * p.reward * (1.0 - (1.0 - p.theta) * uncle)


def reward_ratio(i: int, x: HashDistribution, p: NetworkParams, mode: Mode = "exact") -> float:
    """
    Expected reward normalized by the fork-free reward x_i * R.

    Raises:
        DomainError: If pool i has no hash power
    """
    x.check_index(i)
    if x[i] <= 0.0:
        raise DomainError(f"Reward ratio undefined for pool {i} with zero hash fraction")
    return 1.0 - (1.0 - p.theta) * prob_uncle(i, x, p, mode)


def reward_ratios(x: HashDistribution, p: NetworkParams, mode: Mode = "exact") -> List[float]:
    """
    Reward ratio of every pool.

    Raises:
        DomainError: If any pool has zero hash fraction
    """
    if np.any(x.shares <= 0.0):
        raise DomainError("Reward ratios need every pool to hold a positive hash fraction")
    uncle = uncle_vector(x.shares, p.lambda_tau, mode)
    return [float(v) for v in 1.0 - (1.0 - p.theta) * uncle]


def prob_single_rival_branch(lambda_tau: float) -> float:
    """
    Probability that exactly one competing block appears, given at least one.

    Equals lambda_tau * e^{-lambda_tau} / (1 - e^{-lambda_tau}), with the
    limit 1 at lambda_tau = 0.

    Raises:
        DomainError: If lambda_tau is negative
    """
    if lambda_tau < 0:
        raise DomainError(f"lambda * tau must be non-negative, got {lambda_tau}")
    if lambda_tau == 0.0:
        return 1.0
    return lambda_tau * math.exp(-lambda_tau) / -math.expm1(-lambda_tau)
