"""
Miner payoffs and replicator dynamics over mining-pool populations.

A miner in pool i earns its share of the pool's expected reward minus the
cost of the hash power it provides:

    y_i = R x_i / (N r_i) * (1 - (1 - theta) P_uncle_i) - p omega_i

with hash fractions x_i = omega_i r_i / sum_j omega_j r_j. Since x_i / r_i =
omega_i / sum_j omega_j r_j, the payoff stays finite on faces of the simplex.
Pools then grow at rate r_i (y_i - y_bar).
"""

from typing import Sequence, Union

import numpy as np

from forkpool_model.errors import DomainError
from forkpool_model.fork_model import MODES, Mode, uncle_vector
from forkpool_model.params import HashDistribution, NetworkParams

from .market import PoolMarket, PopulationState

StateLike = Union[PopulationState, Sequence[float], np.ndarray]


def _as_array(r: StateLike) -> np.ndarray:
    if isinstance(r, PopulationState):
        return r.r
    return np.asarray(r, dtype=float)


class ReplicatorField:
    """
    Vector field of the replicator dynamics for fixed market and network.

    Holds the constants so the integrator evaluates the field without
    revalidating inputs at every stage.
    """

    def __init__(self, market: PoolMarket, params: NetworkParams, mode: Mode = "exact"):
        self.omega = np.asarray(market.omega, dtype=float)
        self.miners = market.miners
        self.unit_cost = market.unit_cost
        self.reward = params.reward
        self.theta = params.theta
        self.lambda_tau = params.lambda_tau
        if mode not in MODES:
            raise DomainError(f"Unknown probability mode {mode!r}; expected one of {MODES}")
        self.mode = mode

    def weighted_hash(self, r: np.ndarray) -> float:
        total = float(np.dot(self.omega, r))
        if total <= 0:
            raise DomainError("Population carries no hash power (sum of r_i * omega_i is zero)")
        return total

    def hash_shares(self, r: np.ndarray) -> np.ndarray:
        return self.omega * r / self.weighted_hash(r)

    def payoffs(self, r: np.ndarray) -> np.ndarray:
        total = self.weighted_hash(r)
        revenue = self.reward * self.omega / (self.miners * total)
        if self.theta < 1.0 and self.lambda_tau > 0.0:
            uncle = uncle_vector(self.omega * r / total, self.lambda_tau, self.mode)
            revenue = revenue * (1.0 - (1.0 - self.theta) * uncle)
        return revenue - self.unit_cost * self.omega

    def velocity(self, r: np.ndarray) -> np.ndarray:
        y = self.payoffs(r)
        y_bar = float(np.dot(r, y)) / float(r.sum())
        return r * (y - y_bar)

    __call__ = velocity


def hash_fraction(r: StateLike, m: PoolMarket) -> HashDistribution:
    """
    Hash fractions x_i = omega_i r_i / sum_j omega_j r_j.

    Raises:
        DomainError: If the weighted population is zero or sizes differ
    """
    arr = _as_array(r)
    if arr.size != m.size:
        raise DomainError(f"Population has {arr.size} entries for {m.size} pools")
    weighted = m.omega * arr
    total = float(weighted.sum())
    if total <= 0:
        raise DomainError("Population carries no hash power (sum of r_i * omega_i is zero)")
    return HashDistribution.from_hash_rates(weighted)


def payoff_vector(r: StateLike, m: PoolMarket, p: NetworkParams, mode: Mode = "exact") -> np.ndarray:
    """Per-miner payoff of every pool, including empty ones."""
    arr = _as_array(r)
    if arr.size != m.size:
        raise DomainError(f"Population has {arr.size} entries for {m.size} pools")
    return ReplicatorField(m, p, mode).payoffs(arr)


def miner_payoff(i: int, r: StateLike, m: PoolMarket, p: NetworkParams, mode: Mode = "exact") -> float:
    """
    Expected payoff of a miner in pool i.

    Raises:
        DomainError: If pool i is empty
    """
    arr = _as_array(r)
    if not 0 <= i < arr.size:
        raise DomainError(f"Pool index {i} out of range for {arr.size} pools")
    if arr[i] <= 0:
        raise DomainError(f"Payoff of empty pool {i} is undefined")
    return float(payoff_vector(arr, m, p, mode)[i])


def replicator_rhs(r: StateLike, m: PoolMarket, p: NetworkParams, mode: Mode = "exact") -> np.ndarray:
    """
    Replicator velocity r_i (y_i - y_bar), with y_bar = sum_k r_k y_k.

    Empty pools get zero velocity and the components sum to zero.
    """
    arr = _as_array(r)
    if arr.size != m.size:
        raise DomainError(f"Population has {arr.size} entries for {m.size} pools")
    return ReplicatorField(m, p, mode).velocity(arr)
