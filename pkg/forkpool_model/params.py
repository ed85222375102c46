"""
Value objects for the temporary-fork model.

Holds the network parameters (block rate, propagation delay, reward, uncle
fraction), the hash-rate distribution over mining pools, and the two-branch
fork race between an initiating pool and its rival.
"""

import math
from typing import Any, Dict, Iterator, List, Optional, Sequence

import numpy as np

from .errors import DomainError

SIMPLEX_TOL = 1e-12


class BlockSizeModel:
    """
    Block-size decomposition of the propagation delay.

    The delay of a block of size s is s / (gamma * c) + beta * s: transmission
    over a network of scale gamma and bandwidth c plus verification at beta
    seconds per data unit.

    Attributes:
        size_s (float): Block size in data units (0 means an empty block)
        gamma (float): Network-scale factor
        bandwidth_c (float): Data units transmitted per second
        verify_beta (float): Verification seconds per data unit
    """

    def __init__(self, size_s: float, gamma: float, bandwidth_c: float, verify_beta: float = 0.0):
        if size_s < 0:
            raise DomainError(f"Block size must be non-negative, got {size_s}")
        if gamma <= 0:
            raise DomainError(f"Network-scale factor gamma must be positive, got {gamma}")
        if bandwidth_c <= 0:
            raise DomainError(f"Bandwidth must be positive, got {bandwidth_c}")
        if verify_beta < 0:
            raise DomainError(f"Verification coefficient must be non-negative, got {verify_beta}")

        self.size_s = float(size_s)
        self.gamma = float(gamma)
        self.bandwidth_c = float(bandwidth_c)
        self.verify_beta = float(verify_beta)

    def delay(self) -> float:
        """Return the propagation delay in seconds."""
        return self.size_s / (self.gamma * self.bandwidth_c) + self.verify_beta * self.size_s

    def to_dict(self) -> Dict[str, float]:
        return {
            "size": self.size_s,
            "gamma": self.gamma,
            "bandwidth": self.bandwidth_c,
            "verify_beta": self.verify_beta,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BlockSizeModel":
        return cls(
            size_s=data["size"],
            gamma=data["gamma"],
            bandwidth_c=data["bandwidth"],
            verify_beta=data.get("verify_beta", 0.0),
        )

    def __repr__(self) -> str:
        return (
            f"BlockSizeModel(size_s={self.size_s}, gamma={self.gamma}, "
            f"bandwidth_c={self.bandwidth_c}, verify_beta={self.verify_beta})"
        )


class NetworkParams:
    """
    Network-wide parameters of the fork model.

    Exactly one of ``tau`` and ``block_size`` must be given. The product
    lambda * tau and the concurrent-block probability 1 - exp(-lambda * tau)
    are computed once at construction.

    Attributes:
        lam (float): Block generation rate in blocks per second (1 / T)
        tau (float): Propagation delay in seconds
        reward (float): Block reward R
        theta (float): Fraction of R paid for an uncle block, in [0, 1]
        block_size (Optional[BlockSizeModel]): Source of tau when given
        lambda_tau (float): lam * tau
        p_delta (float): Probability of a second block within the delay
    """

    def __init__(
        self,
        lam: float,
        tau: Optional[float] = None,
        reward: float = 1.0,
        theta: float = 0.0,
        block_size: Optional[BlockSizeModel] = None,
    ):
        if (tau is None) == (block_size is None):
            raise DomainError("Exactly one of tau and block_size must be given")
        if block_size is not None:
            tau = block_size.delay()
        assert tau is not None

        if not lam > 0:
            raise DomainError(f"Block rate lambda must be positive, got {lam}")
        if tau < 0:
            raise DomainError(f"Propagation delay tau must be non-negative, got {tau}")
        if not reward > 0:
            raise DomainError(f"Reward R must be positive, got {reward}")
        if not 0.0 <= theta <= 1.0:
            raise DomainError(f"Uncle fraction theta must lie in [0, 1], got {theta}")

        self.lam = float(lam)
        self.tau = float(tau)
        self.reward = float(reward)
        self.theta = float(theta)
        self.block_size = block_size
        self.lambda_tau = self.lam * self.tau
        self.p_delta = -math.expm1(-self.lambda_tau)

    @property
    def fork_penalty(self) -> float:
        """Return (1 - exp(-lambda * tau)) * (1 - theta), the factor forks cost a pool."""
        return self.p_delta * (1.0 - self.theta)

    def with_delay(self, tau: float, theta: Optional[float] = None) -> "NetworkParams":
        """Return a copy with a different delay (and optionally theta)."""
        return NetworkParams(
            lam=self.lam,
            tau=tau,
            reward=self.reward,
            theta=self.theta if theta is None else theta,
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"lambda": self.lam, "reward": self.reward, "theta": self.theta}
        if self.block_size is not None:
            data["block_size"] = self.block_size.to_dict()
        else:
            data["tau"] = self.tau
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NetworkParams":
        block_size = data.get("block_size")
        return cls(
            lam=data["lambda"],
            tau=data.get("tau"),
            reward=data["reward"],
            theta=data.get("theta", 0.0),
            block_size=BlockSizeModel.from_dict(block_size) if block_size is not None else None,
        )

    def __repr__(self) -> str:
        return (
            f"NetworkParams(lam={self.lam}, tau={self.tau}, "
            f"reward={self.reward}, theta={self.theta})"
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NetworkParams):
            return NotImplemented
        return (self.lam, self.tau, self.reward, self.theta) == (
            other.lam, other.tau, other.reward, other.theta
        )


def check_simplex(values: Sequence[float], name: str) -> np.ndarray:
    """
    Validate a point on the probability simplex.

    Args:
        values: Candidate fractions
        name: Label used in error messages

    Returns:
        np.ndarray: The values as a float array

    Raises:
        DomainError: If empty, negative, non-finite or not summing to one
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if np.any(arr < 0):
        raise DomainError(f"{name} must be non-negative, got {arr.tolist()}")
    total = float(arr.sum())
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise DomainError(f"{name} must sum to 1 (got {total!r})")
    return arr


class HashDistribution:
    """
    Normalized hash-rate fractions of M mining pools.

    Attributes:
        shares (np.ndarray): Read-only array of x_i, summing to one
    """

    def __init__(self, x: Sequence[float]):
        arr = check_simplex(x, "hash fractions").copy()
        arr.setflags(write=False)
        self.shares = arr

    @classmethod
    def from_hash_rates(cls, h: Sequence[float]) -> "HashDistribution":
        """
        Build a distribution from absolute hash rates x_i = h_i / V.

        Raises:
            DomainError: If any rate is negative or all are zero
        """
        rates = np.asarray(h, dtype=float)
        if rates.size == 0 or np.any(rates < 0):
            raise DomainError("Hash rates must be a non-empty non-negative vector")
        total = float(rates.sum())
        if total <= 0:
            raise DomainError("Total hash rate V must be positive")
        x = rates / total
        # absorb rounding so the result passes the simplex check
        x[int(np.argmax(x))] += 1.0 - float(x.sum())
        return cls(x)

    @property
    def size(self) -> int:
        """Number of pools M."""
        return int(self.shares.size)

    def check_index(self, i: int) -> None:
        if not 0 <= i < self.size:
            raise DomainError(f"Pool index {i} out of range for {self.size} pools")

    def to_list(self) -> List[float]:
        return [float(v) for v in self.shares]

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, i: int) -> float:
        return float(self.shares[i])

    def __iter__(self) -> Iterator[float]:
        return iter(self.to_list())

    def __repr__(self) -> str:
        return f"HashDistribution(x={self.to_list()})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HashDistribution):
            return NotImplemented
        return bool(np.array_equal(self.shares, other.shares))


class ForkRace:
    """
    Two-branch race after a temporary fork.

    Branch c1 carries the initiator's block, branch c2 the rival's. Pools other
    than the two combatants split their hash power evenly, so c2 mines with
    share eta1 = (1 - alpha + beta_rival) / 2 and c1 with eta2 = 1 - eta1.

    Attributes:
        alpha (float): Hash fraction of the initiating pool
        beta_rival (float): Hash fraction of the rival pool
        eta1 (float): Hash share mining on the rival's branch
        eta2 (float): Hash share mining on the initiator's branch
        lambda1 (float): Block rate on the rival's branch
        lambda2 (float): Block rate on the initiator's branch
    """

    def __init__(self, alpha: float, beta_rival: float, lam: float = 1.0):
        if alpha < 0 or beta_rival < 0:
            raise DomainError("Race hash fractions must be non-negative")
        if alpha + beta_rival > 1.0 + SIMPLEX_TOL:
            raise DomainError(
                f"Initiator and rival fractions exceed the network ({alpha} + {beta_rival})"
            )
        if not lam > 0:
            raise DomainError(f"Block rate must be positive, got {lam}")

        self.alpha = float(alpha)
        self.beta_rival = float(beta_rival)
        self.eta1 = (1.0 - self.alpha + self.beta_rival) / 2.0
        self.eta2 = 1.0 - self.eta1
        self.lambda1 = self.eta1 * lam
        self.lambda2 = self.eta2 * lam

    @classmethod
    def between(cls, i: int, j: int, x: HashDistribution, p: NetworkParams) -> "ForkRace":
        """Build the race between initiator pool i and rival pool j."""
        x.check_index(i)
        x.check_index(j)
        if i == j:
            raise DomainError("A pool cannot race against itself")
        return cls(x[i], x[j], p.lam)

    def __repr__(self) -> str:
        return f"ForkRace(alpha={self.alpha}, beta_rival={self.beta_rival}, eta1={self.eta1})"
