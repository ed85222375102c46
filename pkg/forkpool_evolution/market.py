"""
Mining-pool market and miner population state.
"""

from typing import Any, Dict, Iterator, List, Sequence

import numpy as np

from forkpool_model.errors import DomainError
from forkpool_model.params import check_simplex


class PoolMarket:
    """
    Pools a fixed population of miners can join.

    Attributes:
        omega (np.ndarray): Hash units a miner must provide in each pool
        miners (int): Total miner count N
        unit_cost (float): Cost p per hash unit per block period
    """

    def __init__(self, omega: Sequence[float], miners: int, unit_cost: float = 0.0):
        arr = np.asarray(omega, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("omega must list at least one pool")
        if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
            raise DomainError(f"Every hash specification must be positive, got {arr.tolist()}")
        if miners < arr.size:
            raise DomainError(f"Need at least one miner per pool (N={miners}, M={arr.size})")
        if unit_cost < 0:
            raise DomainError(f"Unit cost must be non-negative, got {unit_cost}")

        arr.setflags(write=False)
        self.omega = arr
        self.miners = miners
        self.unit_cost = float(unit_cost)

    @property
    def size(self) -> int:
        return int(self.omega.size)

    @property
    def equal_spec(self) -> bool:
        """True when every pool demands the same hash specification."""
        return bool(np.all(self.omega == self.omega[0]))

    def manifold_value(self, reward: float) -> float:
        """Return R / (p N), the total per-miner hash at which revenue meets cost."""
        if self.unit_cost <= 0:
            raise DomainError("Break-even hash level needs a positive unit cost")
        return reward / (self.unit_cost * self.miners)

    def to_dict(self) -> Dict[str, Any]:
        return {"omega": self.omega.tolist(), "miners": self.miners, "unit_cost": self.unit_cost}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PoolMarket":
        return cls(omega=data["omega"], miners=data["miners"], unit_cost=data.get("unit_cost", 0.0))

    def __repr__(self) -> str:
        return f"PoolMarket(omega={self.omega.tolist()}, miners={self.miners}, unit_cost={self.unit_cost})"


class PopulationState:
    """
    Fractions of the miner population in each pool.

    Attributes:
        r (np.ndarray): Read-only population fractions on the simplex
    """

    def __init__(self, r: Sequence[float]):
        arr = check_simplex(r, "population fractions").copy()
        arr.setflags(write=False)
        self.r = arr

    @classmethod
    def vertex(cls, i: int, m: int) -> "PopulationState":
        """Everyone in pool i."""
        if not 0 <= i < m:
            raise DomainError(f"Vertex index {i} out of range for {m} pools")
        r = np.zeros(m)
        r[i] = 1.0
        return cls(r)

    @classmethod
    def uniform(cls, m: int) -> "PopulationState":
        return cls(np.full(m, 1.0 / m))

    @classmethod
    def project(cls, values: Sequence[float]) -> "PopulationState":
        """Clamp negatives to zero and renormalize onto the simplex."""
        arr = np.clip(np.asarray(values, dtype=float), 0.0, None)
        total = float(arr.sum())
        if total <= 0:
            raise DomainError("Cannot project an all-zero vector onto the simplex")
        return cls(arr / total)

    @property
    def size(self) -> int:
        return int(self.r.size)

    def is_vertex(self, tol: float = 1e-12) -> bool:
        return bool(np.max(self.r) >= 1.0 - tol)

    def is_interior(self, tol: float = 1e-12) -> bool:
        return bool(np.all(self.r > tol))

    def weighted_hash(self, market: PoolMarket) -> float:
        """Return sum_i r_i * omega_i."""
        return float(np.dot(self.r, market.omega))

    def distance(self, other: "PopulationState") -> float:
        """L1 distance to another state."""
        return float(np.abs(self.r - other.r).sum())

    def to_list(self) -> List[float]:
        return [float(v) for v in self.r]

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, i: int) -> float:
        return float(self.r[i])

    def __iter__(self) -> Iterator[float]:
        return iter(self.to_list())

    def __repr__(self) -> str:
        return f"PopulationState(r={self.to_list()})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PopulationState):
            return NotImplemented
        return bool(np.array_equal(self.r, other.r))
