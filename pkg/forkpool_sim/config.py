"""
Configuration of a Monte Carlo mining run.
"""

from typing import Any, Dict, Optional, Sequence

from typing_extensions import Literal

from forkpool_model.errors import DomainError
from forkpool_model.params import HashDistribution, NetworkParams

TieMode = Literal["coin_flip", "recursive_race"]
SplitMode = Literal["deterministic_half", "random_per_pool"]

TIE_MODES = ("coin_flip", "recursive_race")
SPLIT_MODES = ("deterministic_half", "random_per_pool")
MAX_SEED = 2 ** 64 - 1


class SimConfig:
    """
    Settings of a single simulate() call.

    Attributes:
        params (NetworkParams): Network parameters
        x (HashDistribution): Hash fractions of the pools
        horizon_blocks (int): Number of canonical blocks to produce
        seed (int): 64-bit unsigned seed of the PCG64 generator
        tie_mode (str): "coin_flip" or "recursive_race"
        split_mode (str): "deterministic_half" or "random_per_pool"
        pool_names (Optional[Sequence[str]]): Labels used when exporting events
    """

    def __init__(
        self,
        params: NetworkParams,
        x: HashDistribution,
        horizon_blocks: int,
        seed: int = 0,
        tie_mode: TieMode = "coin_flip",
        split_mode: SplitMode = "deterministic_half",
        pool_names: Optional[Sequence[str]] = None,
    ):
        if int(horizon_blocks) != horizon_blocks or horizon_blocks < 1:
            raise DomainError(f"horizon_blocks must be a positive integer, got {horizon_blocks}")
        if int(seed) != seed or not 0 <= seed <= MAX_SEED:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if tie_mode not in TIE_MODES:
            raise DomainError(f"Unknown tie_mode {tie_mode!r}; expected one of {TIE_MODES}")
        if split_mode not in SPLIT_MODES:
            raise DomainError(f"Unknown split_mode {split_mode!r}; expected one of {SPLIT_MODES}")
        if pool_names is not None and len(pool_names) != len(x):
            raise DomainError(
                f"Got {len(pool_names)} pool names for {len(x)} pools"
            )

        self.params = params
        self.x = x
        self.horizon_blocks = int(horizon_blocks)
        self.seed = int(seed)
        self.tie_mode = tie_mode
        self.split_mode = split_mode
        self.pool_names = list(pool_names) if pool_names is not None else [
            f"pool_{i}" for i in range(len(x))
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "horizon_blocks": self.horizon_blocks,
            "seed": self.seed,
            "tie_mode": self.tie_mode,
            "split_mode": self.split_mode,
        }

    def __repr__(self) -> str:
        return (
            f"SimConfig(M={len(self.x)}, horizon_blocks={self.horizon_blocks}, seed={self.seed}, "
            f"tie_mode={self.tie_mode!r}, split_mode={self.split_mode!r})"
        )
