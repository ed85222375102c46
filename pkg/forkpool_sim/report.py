"""
Results of a Monte Carlo mining run.

A SimReport holds per-pool counters, totals and (optionally) the per-height
event log. It serializes to JSON and can export the event log as the
blocks.csv / forks.csv pair read by forkpool_chain.
"""

import csv
import json
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from forkpool_chain.records import BLOCK_FIELDS, FORK_FIELDS
from forkpool_model.errors import DomainError

SCHEMA_VERSION = 1


class PoolTally:
    """
    Counters of a single pool.

    Attributes:
        blocks_won (int): Canonical blocks
        uncles (int): Stale blocks (every lost fork leaves one)
        forks_involved (int): Fork events where the pool was initiator or rival
        forks_initiated (int): Fork events following the pool's own block
        forks_lost (int): Fork events the pool lost
        blocks_initiated (int): Heights whose first block the pool mined
        initiated_lost (int): Forks the pool initiated and lost
        reward (float): blocks_won * R + uncles * theta * R
    """

    FIELDS = (
        "blocks_won", "uncles", "forks_involved", "forks_initiated",
        "forks_lost", "blocks_initiated", "initiated_lost",
    )

    def __init__(
        self,
        blocks_won: int = 0,
        uncles: int = 0,
        forks_involved: int = 0,
        forks_initiated: int = 0,
        forks_lost: int = 0,
        blocks_initiated: int = 0,
        initiated_lost: int = 0,
        reward: float = 0.0,
    ):
        self.blocks_won = int(blocks_won)
        self.uncles = int(uncles)
        self.forks_involved = int(forks_involved)
        self.forks_initiated = int(forks_initiated)
        self.forks_lost = int(forks_lost)
        self.blocks_initiated = int(blocks_initiated)
        self.initiated_lost = int(initiated_lost)
        self.reward = float(reward)

    @property
    def blocks_mined(self) -> int:
        return self.blocks_won + self.uncles

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {name: getattr(self, name) for name in self.FIELDS}
        data["reward"] = self.reward
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PoolTally":
        return cls(**{key: data[key] for key in cls.FIELDS + ("reward",) if key in data})

    def __repr__(self) -> str:
        return f"PoolTally(blocks_won={self.blocks_won}, uncles={self.uncles}, reward={self.reward})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PoolTally):
            return NotImplemented
        return self.to_dict() == other.to_dict()


class SimEvents:
    """
    Per-height event log.

    Attributes:
        canonical (np.ndarray): Miner index of the canonical block at each height
        fork_heights (np.ndarray): Heights at which a fork happened
        initiator (np.ndarray): Initiating pool of each fork
        rival (np.ndarray): Rival pool of each fork
        initiator_won (np.ndarray): True where the initiator's branch won
    """

    def __init__(
        self,
        canonical: np.ndarray,
        fork_heights: np.ndarray,
        initiator: np.ndarray,
        rival: np.ndarray,
        initiator_won: np.ndarray,
    ):
        self.canonical = canonical
        self.fork_heights = fork_heights
        self.initiator = initiator
        self.rival = rival
        self.initiator_won = initiator_won


class SimReport:
    """
    Outcome of simulate().

    Attributes:
        pools (List[PoolTally]): Per-pool counters
        total_blocks (int): Canonical blocks produced
        fork_events (int): Two-branch fork events
        seed (int): Seed that produced the run
        wall_time (float): Seconds spent; excluded from serialization
        events (Optional[SimEvents]): Event log when requested
    """

    def __init__(
        self,
        pools: Sequence[PoolTally],
        total_blocks: int,
        fork_events: int,
        seed: int,
        wall_time: float = 0.0,
        events: Optional[SimEvents] = None,
    ):
        if fork_events > total_blocks:
            raise DomainError("A run cannot have more fork events than blocks")
        self.pools = list(pools)
        self.total_blocks = int(total_blocks)
        self.fork_events = int(fork_events)
        self.seed = int(seed)
        self.wall_time = wall_time
        self.events = events

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "pools": [pool.to_dict() for pool in self.pools],
            "total_blocks": self.total_blocks,
            "fork_events": self.fork_events,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SimReport":
        return cls(
            pools=[PoolTally.from_dict(pool) for pool in data["pools"]],
            total_blocks=data["total_blocks"],
            fork_events=data["fork_events"],
            seed=data["seed"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def __repr__(self) -> str:
        return (
            f"SimReport(pools={len(self.pools)}, total_blocks={self.total_blocks}, "
            f"fork_events={self.fork_events}, seed={self.seed})"
        )


def _ratio(num: int, den: int) -> float:
    return num / den if den > 0 else 0.0


def empirical_rates(report: SimReport) -> List[Tuple[float, float, float]]:
    """
    Per-pool (uncle_rate, fork_rate, fail_rate).

    uncle_rate and fork_rate are taken over all blocks the pool mined
    (canonical plus uncles); fail_rate is over the forks it took part in.
    Each rate is 0 when its denominator is 0.
    """
    rates = []
    for pool in report.pools:
        mined = pool.blocks_mined
        rates.append((
            _ratio(pool.uncles, mined),
            _ratio(pool.forks_involved, mined),
            _ratio(pool.forks_lost, pool.forks_involved),
        ))
    return rates


def initiator_uncle_rates(report: SimReport) -> List[float]:
    """
    Per-pool fraction of first-at-height blocks that ended up stale.

    This is the empirical counterpart of the closed-form uncle probability,
    which conditions on the pool having mined the first block at a height.
    """
    return [_ratio(pool.initiated_lost, pool.blocks_initiated) for pool in report.pools]


def export_csv(report: SimReport, names: Sequence[str], blocks_path: str, forks_path: str) -> None:
    """
    Write the event log as blocks.csv and forks.csv.

    Raises:
        DomainError: If the report was produced without an event log
    """
    events = report.events
    if events is None:
        raise DomainError("Report has no event log; run simulate(..., record_events=True)")

    losers = np.where(events.initiator_won, events.rival, events.initiator)
    with open(blocks_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(BLOCK_FIELDS)
        for height, miner in enumerate(events.canonical.tolist()):
            writer.writerow([height, names[miner], "canonical"])
        for height, miner in zip(events.fork_heights.tolist(), losers.tolist()):
            writer.writerow([height, names[miner], "uncle"])

    with open(forks_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(FORK_FIELDS)
        rows = zip(
            events.fork_heights.tolist(),
            events.initiator.tolist(),
            events.rival.tolist(),
            events.initiator_won.tolist(),
        )
        for height, a, b, a_won in rows:
            writer.writerow([height, names[a], names[b], "a" if a_won else "b", 2])
