"""
Empirical block statistics of ingested chain data.

Miners are grouped into bins by the number of blocks they mined; every bin
reports pooled uncle, fork and fail rates. Also provides the fork branch-count
histogram, top-k Gini coefficients and the overall fork frequency.
"""

import logging
from collections import Counter
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from forkpool_metrics.centralization import gini
from forkpool_model.errors import DomainError

from .records import BlockRecord, ForkRecord

logger = logging.getLogger(__name__)

Bin = Tuple[int, Optional[int]]

DEFAULT_BINS: Tuple[Bin, ...] = ((0, 10), (10, 100), (100, 1000), (1000, 10000), (10000, None))


def _rate(num: int, den: int) -> Optional[float]:
    return num / den if den > 0 else None


def check_bins(bins: Sequence[Bin]) -> None:
    """
    Validate that half-open bins (low, high] partition (0, infinity).

    Raises:
        DomainError: On gaps, overlaps or a bounded last bin
    """
    if not bins:
        raise DomainError("At least one bin is required")
    if bins[0][0] != 0:
        raise DomainError(f"First bin must start at 0, got {bins[0][0]}")
    for (low, high), (next_low, _) in zip(bins, bins[1:]):
        if high is None or high != next_low:
            raise DomainError(f"Bins must be contiguous: ({low}, {high}] then ({next_low}, ...]")
        if high <= low:
            raise DomainError(f"Empty bin ({low}, {high}]")
    if bins[-1][1] is not None:
        raise DomainError("Last bin must be unbounded")


def _bin_label(low: int, high: Optional[int]) -> str:
    return f"({low}, {high if high is not None else 'inf'}]"


class MinerStats:
    """
    Counters and rates of a single miner.

    Rates are None for a miner that only appears in fork records.
    """

    def __init__(self, miner: str, canonical: int = 0, uncles: int = 0,
                 forks_involved: int = 0, forks_lost: int = 0):
        self.miner = miner
        self.canonical = canonical
        self.uncles = uncles
        self.forks_involved = forks_involved
        self.forks_lost = forks_lost

    @property
    def total(self) -> int:
        return self.canonical + self.uncles

    @property
    def uncle_rate(self) -> Optional[float]:
        return _rate(self.uncles, self.total)

    @property
    def fork_rate(self) -> Optional[float]:
        return _rate(self.forks_involved, self.total)

    @property
    def fail_rate(self) -> Optional[float]:
        if self.total == 0:
            return None
        return _rate(self.forks_lost, self.forks_involved) or 0.0

    def rates(self) -> Tuple[Optional[float], Optional[float], Optional[float]]:
        return self.uncle_rate, self.fork_rate, self.fail_rate

    def to_dict(self) -> Dict[str, Any]:
        return {
            "miner": self.miner,
            "canonical": self.canonical,
            "uncles": self.uncles,
            "forks_involved": self.forks_involved,
            "forks_lost": self.forks_lost,
            "uncle_rate": self.uncle_rate,
            "fork_rate": self.fork_rate,
            "fail_rate": self.fail_rate,
        }

    def __repr__(self) -> str:
        return f"MinerStats(miner={self.miner!r}, total={self.total}, forks_involved={self.forks_involved})"


class BinStats:
    """Pooled counters of the miners in one (low, high] bin."""

    def __init__(self, low: int, high: Optional[int]):
        self.low = low
        self.high = high
        self.miner_count = 0
        self.blocks = 0
        self.uncles = 0
        self.forks_involved = 0
        self.forks_lost = 0

    @property
    def label(self) -> str:
        return _bin_label(self.low, self.high)

    def contains(self, total: int) -> bool:
        return total > self.low and (self.high is None or total <= self.high)

    def add(self, stats: MinerStats) -> None:
        self.miner_count += 1
        self.blocks += stats.total
        self.uncles += stats.uncles
        self.forks_involved += stats.forks_involved
        self.forks_lost += stats.forks_lost

    @property
    def uncle_rate(self) -> Optional[float]:
        return _rate(self.uncles, self.blocks)

    @property
    def fork_rate(self) -> Optional[float]:
        return _rate(self.forks_involved, self.blocks)

    @property
    def fail_rate(self) -> Optional[float]:
        if self.blocks == 0:
            return None
        return _rate(self.forks_lost, self.forks_involved) or 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "low": self.low,
            "high": self.high,
            "miner_count": self.miner_count,
            "blocks": self.blocks,
            "uncle_rate": self.uncle_rate,
            "fork_rate": self.fork_rate,
            "fail_rate": self.fail_rate,
        }


class BinnedStats:
    """
    Result of miner_stats().

    Attributes:
        bins (List[BinStats]): Per-bin pooled statistics, in bin order
        miners (Dict[str, MinerStats]): Per-miner statistics
        warnings (List[str]): Data problems that did not stop the computation
    """

    def __init__(self, bins: List[BinStats], miners: Dict[str, MinerStats], warnings: List[str]):
        self.bins = bins
        self.miners = miners
        self.warnings = warnings

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bins": [b.to_dict() for b in self.bins],
            "miners": [self.miners[name].to_dict() for name in sorted(self.miners)],
            "warnings": list(self.warnings),
        }

    def format_table(self) -> str:
        """Render the bins as an aligned text table."""
        header = ("Blocks mined", "Miners", "Uncle rate", "Fork rate", "Fail rate")
        rows = [header]
        for b in self.bins:
            rows.append((
                b.label,
                str(b.miner_count),
                _fmt(b.uncle_rate),
                _fmt(b.fork_rate),
                _fmt(b.fail_rate),
            ))
        widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
        lines = []
        for n, row in enumerate(rows):
            cells = [row[0].ljust(widths[0])] + [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
            lines.append("  ".join(cells))
            if n == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines)


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.6f}"


def miner_stats(
    blocks: Iterable[BlockRecord],
    forks: Iterable[ForkRecord],
    bins: Sequence[Bin] = DEFAULT_BINS,
) -> BinnedStats:
    """
    Per-miner and per-bin uncle, fork and fail rates.

    A miner's total is its canonical plus uncle blocks; fork_rate is fork
    events involving the miner over that total and fail_rate is events lost
    over events involved. Bin rates pool the counts of their miners.

    Args:
        blocks: Block records
        forks: Fork records
        bins: Half-open (low, high] bins covering (0, infinity)

    Returns:
        BinnedStats: Bin and miner statistics with any data warnings
    """
    check_bins(bins)
    miners: Dict[str, MinerStats] = {}
    warnings: List[str] = []

    def entry(name: str) -> MinerStats:
        if name not in miners:
            miners[name] = MinerStats(name)
        return miners[name]

    for block in blocks:
        stats = entry(block.miner)
        if block.is_canonical:
            stats.canonical += 1
        else:
            stats.uncles += 1

    for fork in forks:
        if fork.is_self_competition:
            message = f"fork at height {fork.height}: miner {fork.miner_a!r} competes with itself"
            logger.warning(message)
            warnings.append(message)
            stats = entry(fork.miner_a)
            stats.forks_involved += 1
            stats.forks_lost += 1
            continue
        entry(fork.miner_a).forks_involved += 1
        entry(fork.miner_b).forks_involved += 1
        entry(fork.loser).forks_lost += 1

    binned = [BinStats(low, high) for low, high in bins]
    for name in sorted(miners):
        stats = miners[name]
        if stats.total == 0:
            message = f"miner {name!r} appears in forks but mined no recorded blocks"
            logger.warning(message)
            warnings.append(message)
            continue
        for b in binned:
            if b.contains(stats.total):
                b.add(stats)
                break

    return BinnedStats(binned, miners, warnings)


def branch_histogram(forks: Iterable[ForkRecord]) -> Dict[int, Tuple[int, float]]:
    """
    Count fork records by number of competing branches.

    Returns:
        Dict mapping branch count to (count, fraction), in ascending order
    """
    counts = Counter(fork.branches for fork in forks)
    total = sum(counts.values())
    return {k: (counts[k], counts[k] / total) for k in sorted(counts)}


def canonical_counts(blocks: Iterable[BlockRecord]) -> Dict[str, int]:
    """Canonical block count per miner."""
    return dict(Counter(block.miner for block in blocks if block.is_canonical))


def top_k_gini(blocks: Iterable[BlockRecord], k: int) -> float:
    """
    Gini coefficient of the k miners with the most canonical blocks.

    Raises:
        DomainError: If k < 1 or there are no canonical blocks
    """
    if k < 1:
        raise DomainError(f"k must be at least 1, got {k}")
    counts = canonical_counts(blocks)
    if not counts:
        raise DomainError("No canonical blocks to measure")
    if len(counts) < k:
        logger.warning("Only %d miners available for a top-%d Gini; using all of them", len(counts), k)
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[:k]
    return gini([count for _, count in ranked])


def compare_chains(chains: Mapping[str, Iterable[BlockRecord]], k: int = 10) -> Dict[str, float]:
    """Top-k Gini coefficient of several chains, keyed by chain name."""
    return {name: top_k_gini(blocks, k) for name, blocks in chains.items()}


def fork_frequency(blocks: Iterable[BlockRecord], forks: Iterable[ForkRecord]) -> float:
    """
    Fraction of canonical heights at which a fork was recorded.

    Raises:
        DomainError: If there are no canonical blocks
    """
    heights = {block.height for block in blocks if block.is_canonical}
    if not heights:
        raise DomainError("No canonical blocks to measure")
    forked = {fork.height for fork in forks}
    return len(forked & heights) / len(heights)
