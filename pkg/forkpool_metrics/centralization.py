"""
Centralization and fairness measures.

The Gini coefficient uses the pairwise double sum
G = sum_i sum_j |x_i - x_j| / (2 M^2 mean(x)), which is scale-free, so raw
hash rates or block counts can be passed without normalizing.
"""

from typing import List, Sequence, Tuple, Union

import numpy as np

from forkpool_model.errors import DomainError
from forkpool_model.fork_model import Mode, reward_ratio, reward_ratios
from forkpool_model.params import HashDistribution, NetworkParams


def gini(x: Union[HashDistribution, Sequence[float]]) -> float:
    """
    Gini coefficient of a share or weight vector.

    Args:
        x: Hash distribution, or any non-negative weights

    Returns:
        float: Coefficient in [0, (M - 1) / M]; 0 for a single entry

    Raises:
        DomainError: If the weights are empty, negative or all zero
    """
    values = np.asarray(x.shares if isinstance(x, HashDistribution) else x, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise DomainError("Gini coefficient needs a non-empty vector")
    if np.any(values < 0):
        raise DomainError("Gini coefficient needs non-negative values")
    m = values.size
    if m == 1:
        return 0.0
    mean = float(values.mean())
    if mean <= 0:
        raise DomainError("Gini coefficient is undefined for all-zero values")
    diffs = np.abs(values[:, None] - values[None, :]).sum()
    return float(diffs / (2.0 * m * m * mean))


def fairness_spread(
    x: HashDistribution, p: NetworkParams, mode: Mode = "exact"
) -> Tuple[float, float, float]:
    """
    Smallest and largest reward ratio over pools and their difference.

    Raises:
        DomainError: If any pool has zero hash fraction
    """
    ratios = reward_ratios(x, p, mode)
    low, high = min(ratios), max(ratios)
    return low, high, high - low


def reward_ratio_scan(
    x: HashDistribution,
    pool: int,
    shares: Sequence[float],
    p: NetworkParams,
    mode: Mode = "exact",
) -> List[Tuple[float, float]]:
    """
    Reward ratio of one pool as it grows while the others shrink in proportion.

    For each target share s the pool gets s and every other pool keeps its
    relative weight within the remaining 1 - s.

    Args:
        x: Starting distribution (fixes the others' relative weights)
        pool: Index of the growing pool
        shares: Target shares in (0, 1]
        p: Network parameters
        mode: Probability mode

    Returns:
        List of (share, reward ratio) pairs
    """
    x.check_index(pool)
    rest = 1.0 - x[pool]
    if rest <= 0:
        raise DomainError(f"Pool {pool} already holds all hash power")

    results = []
    for s in shares:
        if not 0.0 < s <= 1.0:
            raise DomainError(f"Target share must lie in (0, 1], got {s}")
        scaled = x.shares * ((1.0 - s) / rest)
        scaled[pool] = s
        dist = HashDistribution.from_hash_rates(scaled)
        results.append((float(s), reward_ratio(pool, dist, p, mode)))
    return results
