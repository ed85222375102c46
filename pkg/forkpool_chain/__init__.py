"""
ForkPool - Chain Data Module

This module implements ingestion of block and fork records from CSV files
and the empirical statistics computed from them: binned uncle, fork and fail
rates, branch-count histograms, fork frequency and top-k Gini coefficients.
"""

from .loader import load_blocks, load_forks
from .records import BLOCK_FIELDS, FORK_FIELDS, BlockRecord, ForkRecord, RowError
from .statistics import (
    DEFAULT_BINS,
    BinnedStats,
    BinStats,
    MinerStats,
    branch_histogram,
    canonical_counts,
    check_bins,
    compare_chains,
    fork_frequency,
    miner_stats,
    top_k_gini,
)

__all__ = [
    'BlockRecord', 'ForkRecord', 'RowError', 'BLOCK_FIELDS', 'FORK_FIELDS',
    'load_blocks', 'load_forks', 'DEFAULT_BINS', 'BinnedStats', 'BinStats', 'MinerStats',
    'check_bins', 'miner_stats', 'branch_histogram', 'canonical_counts', 'top_k_gini',
    'compare_chains', 'fork_frequency',
]
