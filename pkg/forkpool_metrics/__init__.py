"""
ForkPool - Metrics Module

This module implements centralization and fairness measures of hash
distributions (Gini coefficient, reward-ratio spread and scans) and sweeps of
the equilibrium population over propagation delay and uncle fraction.
"""

from .centralization import fairness_spread, gini, reward_ratio_scan
from .sweep import METHODS, SweepRow, SweepSpec, dominance_threshold, sweep, to_csv, write_csv

__all__ = [
    'gini', 'fairness_spread', 'reward_ratio_scan',
    'METHODS', 'SweepSpec', 'SweepRow', 'sweep', 'to_csv', 'write_csv', 'dominance_threshold',
]
