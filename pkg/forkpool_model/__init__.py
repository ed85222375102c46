"""
ForkPool - Fork Model Module

This module implements the closed-form temporary-fork model of a
proof-of-work network: concurrent-block, fork, fail and uncle probabilities,
expected pool rewards and reward ratios.
"""

from .errors import (
    ConfigError,
    DomainError,
    InconsistentConditionsError,
    NumericalFailureError,
    SchemaError,
)
from .fork_model import (
    MODES,
    Mode,
    expected_reward,
    fail_probabilities,
    prob_concurrent_block,
    prob_fail,
    prob_fork_after,
    prob_no_fork,
    prob_single_rival_branch,
    prob_uncle,
    propagation_delay,
    race_win_probabilities,
    reward_ratio,
    reward_ratios,
    uncle_probabilities,
    uncle_vector,
)
from .params import BlockSizeModel, ForkRace, HashDistribution, NetworkParams, check_simplex

__all__ = [
    'BlockSizeModel', 'NetworkParams', 'HashDistribution', 'ForkRace', 'check_simplex',
    'DomainError', 'ConfigError', 'SchemaError', 'InconsistentConditionsError',
    'NumericalFailureError', 'MODES', 'Mode',
    'propagation_delay', 'prob_concurrent_block', 'prob_fork_after', 'prob_no_fork',
    'race_win_probabilities', 'prob_fail', 'prob_uncle', 'uncle_probabilities',
    'uncle_vector', 'fail_probabilities', 'expected_reward', 'reward_ratio', 'reward_ratios',
    'prob_single_rival_branch',
]
