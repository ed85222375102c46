"""
ForkPool - Evolution Module

This module implements the evolutionary game between miners choosing mining
pools: per-miner payoffs under the fork model, the replicator dynamics and
their fixed-step Runge-Kutta integration.
"""

from .dynamics import ReplicatorField, hash_fraction, miner_payoff, payoff_vector, replicator_rhs
from .integrator import Trajectory, integrate
from .market import PoolMarket, PopulationState

__all__ = [
    'PoolMarket', 'PopulationState', 'ReplicatorField', 'hash_fraction', 'miner_payoff',
    'payoff_vector', 'replicator_rhs', 'Trajectory', 'integrate',
]
