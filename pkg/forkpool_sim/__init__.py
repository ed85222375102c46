"""
ForkPool - Mining Simulator Module

This module implements a seeded Monte Carlo simulator of proof-of-work
mining with temporary forks, used as an independent check of the closed-form
fork model.
"""

from .config import SPLIT_MODES, TIE_MODES, SimConfig
from .report import (
    PoolTally,
    SimEvents,
    SimReport,
    empirical_rates,
    export_csv,
    initiator_uncle_rates,
)
from .simulator import simulate

__all__ = [
    'SimConfig', 'TIE_MODES', 'SPLIT_MODES', 'PoolTally', 'SimEvents', 'SimReport',
    'simulate', 'empirical_rates', 'initiator_uncle_rates', 'export_csv',
]
