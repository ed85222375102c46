"""
ForkPool - Command Line Module

This module implements the forkpool command: JSON run configurations with
resolved defaults, and subcommands for the fork model, the mining simulator,
the replicator dynamics, equilibrium classification, parameter sweeps and
chain-data statistics.
"""

from .config import RunConfig, load_config, parse_grid
from .main import build_parser, main

__all__ = ['RunConfig', 'load_config', 'parse_grid', 'build_parser', 'main']
