"""
Test suite for the forkpool_evolution module.
"""
