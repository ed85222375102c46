"""
Test suite for the forkpool_equilibrium module.
"""
