"""
Test suite for the forkpool_sim module.
"""
