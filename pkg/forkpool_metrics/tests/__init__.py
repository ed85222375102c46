"""
Test suite for the forkpool_metrics module.
"""
