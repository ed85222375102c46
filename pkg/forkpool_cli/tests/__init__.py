"""
Test suite for the forkpool_cli module.
"""
