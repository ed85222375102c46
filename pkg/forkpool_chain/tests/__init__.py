"""
Test suite for the forkpool_chain module.
"""
