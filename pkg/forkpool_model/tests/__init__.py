"""
Test suite for the forkpool_model module.
"""
