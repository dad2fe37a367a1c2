"""
Test suite for rankstat-mpc.

This package contains:
- unit/: Unit tests for individual components
- integration/: Integration tests running whole scenarios
- fixtures/: Scenario files, adversary scripts and golden values
"""
