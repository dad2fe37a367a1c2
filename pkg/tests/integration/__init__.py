"""Integration tests for rankstat-mpc scenarios."""
