"""Unit tests for rankstat-mpc components."""
