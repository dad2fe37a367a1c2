"""Test fixtures: scenarios, adversary scripts and golden values."""
