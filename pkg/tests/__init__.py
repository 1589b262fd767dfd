"""Tests for the episode miner."""

__version__ = "0.1.0"
