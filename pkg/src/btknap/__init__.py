"""Backtracking-model laboratory for simple knapsack."""

__version__ = "0.1.0"
