"""
Counting, evidence scoring and candidate generation.

The miner drives these levelwise: count candidates, keep the frequent ones,
join them into the next level.
"""

__all__ = ["candidates", "counter", "evidence", "miner"]
