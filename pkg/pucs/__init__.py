"""
PUCS simulator - probing-augmented user-centric selection.
(Offline greedy probing, online OLPA bandit, baselines and regret harness)
"""

__version__ = "0.1.0"
