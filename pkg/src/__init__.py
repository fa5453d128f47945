# PUCS simulator - probing-based multi-play bandits with limited resources
__version__ = "0.1.0"
