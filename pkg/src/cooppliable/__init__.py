"""Cooperative pliable lasso: two-source penalized regression with modifier interactions."""
__version__ = "0.1.0"
