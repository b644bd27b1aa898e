"""Learning game strategies with meta-interpretive learning, plus baselines."""

__version__ = "0.1.0"
