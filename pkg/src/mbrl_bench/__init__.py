"""Model-based RL planning and benchmarking toolkit."""

__version__ = "0.1.0"
