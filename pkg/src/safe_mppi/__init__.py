"""Sampling-based path planning with control-barrier-function safety layers."""

__version__ = "0.1.0"
