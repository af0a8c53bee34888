"""Shadowing, Lyapunov-defect and entropy-gap numerics for 1-D maps."""

__version__ = "0.1.0"
