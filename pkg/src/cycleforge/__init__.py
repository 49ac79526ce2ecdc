"""Lyapunov constants, cyclicity bounds and Filippov simulation for piecewise planar systems."""

__version__ = "0.1.0"
