"""Cycle-approximate simulator and toolchain for a programmable neuromorphic chip."""

__version__ = "0.1.0"
