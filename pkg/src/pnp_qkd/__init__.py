"""Simulation and security toolkit for plug-and-play two-way QKD with decoy states."""

__version__ = "0.1.0"
