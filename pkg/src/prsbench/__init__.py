"""Workbench for simulating distinguishing attacks on pseudorandom quantum states."""

__version__ = "0.1.0"
