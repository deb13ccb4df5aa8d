"""Satellite entanglement-distribution scheduling: orbits, link physics, OPT-SAT solvers, simulation."""

__version__ = "0.1.0"
