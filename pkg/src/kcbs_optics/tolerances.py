"""Numerical tolerances shared across the package."""

PHYSICS_TOL = 1e-10
PROBABILITY_TOL = 1e-12
UNITARITY_TOL = 1e-10
