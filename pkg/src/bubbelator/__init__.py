"""Numerical toolkit for a finite cluster-growth model with atomization.

Simulation of the nonlinear dynamics, closed-form equilibria, the spectrum
of the linearization via a characteristic-function reduction, and location
of the critical parameters where eigenvalue pairs cross the imaginary axis.
"""
from .model import ModelParams, StateVector, fluxes, rhs, total_mass

__all__ = [
    "ModelParams",
    "StateVector",
    "fluxes",
    "rhs",
    "total_mass",
]

__version__ = "0.1.0"
