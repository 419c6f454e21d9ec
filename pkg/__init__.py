"""
SemimartingaleLab: Monte Carlo diagnostics for the good-integrator characterisation

Simulate process models on dyadic grids, integrate simple and elementary
integrands against them, estimate mean variation and Doob/Rao decompositions,
and test numerically whether a process behaves like a semimartingale.
"""

__version__ = "0.2.0"
__author__ = "Arjahck"
__description__ = "Semimartingale diagnostics on dyadic grids"

from .grid_paths import PathEnsemble, make_grid, simulate
from .variation import ConditionalDriftOracle, mean_variation_report
from .limits import good_integrator_probe, riemann_integrator_test, theorem1_pipeline

__all__ = [
    "PathEnsemble",
    "make_grid",
    "simulate",
    "ConditionalDriftOracle",
    "mean_variation_report",
    "good_integrator_probe",
    "riemann_integrator_test",
    "theorem1_pipeline",
]
