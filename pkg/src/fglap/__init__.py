"""Fractional g-Laplacian: Young functions, nonlocal operator, Orlicz energies,
a Dirichlet solver and regularity diagnostics."""
from .diagnostics import (
    DiagnosticsReport,
    boundary_ratio_profile,
    distance_profile_residual,
    fit_holder_exponent,
    global_holder_quotient,
    oscillation_profile,
    torsion_diagnostics,
    weak_harnack_check,
)
from .domains import Ball, Interval, Rectangle
from .energy import EnergyBreakdown, dirichlet_energy, energy_gradient, luxemburg_seminorm, modular
from .errors import FglapError
from .lattice import AnalyticFunction, Exterior, LatticeFunction, lattice_from_function
from .operator import PVResult, QuadratureSpec, exterior_correction, pointwise_apply, tail, weak_pairing
from .solver import DirichletProblem, DiscreteSolution, SolverConfig, check_comparison, check_scaling, solve
from .young import (
    YoungFunction,
    check_inequality_suite,
    conjugate,
    estimate_ellipticity,
    g_inverse,
    make_power,
    make_power_sum,
)

__all__ = [
    "AnalyticFunction", "Ball", "DiagnosticsReport", "DirichletProblem", "DiscreteSolution", "EnergyBreakdown",
    "Exterior", "FglapError", "Interval", "LatticeFunction", "PVResult", "QuadratureSpec", "Rectangle",
    "SolverConfig", "YoungFunction", "boundary_ratio_profile", "check_comparison", "check_inequality_suite",
    "check_scaling", "conjugate", "dirichlet_energy", "distance_profile_residual", "energy_gradient",
    "estimate_ellipticity", "exterior_correction", "fit_holder_exponent", "g_inverse", "global_holder_quotient",
    "lattice_from_function", "luxemburg_seminorm", "make_power", "make_power_sum", "modular", "oscillation_profile",
    "pointwise_apply", "solve", "tail", "torsion_diagnostics", "weak_harnack_check", "weak_pairing",
]
