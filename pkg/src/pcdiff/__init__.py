"""Solvers and checks for nonlocal-in-time degenerate diffusion equations

    d/dt (k * [u - u0]) - div(a(t, x) grad phi(u)) = f   on (0, T) x (0, L),

with ``u = 0`` on the boundary and ``(k, l)`` a pair of kernels with
``k * l = 1``.
"""

from .kernels import (
    DiscreteKernel,
    KernelPair,
    ResolventSet,
    TimeGrid,
    convolve,
    kernel_convolve,
    regularized_kernel,
    resolvent_kernel,
    sample_cell_averages,
    verify_pc_pair,
    yosida_convergence,
)
from .nonlocal_time import NonlocalOperator, apply, convexity_margin, implicit_split
from .report import Check, Report
from .solver import (
    AdaptiveBound,
    FixedBound,
    Nonlinearity,
    ProblemSpec,
    Solution,
    SolverConfig,
    picard_step,
    solve,
)
from .spatial import CoefficientField, Mesh1D, StiffnessMatrix, assemble, hminus1_norm, norms
from .verify import mittag_leffler, run_suite

__version__ = "0.1.0"

__all__ = [
    "AdaptiveBound",
    "Check",
    "CoefficientField",
    "DiscreteKernel",
    "FixedBound",
    "KernelPair",
    "Mesh1D",
    "Nonlinearity",
    "NonlocalOperator",
    "ProblemSpec",
    "Report",
    "ResolventSet",
    "Solution",
    "SolverConfig",
    "StiffnessMatrix",
    "TimeGrid",
    "apply",
    "assemble",
    "convexity_margin",
    "convolve",
    "hminus1_norm",
    "implicit_split",
    "kernel_convolve",
    "mittag_leffler",
    "norms",
    "picard_step",
    "regularized_kernel",
    "resolvent_kernel",
    "run_suite",
    "sample_cell_averages",
    "solve",
    "verify_pc_pair",
    "yosida_convergence",
]
