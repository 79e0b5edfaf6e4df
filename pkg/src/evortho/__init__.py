"""Orthogonal parametrisations of extreme-value distributions.

Closed-form Fisher information for the GEV, Gumbel and generalised Pareto
families, orthogonal charts, maximum-likelihood fitting in either
coordinate system, and a replication harness with SVG reporting.
"""

from evortho._kernels import BACKEND
from evortho.distributions import ClassicalParams, Family
from evortho.errors import (
    ChartDomainError,
    DegenerateDataError,
    DomainError,
    EvorthoError,
    InfeasibleDataError,
    InvalidParameterError,
    NonConvergenceError,
    SingularMatrixError,
    StepUnderflowError,
)
from evortho.fisher import FisherMatrix, fisher_information
from evortho.mle import FitConfig, FitResult, estimate_correlation, fit, observed_information
from evortho.reparam import OrthoChart, OrthoParams, from_classical, ortho_fisher, to_classical

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ClassicalParams",
    "Family",
    "FisherMatrix",
    "fisher_information",
    "OrthoChart",
    "OrthoParams",
    "to_classical",
    "from_classical",
    "ortho_fisher",
    "FitConfig",
    "FitResult",
    "fit",
    "observed_information",
    "estimate_correlation",
    "EvorthoError",
    "DomainError",
    "InvalidParameterError",
    "ChartDomainError",
    "InfeasibleDataError",
    "DegenerateDataError",
    "SingularMatrixError",
    "StepUnderflowError",
    "NonConvergenceError",
]
