"""Maximum likelihood estimation on toric (log-linear) models.

Modules:
    model         core types, parametrization, Birch residuals
    ipf           generalized iterative scaling
    roots         companion-matrix root finding
    delpezzo      catalog of reflexive polygons and closed-form estimators
    discriminant  faces, edge discriminants and ML-degree drop for scaled models
    tfp           codimension-zero toric fiber products
    phylo         binary group-based tree models
    cli           command-line interface
"""

__version__ = "0.1.0"

from .model import (Binomial, BirchResidual, DataVector, DesignMatrix, DomainError,
                    LatticePolytope, ProbVector, Representation, Scaling, birch_residual,
                    evaluate_binomial, log_likelihood, parametrize, polytope_to_matrix)
from .qfield import QuadraticNumber

__all__ = [
    "Binomial", "BirchResidual", "DataVector", "DesignMatrix", "DomainError",
    "LatticePolytope", "ProbVector", "QuadraticNumber", "Representation", "Scaling",
    "birch_residual", "evaluate_binomial", "log_likelihood", "parametrize",
    "polytope_to_matrix", "__version__",
]
