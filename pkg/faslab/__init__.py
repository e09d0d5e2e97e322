"""
faslab - outage, diversity and port-count analysis of fluid antenna systems.

This package builds the spatial correlation of an N-port fluid antenna,
samples correlated Rayleigh channels, evaluates outage probability by
series, single-integral, asymptotic and Monte Carlo methods, and selects
the suboptimal port count N*.
"""

__version__ = "1.0.0"
__author__ = "faslab Team"

from .correlation import CorrelationModel, RankReport, build_correlation, numerical_rank
from .interfaces import Method, OutageEstimate, OutageEvaluator, OutageQuery
from .analytic import SeriesConfig, algorithm1_nstar, outage_theorem1
from .simulate import MonteCarloSimulator, Scheme
from .factory import create_evaluator, create_simulator
from .exceptions import (
    FasLabError,
    DomainError,
    NumericalError,
    NearSingularError,
    SeriesCapError,
    SeriesConvergenceError,
)

__all__ = [
    "CorrelationModel",
    "RankReport",
    "build_correlation",
    "numerical_rank",
    "Method",
    "OutageEstimate",
    "OutageEvaluator",
    "OutageQuery",
    "SeriesConfig",
    "algorithm1_nstar",
    "outage_theorem1",
    "MonteCarloSimulator",
    "Scheme",
    "create_evaluator",
    "create_simulator",
    "FasLabError",
    "DomainError",
    "NumericalError",
    "NearSingularError",
    "SeriesCapError",
    "SeriesConvergenceError",
]
