"""
Custom exceptions for faslab.

Usage errors (bad parameters, caps, configuration) derive from DomainError;
failures of a numerical method on valid input derive from NumericalError.
The CLI maps the former to exit code 2 and the latter to exit code 1.
"""

from typing import Optional, Dict, Any


class FasLabError(Exception):
    """
    Base exception for all faslab errors.
    """

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class DomainError(FasLabError, ValueError):
    """
    Raised when an argument lies outside the domain of an operation.
    """
    pass


class SeriesCapError(DomainError):
    """
    Raised when the truncated series is asked for more ports than its cap.
    """

    def __init__(
        self,
        message: str,
        n_ports: int,
        max_ports: int,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)
        self.n_ports = n_ports
        self.max_ports = max_ports


class ConfigError(DomainError):
    """
    Raised when an experiment or runtime configuration is invalid.
    """
    pass


class NumericalError(FasLabError):
    """
    Base class for failures of a numerical method on valid input.
    """
    pass


class NearSingularError(NumericalError):
    """
    Raised when the correlation matrix is too close to singular for
    cofactor-based formulas. Reduce the model to ``suggested_ports`` ports
    over the same aperture and retry.
    """

    def __init__(
        self,
        message: str,
        suggested_ports: Optional[int] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)
        self.suggested_ports = suggested_ports


class QuadratureError(NumericalError):
    """
    Raised when adaptive quadrature does not reach the requested accuracy.
    """
    pass


class SeriesConvergenceError(NumericalError):
    """
    Raised when the truncated series has not settled at the highest order
    it may use. ``raw_value`` is the last partial sum and ``s0`` its order.
    """

    def __init__(
        self,
        message: str,
        raw_value: float,
        s0: int,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)
        self.raw_value = raw_value
        self.s0 = s0


class InsufficientEventsError(NumericalError):
    """
    Raised when a Monte Carlo estimate has too few outage events to be used.
    """

    def __init__(
        self,
        message: str,
        events: int,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)
        self.events = events


class ModelConsistencyError(NumericalError):
    """
    Raised when a channel model's residual power is negative beyond rounding.
    """
    pass
