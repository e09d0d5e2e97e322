"""
Core interfaces for faslab.

This module defines the shared value types of an outage evaluation and the
abstract interfaces every evaluator and logger implements, enabling
dependency injection and easy testing.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, List, Optional, Sequence, Tuple

from .exceptions import DomainError


class Method(Enum):
    """How an outage probability was obtained."""
    MONTE_CARLO = "mc"
    SERIES = "theorem1"
    EQ15 = "eq15"
    ASYMPTOTE = "asymptote"


def db_to_linear(snr_db: float) -> float:
    return float(10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class OutageQuery:
    """
    Rate threshold and transmit SNR of an outage question.

    ``omega`` is the envelope threshold sqrt((2^q - 1) / SNR). It is derived
    once here and never recomputed downstream.
    """
    rate_q: float
    snr_linear: float
    omega: float = field(init=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rate_q) and self.rate_q > 0):
            raise DomainError("rate_q must be positive", {"rate_q": self.rate_q})
        if not (math.isfinite(self.snr_linear) and self.snr_linear > 0):
            raise DomainError("snr_linear must be positive", {"snr_linear": self.snr_linear})
        omega = math.sqrt(math.expm1(self.rate_q * math.log(2.0)) / self.snr_linear)
        object.__setattr__(self, "omega", omega)

    @classmethod
    def from_db(cls, rate_q: float, snr_db: float) -> 'OutageQuery':
        return cls(rate_q=rate_q, snr_linear=db_to_linear(snr_db))

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr_linear)


@dataclass(frozen=True)
class OutageEstimate:
    """
    An outage probability with its method tag and uncertainty.

    For Monte Carlo estimates ``std_error`` is sqrt(p(1 - p) / trials). For
    the series it is zero and ``truncation_order`` carries s0. ``raw_value``
    keeps the value before clamping to [0, 1].
    """
    probability: float
    std_error: float
    trials: int
    method: Method
    seed: Optional[int] = None
    truncation_order: Optional[int] = None
    raw_value: Optional[float] = None
    events: Optional[int] = None

    @classmethod
    def from_counts(cls, events: int, trials: int, seed: int) -> 'OutageEstimate':
        """Monte Carlo estimate from an integer event count."""
        p = events / trials
        return cls(
            probability=p,
            std_error=math.sqrt(p * (1.0 - p) / trials),
            trials=trials,
            method=Method.MONTE_CARLO,
            seed=seed,
            raw_value=p,
            events=events,
        )

    @property
    def uncertainty(self) -> float:
        """Standard error, or the truncation order for series values."""
        if self.method is Method.SERIES and self.truncation_order is not None:
            return float(self.truncation_order)
        return self.std_error


class OutageEvaluator(ABC):
    """
    Abstract interface for outage evaluators.

    This allows the CLI to drive Monte Carlo and every analytic method
    through the same calls.
    """

    @property
    @abstractmethod
    def method(self) -> Method:
        """Method tag of produced estimates."""
        pass

    @abstractmethod
    def evaluate(self, query: OutageQuery) -> OutageEstimate:
        """Evaluate the outage probability for one query."""
        pass

    def curve(
        self,
        rate_q: float,
        snr_grid_db: Sequence[float]
    ) -> List[Tuple[float, OutageEstimate]]:
        """Evaluate over an ascending SNR grid in dB."""
        if any(b < a for a, b in zip(snr_grid_db, list(snr_grid_db)[1:])):
            raise DomainError("SNR grid must be sorted ascending")
        return [
            (snr_db, self.evaluate(OutageQuery.from_db(rate_q, snr_db)))
            for snr_db in snr_grid_db
        ]


class Logger(ABC):
    """
    Abstract interface for logging.

    This allows for different logging implementations.
    """

    @abstractmethod
    def debug(self, message: str, **kwargs: Any) -> None:
        """Log a debug message."""
        pass

    @abstractmethod
    def info(self, message: str, **kwargs: Any) -> None:
        """Log an info message."""
        pass

    @abstractmethod
    def warning(self, message: str, **kwargs: Any) -> None:
        """Log a warning message."""
        pass

    @abstractmethod
    def error(self, message: str, **kwargs: Any) -> None:
        """Log an error message."""
        pass
