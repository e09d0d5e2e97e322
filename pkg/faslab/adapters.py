"""
Concrete implementations of the OutageEvaluator interface.

Each adapter binds one evaluation method to its model and settings so the
CLI can drive all methods through ``evaluate`` and ``curve``.
"""

import warnings
from typing import List, Optional, Sequence, Tuple

from .analytic import (
    AsymptoticApproximationWarning,
    QuadratureConfig,
    SeriesConfig,
    outage_eq15,
    outage_high_snr,
    outage_theorem1,
)
from .correlation import CorrelationModel
from .interfaces import Logger, Method, OutageEstimate, OutageEvaluator, OutageQuery
from .log import StandardLogger
from .simulate import MonteCarloSimulator, Scheme


class SeriesOutageEvaluator(OutageEvaluator):
    """Truncated-series outage of a small correlated array."""

    def __init__(self, model: CorrelationModel, cfg: SeriesConfig = SeriesConfig()):
        self.model = model
        self.cfg = cfg

    @property
    def method(self) -> Method:
        return Method.SERIES

    def evaluate(self, query: OutageQuery) -> OutageEstimate:
        return outage_theorem1(self.model, query, self.cfg)


class Eq15OutageEvaluator(OutageEvaluator):
    """Marcum-Q single-integral approximation with a fixed eps-rank."""

    def __init__(
        self,
        model: CorrelationModel,
        eps_rank: int,
        quadrature_cfg: QuadratureConfig = QuadratureConfig()
    ):
        self.model = model
        self.eps_rank = eps_rank
        self.quadrature_cfg = quadrature_cfg

    @property
    def method(self) -> Method:
        return Method.EQ15

    def evaluate(self, query: OutageQuery) -> OutageEstimate:
        return outage_eq15(self.model, query, self.eps_rank, self.quadrature_cfg)


class AsymptoteOutageEvaluator(OutageEvaluator):
    """
    High-SNR asymptote. Values above 1 are clamped in ``probability`` and
    kept in ``raw_value``.
    """

    def __init__(self, model: CorrelationModel, logger: Optional[Logger] = None):
        self.model = model
        self.logger = logger or StandardLogger("faslab.adapters")
        self._warned = False

    @property
    def method(self) -> Method:
        return Method.ASYMPTOTE

    def evaluate(self, query: OutageQuery) -> OutageEstimate:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AsymptoticApproximationWarning)
            raw = outage_high_snr(self.model, query)
        if not self._warned:
            self.logger.warning(
                "Asymptotic outage drops lower-order terms; trust it at high SNR only",
                n_ports=self.model.n_ports,
            )
            self._warned = True
        return OutageEstimate(
            probability=min(raw, 1.0),
            std_error=0.0,
            trials=0,
            method=Method.ASYMPTOTE,
            raw_value=raw,
        )


class MonteCarloOutageEvaluator(OutageEvaluator):
    """Monte Carlo outage of one scheme; curves share one sample."""

    def __init__(
        self,
        simulator: MonteCarloSimulator,
        scheme: Scheme,
        trials: int,
        seed: int
    ):
        self.simulator = simulator
        self.scheme = scheme
        self.trials = trials
        self.seed = seed

    @property
    def method(self) -> Method:
        return Method.MONTE_CARLO

    def evaluate(self, query: OutageQuery) -> OutageEstimate:
        return self.simulator.mc_outage(self.scheme, query, self.trials, self.seed)

    def curve(
        self,
        rate_q: float,
        snr_grid_db: Sequence[float]
    ) -> List[Tuple[float, OutageEstimate]]:
        return self.simulator.mc_outage_curve(
            self.scheme, rate_q, snr_grid_db, self.trials, self.seed
        )
