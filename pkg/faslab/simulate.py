"""
Monte Carlo outage estimation for FAS, SISO, SC and MRC receivers.

Every estimate is built from the counter-based batches of ``channel``:
batches are independent work units spread over a thread pool, and their
integer event counts are reduced exactly, so results depend on
(scheme, query, trials, seed) and the batch size only.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .channel import complex_gaussians, correlate, iter_batches
from .config import FasLabConfig, get_default_config
from .correlation import CorrelationModel, build_correlation
from .exceptions import DomainError, InsufficientEventsError
from .interfaces import Logger, OutageEstimate, OutageQuery, db_to_linear
from .log import StandardLogger


# Conventional antenna spacing of SC/MRC arrays, in wavelengths.
HALF_WAVELENGTH = 0.5

MIN_TRIALS = 1000
MIN_EVENTS = 100
DEEP_TAIL = 1e-4
DIVERSITY_RANGE = (1e-5, 1e-1)


class SchemeKind(Enum):
    FAS = "fas"
    SISO = "siso"
    SC = "sc"
    MRC = "mrc"


@dataclass(frozen=True)
class Scheme:
    """
    A receiver architecture.

    FAS switches to the strongest of ``n`` ports over ``width`` wavelengths.
    SC and MRC combine ``n`` antennas spaced half a wavelength apart, with
    their spatial correlation taken from the same Jakes model.
    """
    kind: SchemeKind
    n: int = 1
    width: float = HALF_WAVELENGTH

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError("scheme needs at least one port", {"n": self.n})
        if self.kind is SchemeKind.FAS and not self.width > 0:
            raise DomainError("FAS width must be positive", {"width": self.width})

    @classmethod
    def fas(cls, n_ports: int, width: float) -> 'Scheme':
        return cls(SchemeKind.FAS, n_ports, width)

    @classmethod
    def siso(cls) -> 'Scheme':
        return cls(SchemeKind.SISO, 1, HALF_WAVELENGTH)

    @classmethod
    def sc(cls, n_antennas: int) -> 'Scheme':
        return cls(SchemeKind.SC, n_antennas, _array_width(n_antennas))

    @classmethod
    def mrc(cls, n_antennas: int) -> 'Scheme':
        return cls(SchemeKind.MRC, n_antennas, _array_width(n_antennas))

    @property
    def label(self) -> str:
        if self.kind is SchemeKind.FAS:
            return f"FAS({self.n},{self.width:g})"
        if self.kind is SchemeKind.SISO:
            return "SISO"
        return f"{self.kind.name}({self.n})"

    @property
    def combines(self) -> bool:
        return self.kind is SchemeKind.MRC

    def correlation(self, sigma2: float = 1.0) -> CorrelationModel:
        return build_correlation(self.n, self.width, sigma2)


def _array_width(n_antennas: int) -> float:
    # Aperture of n elements at half-wavelength spacing.
    return max(n_antennas - 1, 1) * HALF_WAVELENGTH


def baseline_branches(width: float) -> int:
    """Active SC/MRC branches fitting an aperture: floor(W / 0.5) + 1."""
    return int(math.floor(width / HALF_WAVELENGTH + 1e-12)) + 1


def baseline_schemes(width: float, n_star: int, n_ports: int) -> List[Scheme]:
    """SISO, SC, suboptimal and full FAS, and MRC over one aperture."""
    branches = baseline_branches(width)
    return [
        Scheme.siso(),
        Scheme.sc(branches),
        Scheme.fas(n_star, width),
        Scheme.fas(n_ports, width),
        Scheme.mrc(branches),
    ]


@dataclass(frozen=True)
class PairedDifference:
    """outage(a) - outage(b) on common random numbers."""
    scheme_a: str
    scheme_b: str
    difference: float
    std_error: float

    @property
    def significant(self) -> bool:
        """Difference exceeds two paired standard errors."""
        return abs(self.difference) > 2.0 * self.std_error


@dataclass(frozen=True)
class ComparisonReport:
    """CRN-paired outage estimates of several schemes."""
    query: OutageQuery
    estimates: Tuple[Tuple[str, OutageEstimate], ...]
    differences: Tuple[PairedDifference, ...]

    @property
    def ranking(self) -> List[Tuple[str, OutageEstimate]]:
        """Schemes ordered from lowest to highest outage."""
        return sorted(self.estimates, key=lambda item: item[1].probability)

    def estimate(self, label: str) -> OutageEstimate:
        for name, estimate in self.estimates:
            if name == label:
                return estimate
        raise KeyError(label)

    def difference(self, label_a: str, label_b: str) -> PairedDifference:
        for diff in self.differences:
            if (diff.scheme_a, diff.scheme_b) == (label_a, label_b):
                return diff
            if (diff.scheme_b, diff.scheme_a) == (label_a, label_b):
                return PairedDifference(label_a, label_b, -diff.difference, diff.std_error)
        raise KeyError((label_a, label_b))


@dataclass(frozen=True)
class EnvelopeCdfComparison:
    """Empirical max-envelope CDFs of the exact and a truncated model."""
    radii: np.ndarray
    cdf_exact: np.ndarray
    cdf_truncated: np.ndarray
    keep: int
    trials: int
    seed: int

    @property
    def max_gap(self) -> float:
        return float(np.max(np.abs(self.cdf_exact - self.cdf_truncated)))


def _statistic(coefficients: np.ndarray, combines: bool) -> np.ndarray:
    power = coefficients.real ** 2 + coefficients.imag ** 2
    return power.sum(axis=1) if combines else power.max(axis=1)


class MonteCarloSimulator:
    """
    Batch-parallel Monte Carlo engine.

    Batches are drawn independently from the counter-based stream and
    dispatched to a thread pool capped by the runtime configuration.
    """

    def __init__(
        self,
        config: Optional[FasLabConfig] = None,
        logger: Optional[Logger] = None,
        sigma2: float = 1.0
    ):
        self.config = config or get_default_config()
        self.config.validate()
        self.logger = logger or StandardLogger("faslab.simulate")
        self.sigma2 = sigma2

    def _map_batches(
        self,
        trials: int,
        work: Callable[[int, int], np.ndarray]
    ) -> np.ndarray:
        if trials < MIN_TRIALS:
            raise DomainError(
                f"Monte Carlo needs at least {MIN_TRIALS} trials", {"trials": trials}
            )
        batches = list(iter_batches(trials, self.config.batch_size))
        workers = min(self.config.resolved_threads(), len(batches))
        self.logger.debug(
            "Dispatching Monte Carlo batches",
            batches=len(batches), workers=workers, trials=trials,
        )
        if workers <= 1:
            results = [work(index, rows) for index, rows in batches]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda b: work(*b), batches))
        total = np.zeros_like(results[0])
        for counts in results:
            total += counts
        return total

    def _models(self, schemes: Sequence[Scheme]) -> List[CorrelationModel]:
        return [scheme.correlation(self.sigma2) for scheme in schemes]

    def _deep_tail_check(self, estimate: OutageEstimate, label: str) -> None:
        if 0 < estimate.probability < DEEP_TAIL and estimate.trials < self.config.deep_tail_trials:
            self.logger.warning(
                "Deep-tail outage estimated with too few trials",
                scheme=label, probability=estimate.probability, trials=estimate.trials,
            )

    def curve_counts(
        self,
        schemes: Sequence[Scheme],
        thresholds: Sequence[float],
        trials: int,
        seed: int
    ) -> np.ndarray:
        """
        Outage event counts, shape (schemes, thresholds).

        All schemes share one draw per batch; scheme s uses its leading
        ``n`` eigen-domain columns.
        """
        models = self._models(schemes)
        width = max(model.n_ports for model in models)
        squared = np.asarray(thresholds, dtype=float) ** 2

        def work(index: int, rows: int) -> np.ndarray:
            z = complex_gaussians(seed, index, rows, width)
            counts = np.empty((len(schemes), squared.size), dtype=np.int64)
            for row, (scheme, model) in enumerate(zip(schemes, models)):
                stat = np.sort(_statistic(correlate(z, model), scheme.combines))
                counts[row] = np.searchsorted(stat, squared, side="left")
            return counts

        return self._map_batches(trials, work)

    def mc_outage(
        self,
        scheme: Scheme,
        query: OutageQuery,
        trials: int = 1_000_000,
        seed: int = 0
    ) -> OutageEstimate:
        """Monte Carlo outage of one scheme at one query."""
        counts = self.curve_counts([scheme], [query.omega], trials, seed)
        estimate = OutageEstimate.from_counts(int(counts[0, 0]), trials, seed)
        self._deep_tail_check(estimate, scheme.label)
        return estimate

    def mc_outage_curve(
        self,
        scheme: Scheme,
        rate_q: float,
        snr_grid_db: Sequence[float],
        trials: int = 1_000_000,
        seed: int = 0
    ) -> List[Tuple[float, OutageEstimate]]:
        """
        Outage over an ascending SNR grid on one shared sample.

        Raises:
            DomainError: If the grid is not sorted ascending
        """
        grid = [float(s) for s in snr_grid_db]
        if not grid or any(b < a for a, b in zip(grid, grid[1:])):
            raise DomainError("SNR grid must be non-empty and sorted ascending", {"grid": grid})
        queries = [OutageQuery(rate_q, db_to_linear(s)) for s in grid]
        counts = self.curve_counts([scheme], [q.omega for q in queries], trials, seed)

        curve = []
        for snr_db, events in zip(grid, counts[0]):
            estimate = OutageEstimate.from_counts(int(events), trials, seed)
            self._deep_tail_check(estimate, scheme.label)
            curve.append((snr_db, estimate))
        return curve

    def empirical_diversity(
        self,
        scheme: Scheme,
        rate_q: float,
        snr_window_db: Sequence[float],
        trials: int = 1_000_000,
        seed: int = 0
    ) -> float:
        """
        Negated least-squares slope of log10 outage against log10 SNR.

        Raises:
            InsufficientEventsError: If any grid point has fewer than 100 events
        """
        if len(snr_window_db) < 2:
            raise DomainError("diversity window needs at least two SNR points")
        curve = self.mc_outage_curve(scheme, rate_q, snr_window_db, trials, seed)

        for snr_db, estimate in curve:
            events = estimate.events or 0
            if events < MIN_EVENTS:
                raise InsufficientEventsError(
                    f"Only {events} outage events at {snr_db} dB; raise trials or lower SNR",
                    events=events,
                    details={"snr_db": snr_db, "trials": trials},
                )
            low, high = DIVERSITY_RANGE
            if not low <= estimate.probability <= high:
                self.logger.warning(
                    "Diversity window leaves the high-SNR regime",
                    snr_db=snr_db, probability=estimate.probability,
                )

        x = np.array([snr_db / 10.0 for snr_db, _ in curve])
        y = np.log10([estimate.probability for _, estimate in curve])
        slope, _ = np.polyfit(x, y, 1)
        return float(-slope)

    def compare_schemes(
        self,
        schemes: Sequence[Scheme],
        query: OutageQuery,
        trials: int = 1_000_000,
        seed: int = 0
    ) -> ComparisonReport:
        """
        Paired outage estimates with standard errors of every pairwise gap.

        Raises:
            DomainError: If fewer than two schemes are given
        """
        if len(schemes) < 2:
            raise DomainError("compare_schemes needs at least two schemes")
        models = self._models(schemes)
        width = max(model.n_ports for model in models)
        squared = query.omega ** 2
        n = len(schemes)

        def work(index: int, rows: int) -> np.ndarray:
            z = complex_gaussians(seed, index, rows, width)
            flags = np.stack([
                _statistic(correlate(z, model), scheme.combines) < squared
                for scheme, model in zip(schemes, models)
            ])
            # Diagonal: event counts; off-diagonal: trials where exactly one fails.
            counts = np.empty((n, n), dtype=np.int64)
            for i in range(n):
                counts[i] = np.count_nonzero(flags[i] != flags, axis=1)
                counts[i, i] = np.count_nonzero(flags[i])
            return counts

        counts = self._map_batches(trials, work)
        labels = [scheme.label for scheme in schemes]
        estimates = []
        for i, label in enumerate(labels):
            estimate = OutageEstimate.from_counts(int(counts[i, i]), trials, seed)
            self._deep_tail_check(estimate, label)
            estimates.append((label, estimate))

        differences = []
        for i in range(n):
            for j in range(i + 1, n):
                mean = (counts[i, i] - counts[j, j]) / trials
                second = counts[i, j] / trials
                variance = max(second - mean * mean, 0.0)
                differences.append(PairedDifference(
                    labels[i], labels[j], float(mean), math.sqrt(variance / trials)
                ))

        self.logger.info("Compared schemes", schemes=",".join(labels), trials=trials)
        return ComparisonReport(query, tuple(estimates), tuple(differences))

    def envelope_cdf_comparison(
        self,
        model: CorrelationModel,
        keep: int,
        radii: Sequence[float],
        trials: int = 1_000_000,
        seed: int = 0
    ) -> EnvelopeCdfComparison:
        """Empirical max-envelope CDFs of the exact and rank-``keep`` models."""
        if not 1 <= keep <= model.n_ports:
            raise DomainError("keep must lie in [1, n_ports]", {"keep": keep})
        grid = np.asarray(radii, dtype=float)
        squared = grid ** 2

        def work(index: int, rows: int) -> np.ndarray:
            z = complex_gaussians(seed, index, rows, model.n_ports)
            counts = np.empty((2, grid.size), dtype=np.int64)
            for row, order in enumerate((model.n_ports, keep)):
                stat = np.sort(_statistic(correlate(z, model, order), False))
                counts[row] = np.searchsorted(stat, squared, side="right")
            return counts

        counts = self._map_batches(trials, work)
        return EnvelopeCdfComparison(
            radii=grid,
            cdf_exact=counts[0] / trials,
            cdf_truncated=counts[1] / trials,
            keep=keep,
            trials=trials,
            seed=seed,
        )


_DEFAULT_SIMULATOR: Dict[str, MonteCarloSimulator] = {}


def _default() -> MonteCarloSimulator:
    if "default" not in _DEFAULT_SIMULATOR:
        _DEFAULT_SIMULATOR["default"] = MonteCarloSimulator()
    return _DEFAULT_SIMULATOR["default"]


def mc_outage(scheme: Scheme, query: OutageQuery, trials: int = 1_000_000, seed: int = 0) -> OutageEstimate:
    return _default().mc_outage(scheme, query, trials, seed)


def mc_outage_curve(
    scheme: Scheme,
    rate_q: float,
    snr_grid_db: Sequence[float],
    trials: int = 1_000_000,
    seed: int = 0
) -> List[Tuple[float, OutageEstimate]]:
    return _default().mc_outage_curve(scheme, rate_q, snr_grid_db, trials, seed)


def empirical_diversity(
    scheme: Scheme,
    rate_q: float,
    snr_window_db: Sequence[float],
    trials: int = 1_000_000,
    seed: int = 0
) -> float:
    return _default().empirical_diversity(scheme, rate_q, snr_window_db, trials, seed)


def compare_schemes(
    schemes: Sequence[Scheme],
    query: OutageQuery,
    trials: int = 1_000_000,
    seed: int = 0
) -> ComparisonReport:
    return _default().compare_schemes(schemes, query, trials, seed)
