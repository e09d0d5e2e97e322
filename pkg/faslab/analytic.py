"""
Closed-form and semi-analytic outage evaluators.

The joint envelope PDF/CDF of a correlated N-port antenna is expanded in a
truncated series over multi-indices k (one entry per port pair) whose phase
integrals reduce to admissible-v indicator counts. The series is exact in
the limit and tractable for small N only; larger arrays use the Marcum-Q
single-integral approximation, the high-SNR asymptote or Monte Carlo.
"""

import math
import threading
import warnings
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from .correlation import (
    DEFAULT_NPRIME_TOL,
    DEFAULT_SURROGATE_N,
    CorrelationModel,
    build_correlation,
    numerical_rank,
    reference_rank_nprime,
)
from .channel import residual_powers
from .exceptions import (
    DomainError,
    NearSingularError,
    QuadratureError,
    SeriesCapError,
    SeriesConvergenceError,
)
from .interfaces import Method, OutageEstimate, OutageQuery
from .specfun import gamma_lower_upper, marcum_q1


LN2 = math.log(2.0)

# Residual power below this fraction of sigma2 is treated as zero.
NEGLIGIBLE_POWER = 1e-12

# Effective port count of the single-integral approximation: 1.52 (N - 1) / (2 pi W).
EFFECTIVE_PORTS_SLOPE = 1.52


class AsymptoticApproximationWarning(UserWarning):
    """High-SNR asymptote used; lower-order terms are dropped."""


@dataclass(frozen=True)
class SeriesConfig:
    """
    Truncation order and port cap of the series evaluators.

    The CDF starts at ``s0`` and is accepted once it lies in [-tol, 1 + tol]
    and moves by at most ``tol`` between orders ``s - step`` and ``s``.
    Otherwise the order rises by ``step``, at most ``escalation`` orders
    past ``s0`` and never to a table larger than ``max_terms`` multi-indices.
    ``escalation=0`` fixes the order and keeps only the range check.
    """
    s0: int = 20
    max_ports: int = 4
    escalation: int = 60
    step: int = 10
    tol: float = 1e-6
    max_terms: int = 250_000

    def __post_init__(self) -> None:
        if self.s0 < 0:
            raise DomainError("s0 must be non-negative", {"s0": self.s0})
        if self.max_ports < 1:
            raise DomainError("max_ports must be at least 1", {"max_ports": self.max_ports})
        if self.escalation < 0 or self.step < 1:
            raise DomainError(
                "escalation must be non-negative and step positive",
                {"escalation": self.escalation, "step": self.step},
            )
        if not self.tol > 0:
            raise DomainError("tol must be positive", {"tol": self.tol})

    @property
    def max_s0(self) -> int:
        return self.s0 + self.escalation

    @property
    def fixed(self) -> bool:
        return self.escalation == 0


@dataclass(frozen=True)
class QuadratureConfig:
    """Adaptive quadrature settings of the single-integral approximation."""
    epsabs: float = 1e-10
    epsrel: float = 1e-8
    limit: int = 200
    tail: float = 1e-14


@dataclass(frozen=True)
class NPrimeConfig:
    """Surrogate size and tolerance of the dense-port reference rank."""
    surrogate_n: int = DEFAULT_SURROGATE_N
    rel_tol: float = DEFAULT_NPRIME_TOL


@dataclass(frozen=True)
class SeriesResult:
    """Series value clamped to its valid range, with the raw sum kept."""
    value: float
    raw_value: float
    s0: int
    terms: int


# Port pairs ---------------------------------------------------------------

def pair_index(m: int, n: int, n_ports: int) -> int:
    """
    1-based index t of the port pair (m, n), 1 <= m < n <= N.

    t = n + (m - 1) N - m (m + 1) / 2
    """
    if not 1 <= m < n <= n_ports:
        raise DomainError("pair requires 1 <= m < n <= N", {"m": m, "n": n, "N": n_ports})
    return n + (m - 1) * n_ports - m * (m + 1) // 2


def pair_from_index(t: int, n_ports: int) -> Tuple[int, int]:
    """
    Inverse of ``pair_index``.

    m is the smallest m' whose cumulative pair count sum_{i <= m'} (N - i)
    reaches t.
    """
    total = n_ports * (n_ports - 1) // 2
    if not 1 <= t <= total:
        raise DomainError("pair index out of range", {"t": t, "N": n_ports})
    cumulative = 0
    for m in range(1, n_ports):
        cumulative += n_ports - m
        if cumulative >= t:
            n = t - (m - 1) * n_ports + m * (m + 1) // 2
            return m, n
    raise DomainError("pair index out of range", {"t": t, "N": n_ports})


# Indicator tables ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IndicatorTables:
    """
    Admissible multi-indices of the series for given (N, s0).

    ``multi_indices[i]`` is a multi-index k over the T = N(N-1)/2 pairs and
    ``counts[i]`` the weighted number of admissible v vectors, i.e. the
    number of sign patterns whose phases cancel at every port, weighted by
    the binomial multiplicities. The phase-integral weight of k is
    g(k) = (2 pi)^N 2^{-|k|} counts[i].
    """
    n_ports: int
    s0: int
    pairs: Tuple[Tuple[int, int], ...]
    multi_indices: np.ndarray
    counts: Tuple[int, ...]

    @property
    def incidence(self) -> np.ndarray:
        """(T, N) 0/1 matrix marking the two ports of each pair."""
        inc = np.zeros((len(self.pairs), self.n_ports), dtype=int)
        for t, (m, n) in enumerate(self.pairs):
            inc[t, m] = 1
            inc[t, n] = 1
        return inc

    @property
    def log_counts(self) -> np.ndarray:
        return np.array([math.log(c) for c in self.counts], dtype=float)

    def weight(self, multi_index: Sequence[int]) -> float:
        """g(k) for one multi-index; zero when k is not admissible."""
        key = tuple(int(v) for v in multi_index)
        for row, count in zip(self.multi_indices, self.counts):
            if tuple(int(v) for v in row) == key:
                return (2.0 * math.pi) ** self.n_ports * 2.0 ** (-sum(key)) * count
        return 0.0


def _enumerate_admissible(n_ports: int, s0: int) -> Dict[Tuple[int, ...], int]:
    # Depth-first over pairs in index order. Pair (m, n) contributes
    # +gamma to port n and -gamma to port m with gamma = 2v - k. The last
    # pair of port m, (m, N-1), is forced to cancel port m's running phase.
    pairs = [(m, n) for m in range(n_ports) for n in range(m + 1, n_ports)]
    n_pairs = len(pairs)
    counts: Dict[Tuple[int, ...], int] = {}
    k = [0] * n_pairs
    phase = [0] * n_ports

    def visit(t: int, budget: int, weight: int) -> None:
        if t == n_pairs:
            if not any(phase):
                key = tuple(k)
                counts[key] = counts.get(key, 0) + weight
            return
        m, n = pairs[t]
        if n == n_ports - 1:
            gamma = phase[m]
            phase[m] -= gamma
            phase[n] += gamma
            for kt in range(abs(gamma), budget + 1, 2):
                k[t] = kt
                visit(t + 1, budget - kt, weight * math.comb(kt, (kt + gamma) // 2))
            phase[m] += gamma
            phase[n] -= gamma
        else:
            for kt in range(budget + 1):
                k[t] = kt
                for v in range(kt + 1):
                    gamma = 2 * v - kt
                    phase[m] -= gamma
                    phase[n] += gamma
                    visit(t + 1, budget - kt, weight * math.comb(kt, v))
                    phase[m] += gamma
                    phase[n] -= gamma
        k[t] = 0

    visit(0, s0, 1)
    return counts


class IndicatorCache:
    """Thread-safe memo of indicator tables keyed by (N, s0)."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._tables: Dict[Tuple[int, int], IndicatorTables] = {}

    def get(self, n_ports: int, s0: int) -> IndicatorTables:
        key = (n_ports, s0)
        with self._lock:
            tables = self._tables.get(key)
            if tables is None:
                tables = self._build(n_ports, s0)
                self._tables[key] = tables
            return tables

    @staticmethod
    def _build(n_ports: int, s0: int) -> IndicatorTables:
        counts = _enumerate_admissible(n_ports, s0)
        keys = sorted(counts, key=lambda key: (sum(key), key))
        n_pairs = n_ports * (n_ports - 1) // 2
        indices = np.array(keys, dtype=int).reshape(len(keys), n_pairs)
        indices.setflags(write=False)
        pairs = tuple((m, n) for m in range(n_ports) for n in range(m + 1, n_ports))
        return IndicatorTables(
            n_ports=n_ports,
            s0=s0,
            pairs=pairs,
            multi_indices=indices,
            counts=tuple(counts[key] for key in keys),
        )


_INDICATOR_CACHE = IndicatorCache()


def indicator_tables(n_ports: int, s0: int) -> IndicatorTables:
    """Memoized indicator tables for (N, s0)."""
    return _INDICATOR_CACHE.get(n_ports, s0)


# Series evaluators --------------------------------------------------------

def _require_invertible(model: CorrelationModel) -> np.ndarray:
    if model.near_singular or model.cofactor_k is None:
        raise NearSingularError(
            "Correlation matrix is near-singular; reduce to N* ports over the same aperture",
            suggested_ports=algorithm1_nstar(model, 0.01 * model.sigma2),
            details={"det_j": model.det_j, "condition": model.condition_estimate},
        )
    return model.cofactor_k


def _require_series(model: CorrelationModel, cfg: SeriesConfig) -> np.ndarray:
    if model.n_ports > cfg.max_ports:
        raise SeriesCapError(
            f"Series evaluation is capped at {cfg.max_ports} ports (got {model.n_ports}); "
            "the term count grows combinatorially with N(N-1)/2 pairs. "
            "Use eq15, asymptote or mc instead.",
            n_ports=model.n_ports,
            max_ports=cfg.max_ports,
        )
    return _require_invertible(model)


def _check_radii(values: Sequence[float], n_ports: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n_ports,):
        raise DomainError(f"{name} must have one entry per port", {"shape": arr.shape})
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be finite and non-negative")
    return arr


def _coupling_terms(
    model: CorrelationModel,
    tables: IndicatorTables,
    cofactor: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    # Per multi-index: log|prod_t c_t^k_t / k_t!| and its sign,
    # with c_t = -2 K_mn / det J.
    det = model.det_j
    coupling = np.array([-2.0 * cofactor[m, n] / det for m, n in tables.pairs], dtype=float)
    idx = tables.multi_indices
    if idx.shape[1] == 0:
        zeros = np.zeros(idx.shape[0])
        return zeros, np.ones(idx.shape[0])
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(coupling))
    weighted = np.where(idx > 0, idx * log_abs, 0.0)
    log_mag = weighted.sum(axis=1) - special.gammaln(idx + 1).sum(axis=1)
    negatives = (idx * (coupling < 0)).sum(axis=1)
    sign = np.where(negatives % 2 == 0, 1.0, -1.0)
    return log_mag, sign


def _sum_terms(log_terms: np.ndarray, sign: np.ndarray) -> float:
    with np.errstate(under="ignore"):
        terms = sign * np.exp(log_terms)
    return math.fsum(terms[np.isfinite(terms)])


def joint_pdf_series(
    model: CorrelationModel,
    envelopes: Sequence[float],
    cfg: SeriesConfig = SeriesConfig()
) -> SeriesResult:
    """
    Truncated-series joint PDF of the N port envelopes.

    Raises:
        SeriesCapError: If N exceeds cfg.max_ports
        NearSingularError: If J is near-singular
    """
    cofactor = _require_series(model, cfg)
    r = _check_radii(envelopes, model.n_ports, "envelopes")
    tables = indicator_tables(model.n_ports, cfg.s0)
    if np.any(r == 0):
        return SeriesResult(0.0, 0.0, cfg.s0, len(tables.counts))

    n = model.n_ports
    det = model.det_j
    diag = np.diag(cofactor) / det
    log_eta = (
        np.sum(np.log(r)) - n * math.log(math.pi) - math.log(det) - float(np.sum(diag * r * r))
    )
    log_mag, sign = _coupling_terms(model, tables, cofactor)
    exponents = tables.multi_indices @ tables.incidence
    log_radial = exponents @ np.log(r)
    totals = tables.multi_indices.sum(axis=1)

    log_terms = (
        log_eta + n * math.log(2.0 * math.pi) + tables.log_counts - totals * LN2
        + log_mag + log_radial
    )
    raw = _sum_terms(log_terms, sign)
    return SeriesResult(max(raw, 0.0), raw, cfg.s0, len(tables.counts))


def _cdf_terms(
    model: CorrelationModel,
    radius: np.ndarray,
    cofactor: np.ndarray,
    s0: int
) -> Tuple[np.ndarray, np.ndarray, int]:
    # Signed CDF terms and their orders |k| at truncation order s0.
    tables = indicator_tables(model.n_ports, s0)
    n = model.n_ports
    det = model.det_j
    diag = np.diag(cofactor) / det
    log_mag, sign = _coupling_terms(model, tables, cofactor)
    shape = (tables.multi_indices @ tables.incidence) / 2.0 + 1.0
    lower, _ = gamma_lower_upper(shape, np.broadcast_to(diag * radius * radius, shape.shape))
    with np.errstate(divide="ignore"):
        log_radial = (-LN2 - shape * np.log(diag) + np.log(lower)).sum(axis=1)
    totals = tables.multi_indices.sum(axis=1)

    log_terms = (
        n * LN2 - math.log(det) + tables.log_counts - totals * LN2 + log_mag + log_radial
    )
    with np.errstate(under="ignore", over="ignore"):
        terms = sign * np.exp(log_terms)
    return terms, totals, len(tables.counts)


def joint_cdf_series(
    model: CorrelationModel,
    radii: Sequence[float],
    cfg: SeriesConfig = SeriesConfig()
) -> SeriesResult:
    """
    Truncated-series joint CDF P(|h_1| < R_1, ..., |h_N| < R_N).

    Each term integrates radially in closed form through the lower
    incomplete gamma function. The truncation order is raised until the
    sum settles (see ``SeriesConfig``); the accepted sum is clamped to
    [0, 1] and ``s0`` of the result is the order actually used.

    Raises:
        SeriesCapError: If N exceeds cfg.max_ports
        NearSingularError: If J is near-singular
        SeriesConvergenceError: If no permitted order settles
    """
    cofactor = _require_series(model, cfg)
    radius = _check_radii(radii, model.n_ports, "radii")
    if np.any(radius == 0):
        return SeriesResult(0.0, 0.0, cfg.s0, len(indicator_tables(model.n_ports, cfg.s0).counts))

    n_pairs = model.n_ports * (model.n_ports - 1) // 2
    order = cfg.s0
    while True:
        terms, totals, count = _cdf_terms(model, radius, cofactor, order)
        finite = bool(np.all(np.isfinite(terms)))
        raw = math.fsum(terms) if finite else math.inf
        settled = finite and -cfg.tol <= raw <= 1.0 + cfg.tol
        shell = 0.0
        if settled and not cfg.fixed:
            shell = math.fsum(terms[totals > order - cfg.step])
            settled = abs(shell) <= cfg.tol
        if settled:
            return SeriesResult(min(1.0, max(0.0, raw)), raw, order, count)

        following = order + cfg.step
        if following > cfg.max_s0 or math.comb(following + n_pairs, n_pairs) > cfg.max_terms:
            raise SeriesConvergenceError(
                f"Series CDF did not converge by order {order}; "
                "the port coupling is too strong for this threshold. Use mc or eq15 instead.",
                raw_value=raw,
                s0=order,
                details={"last_shell": shell, "radii": radius.tolist(), "n_ports": model.n_ports},
            )
        order = following


def outage_theorem1(
    model: CorrelationModel,
    query: OutageQuery,
    cfg: SeriesConfig = SeriesConfig()
) -> OutageEstimate:
    """
    Series outage: the joint CDF with every radius at the threshold Omega.

    Raises:
        SeriesConvergenceError: If the series does not settle
    """
    result = joint_cdf_series(model, np.full(model.n_ports, query.omega), cfg)
    return OutageEstimate(
        probability=result.value,
        std_error=0.0,
        trials=0,
        method=Method.SERIES,
        truncation_order=result.s0,
        raw_value=result.raw_value,
    )


# Reference oracles --------------------------------------------------------

def _bivariate_parts(model: CorrelationModel) -> Tuple[float, float, float, float]:
    if model.n_ports != 2:
        raise DomainError("bivariate oracle requires N = 2", {"n_ports": model.n_ports})
    cofactor = _require_invertible(model)
    det = model.det_j
    return cofactor[0, 0] / det, cofactor[1, 1] / det, -2.0 * cofactor[0, 1] / det, det


def bivariate_pdf_quadrature(model: CorrelationModel, r1: float, r2: float) -> float:
    """
    Exact two-port envelope density with the phases integrated numerically.
    """
    a1, a2, c, det = _bivariate_parts(model)
    if r1 <= 0 or r2 <= 0:
        return 0.0
    zeta = c * r1 * r2
    phase, _ = integrate.quad(
        lambda phi: math.exp(zeta * (math.cos(phi) - 1.0)) if zeta > 0
        else math.exp(zeta * (math.cos(phi) + 1.0)),
        0.0, 2.0 * math.pi, epsabs=1e-13, epsrel=1e-12, limit=200,
    )
    log_eta = math.log(r1 * r2) - 2.0 * math.log(math.pi) - math.log(det) - a1 * r1 ** 2 - a2 * r2 ** 2
    return float(2.0 * math.pi * phase * math.exp(log_eta + abs(zeta)))


def bivariate_cdf_quadrature(model: CorrelationModel, radius_1: float, radius_2: float) -> float:
    """
    Exact two-port joint envelope CDF by 2-D adaptive quadrature.

    Raises:
        QuadratureError: If the integration error estimate exceeds 1e-8
    """
    a1, a2, c, det = _bivariate_parts(model)
    if radius_1 <= 0 or radius_2 <= 0:
        return 0.0
    scale = 4.0 / det

    def density(r2: float, r1: float) -> float:
        zeta = abs(c) * r1 * r2
        return float(
            scale * r1 * r2 * math.exp(zeta - a1 * r1 * r1 - a2 * r2 * r2) * special.i0e(zeta)
        )

    value, abserr = integrate.dblquad(
        density, 0.0, radius_1, 0.0, radius_2, epsabs=1e-11, epsrel=1e-10
    )
    if abserr > 1e-8:
        raise QuadratureError(
            "bivariate CDF quadrature did not converge",
            {"abserr": abserr, "radii": (radius_1, radius_2)},
        )
    return min(1.0, max(0.0, float(value)))


def siso_outage(omega: float, sigma2: float = 1.0) -> float:
    """Rayleigh outage 1 - exp(-Omega^2 / sigma2)."""
    return -math.expm1(-omega * omega / sigma2)


def mrc_independent_outage(n_branches: int, omega: float, sigma2: float = 1.0) -> float:
    """MRC outage over independent branches: P(n, Omega^2 / sigma2)."""
    return float(special.gammainc(n_branches, omega * omega / sigma2))


# Single-integral approximation --------------------------------------------

def effective_ports(model: CorrelationModel) -> float:
    """Real-valued L = min(1.52 (N - 1) / (2 pi W), N); a single port gives 1."""
    if model.n_ports == 1:
        return 1.0
    spread = EFFECTIVE_PORTS_SLOPE * (model.n_ports - 1) / (2.0 * math.pi * model.width)
    return float(min(spread, model.n_ports))


def _port_integral(
    mu: float,
    psi2: float,
    omega: float,
    exponent: float,
    quadrature_cfg: QuadratureConfig
) -> Tuple[float, float]:
    if psi2 <= 0.0:
        return -math.expm1(-omega * omega / mu), 0.0
    if mu <= 0.0:
        return (-math.expm1(-omega * omega / psi2)) ** exponent, 0.0

    psi = math.sqrt(psi2)
    b = math.sqrt(2.0) * omega / psi

    def integrand(r: float) -> float:
        bracket = 1.0 - marcum_q1(math.sqrt(2.0 * r) / psi, b)
        return math.exp(-r / mu) / mu * bracket ** exponent

    upper = mu * math.log(1.0 / quadrature_cfg.tail)
    breakpoints = [omega * omega] if 0.0 < omega * omega < upper else None
    result = integrate.quad(
        integrand, 0.0, upper,
        epsabs=quadrature_cfg.epsabs, epsrel=quadrature_cfg.epsrel,
        limit=quadrature_cfg.limit, points=breakpoints, full_output=1,
    )
    value, abserr = float(result[0]), float(result[1])
    if len(result) > 3 and abserr > max(1e3 * quadrature_cfg.epsabs, 1e-6 * abs(value)):
        raise QuadratureError(
            "single-integral outage quadrature did not converge",
            {"mu": mu, "psi2": psi2, "omega": omega, "abserr": abserr, "message": result[3]},
        )
    return value, abserr


def outage_eq15(
    model: CorrelationModel,
    query: OutageQuery,
    eps_rank: int,
    quadrature_cfg: QuadratureConfig = QuadratureConfig()
) -> OutageEstimate:
    """
    Single-integral outage approximation of the eps-rank channel model.

    Each port contributes one Marcum-Q integral; the product over ports is
    raised to 1/L with the effective port count L used as a real exponent.

    Raises:
        DomainError: If eps_rank is outside [1, N]
        QuadratureError: If a port integral does not converge
    """
    if not 1 <= eps_rank <= model.n_ports:
        raise DomainError(
            "eps_rank must lie in [1, n_ports]", {"eps_rank": eps_rank, "n_ports": model.n_ports}
        )
    omega = query.omega
    exponent = effective_ports(model)
    mu = (model.eigvecs[:, :eps_rank] ** 2) @ model.clipped_eigvals[:eps_rank]
    psi2 = residual_powers(model, eps_rank)
    psi2 = np.where(psi2 <= NEGLIGIBLE_POWER * model.sigma2, 0.0, psi2)
    mu = np.where(mu <= NEGLIGIBLE_POWER * model.sigma2, 0.0, mu)

    # Ports mirrored about the array centre share (mu, psi2).
    memo: Dict[Tuple[float, float], Tuple[float, float]] = {}
    log_total = 0.0
    error = 0.0
    for mu_n, psi2_n in zip(mu, psi2):
        key = (round(float(mu_n), 13), round(float(psi2_n), 13))
        if key not in memo:
            memo[key] = _port_integral(float(mu_n), float(psi2_n), omega, exponent, quadrature_cfg)
        value, abserr = memo[key]
        error += abserr
        if value <= 0.0:
            log_total = -math.inf
            break
        log_total += math.log(value)

    raw = math.exp(log_total / exponent) if math.isfinite(log_total) else 0.0
    return OutageEstimate(
        probability=min(1.0, max(0.0, raw)),
        std_error=error,
        trials=0,
        method=Method.EQ15,
        raw_value=raw,
    )


# Asymptote, diversity and port reduction -----------------------------------

def outage_high_snr(model: CorrelationModel, query: OutageQuery) -> float:
    """
    High-SNR outage asymptote Omega^{2N} / det J.

    Raises:
        NearSingularError: If J is near-singular
    """
    _require_invertible(model)
    warnings.warn(
        "outage_high_snr drops lower-order terms and is accurate only at high SNR",
        AsymptoticApproximationWarning,
        stacklevel=2,
    )
    return float(math.exp(2 * model.n_ports * math.log(query.omega) - math.log(model.det_j)))


def diversity_gain(model: CorrelationModel, nprime_cfg: NPrimeConfig = NPrimeConfig()) -> int:
    """Diversity order min(N, N')."""
    if model.n_ports == 1:
        return 1
    nprime = reference_rank_nprime(
        model.width, model.sigma2, nprime_cfg.surrogate_n, nprime_cfg.rel_tol
    )
    return min(model.n_ports, nprime)


def algorithm1_nstar(
    model: CorrelationModel,
    eps_tol: float,
    rank_tol: Optional[float] = None
) -> int:
    """
    Smallest port count N* whose leading eigenvalue mass reaches
    sigma2 - eps_tol, never above the numerical rank.

    eps_n = sigma2 - (1/N) sum_{i <= n} lambda_i.
    """
    if not eps_tol > 0:
        raise DomainError("eps_tol must be positive", {"eps_tol": eps_tol})
    rank = numerical_rank(model, rank_tol).numerical_rank
    mass = np.cumsum(model.clipped_eigvals) / model.n_ports

    n = 1
    eps = model.sigma2 - mass[0]
    while eps_tol < eps and n < rank:
        n += 1
        eps = model.sigma2 - mass[n - 1]
    return n


def flop_estimate(n_ports: int, n_star: int) -> int:
    """Flop count 21 N^3 + 6 N^2 + N*^2 / 2 + 3 N* / 2 of selecting N*."""
    if not 1 <= n_star <= n_ports:
        raise DomainError("require 1 <= n_star <= n_ports", {"n_ports": n_ports, "n_star": n_star})
    return 21 * n_ports ** 3 + 6 * n_ports ** 2 + n_star * (n_star + 3) // 2


def reduce_to_nstar(
    model: CorrelationModel,
    eps_tol: float,
    rank_tol: Optional[float] = None
) -> CorrelationModel:
    """N*-port model over the same aperture, for near-singular inputs."""
    n_star = algorithm1_nstar(model, eps_tol, rank_tol)
    return build_correlation(n_star, model.width, model.sigma2)


def series_terms(tables: IndicatorTables) -> List[Tuple[Tuple[int, ...], int]]:
    """(multi-index, count) pairs of a table, lowest order first."""
    return [
        (tuple(int(v) for v in row), count)
        for row, count in zip(tables.multi_indices, tables.counts)
    ]
