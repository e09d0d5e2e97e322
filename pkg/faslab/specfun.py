"""
Special-function kernel.

Bessel J0 of real argument, the complete/upper incomplete gamma pair and the
first-order Marcum Q function, each with an accuracy contract. All functions
are pure and safe to call concurrently.
"""

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy import integrate, special
from typing_extensions import TypeAlias

from .exceptions import DomainError, QuadratureError


ArrayLike: TypeAlias = Union[float, np.ndarray]

# |x| at or below this uses the power series, above it the Hankel expansion.
J0_SERIES_LIMIT = 12.0

_J0_SERIES_TERMS = 60
_J0_ASYMPTOTIC_TERMS = 60

# a*b above this switches Marcum Q to quadrature.
MARCUM_SERIES_LIMIT = 30.0

_MARCUM_BLOCK = 32
# Half-width of the quadrature window; the integrand carries exp(-(x - a)^2 / 2).
_MARCUM_QUAD_SPAN = 40.0
_MARCUM_MAX_TERMS = 4096


@dataclass(frozen=True)
class AccuracySpec:
    """Absolute and relative tolerance of a special-function evaluation."""
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError(
                "Accuracy tolerances must be strictly positive",
                {"abs_tol": self.abs_tol, "rel_tol": self.rel_tol},
            )


DEFAULT_ACCURACY = AccuracySpec()


def _j0_power_series(x: np.ndarray) -> np.ndarray:
    q = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, _J0_SERIES_TERMS):
        term = term * (-q) / (k * k)
        total = total + term
    return total


def _j0_asymptotic(x: np.ndarray) -> np.ndarray:
    # P and Q of the Hankel expansion, each stopped at its smallest term.
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, _J0_ASYMPTOTIC_TERMS):
        nxt = term * (2 * k - 1) ** 2 / (8.0 * k * x)
        active &= (nxt < term) & (term > 1e-17)
        if not active.any():
            break
        term = np.where(active, nxt, term)
        contribution = np.where(active, nxt, 0.0)
        if k % 2 == 0:
            p = p + (-1) ** (k // 2) * contribution
        else:
            q = q + (-1) ** ((k + 1) // 2) * contribution
    chi = x - 0.25 * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j0(x: ArrayLike) -> ArrayLike:
    """
    Bessel function of the first kind, order zero.

    Accepts a scalar or an array; scalars return a Python float. Evaluation
    depends on |x| only, so J0(-x) == J0(x) exactly.

    Raises:
        DomainError: If any input is not finite
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("bessel_j0 requires finite input")

    ax = np.atleast_1d(np.abs(arr))
    out = np.empty_like(ax)
    small = ax <= J0_SERIES_LIMIT
    if small.any():
        out[small] = _j0_power_series(ax[small])
    if (~small).any():
        out[~small] = _j0_asymptotic(ax[~small])

    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def gamma_lower_upper(a: ArrayLike, x: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """
    Unnormalized lower and upper incomplete gamma functions.

    Returns ``(gamma(a, x), Gamma(a, x))`` with gamma + Gamma = Gamma(a).
    Arguments broadcast against each other.

    Raises:
        DomainError: If a <= 0 or x < 0 anywhere
    """
    a_arr = np.asarray(a, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(a_arr)) or np.any(a_arr <= 0):
        raise DomainError("gamma_lower_upper requires a > 0")
    if np.any(np.isnan(x_arr)) or np.any(x_arr < 0):
        raise DomainError("gamma_lower_upper requires x >= 0")

    full = special.gamma(a_arr)
    lower = special.gammainc(a_arr, x_arr) * full
    upper = special.gammaincc(a_arr, x_arr) * full

    if np.ndim(lower) == 0:
        return float(lower), float(upper)
    return lower, upper


def _marcum_bessel_sum(ratio: float, a: float, b: float, start: int, abs_tol: float) -> float:
    # sum_{k >= start} ratio^k exp(-(a-b)^2/2) ive(k, ab), ratio <= 1.
    # Tail bound uses I_{k+1}(z)/I_k(z) <= z/(2k+2).
    z = a * b
    scale = math.exp(-0.5 * (a - b) ** 2)
    terms = []
    k0 = start
    while k0 < _MARCUM_MAX_TERMS:
        ks = np.arange(k0, k0 + _MARCUM_BLOCK, dtype=float)
        block = scale * ratio ** ks * special.ive(ks, z)
        terms.append(block)
        k_last = k0 + _MARCUM_BLOCK - 1
        shrink = ratio * z / (2.0 * k_last + 2.0)
        if shrink < 1.0 and block[-1] * shrink / (1.0 - shrink) < abs_tol:
            break
        k0 += _MARCUM_BLOCK
    return math.fsum(np.concatenate(terms))


def _marcum_quadrature(a: float, b: float, accuracy: AccuracySpec) -> float:
    def integrand(x: float) -> float:
        return float(x * math.exp(-0.5 * (x - a) ** 2) * special.ive(0, a * x))

    if b < a:
        lo, hi = max(0.0, b - _MARCUM_QUAD_SPAN), b
    else:
        lo, hi = b, b + _MARCUM_QUAD_SPAN
    # full_output=1 returns quad's diagnostics instead of emitting IntegrationWarning.
    result = integrate.quad(
        integrand, lo, hi,
        epsabs=accuracy.abs_tol, epsrel=accuracy.rel_tol, limit=200, full_output=1,
    )
    value, abserr = float(result[0]), float(result[1])

    if abserr > max(1e3 * accuracy.abs_tol, 1e-9):
        raise QuadratureError(
            "Marcum Q quadrature did not converge",
            {"a": a, "b": b, "abserr": abserr},
        )
    return 1.0 - value if b < a else value


def marcum_q1(a: float, b: float, accuracy: AccuracySpec = DEFAULT_ACCURACY) -> float:
    """
    First-order Marcum Q function Q1(a, b).

    Uses the modified-Bessel series with an explicit tail bound, and
    adaptive quadrature of the defining integral when a*b exceeds
    MARCUM_SERIES_LIMIT.

    Raises:
        DomainError: If a or b is negative or not finite
        QuadratureError: If the quadrature fallback does not converge
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("marcum_q1 requires finite arguments", {"a": a, "b": b})
    if a < 0 or b < 0:
        raise DomainError("marcum_q1 requires a, b >= 0", {"a": a, "b": b})

    if b == 0.0:
        return 1.0
    if a == 0.0:
        return math.exp(-0.5 * b * b)

    if a * b > MARCUM_SERIES_LIMIT:
        result = _marcum_quadrature(a, b, accuracy)
    elif a < b:
        result = _marcum_bessel_sum(a / b, a, b, 0, accuracy.abs_tol)
    else:
        result = 1.0 - _marcum_bessel_sum(b / a, a, b, 1, accuracy.abs_tol)

    return min(1.0, max(0.0, result))
