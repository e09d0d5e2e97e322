"""
Spatial correlation of a fluid antenna.

Builds the Jakes correlation matrix of N evenly spaced ports over an
aperture of W wavelengths and derives everything the other modules need
from it: sorted eigenpairs, determinant, cofactor matrix, numerical rank,
the dense-port reference rank N', low-rank truncation and the Frechet
distance between spectra.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Optional

import numpy as np
from dataclasses_json import config, dataclass_json
from scipy import linalg

from .log import StandardLogger
from .exceptions import DomainError
from .interfaces import Logger
from .specfun import bessel_j0


# Below this determinant, or above this condition number, cofactor formulas
# are refused.
NEAR_SINGULAR_DET = 1e-280
NEAR_SINGULAR_COND = 1e14

# Eigenvalues this far below zero (relative to the largest) count as rounding.
EIGEN_CLIP_REL = 1e-12

DEFAULT_SURROGATE_N = 1024
DEFAULT_NPRIME_TOL = 1e-3


def _encode_array(value: Any) -> Any:
    if value is None:
        return None
    return np.asarray(value, dtype=float).tolist()


def _decode_array(value: Any) -> Optional[np.ndarray]:
    if value is None:
        return None
    return np.asarray(value, dtype=float)


def _array_field() -> Any:
    return field(metadata=config(encoder=_encode_array, decoder=_decode_array))


def _encode_bound(value: float) -> Optional[float]:
    # JSON has no infinity; an unbounded condition number is written as null.
    return float(value) if math.isfinite(value) else None


def _bound_field() -> Any:
    return field(default=math.inf, metadata=config(encoder=_encode_bound))


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass_json
@dataclass(frozen=True, eq=False)
class CorrelationModel:
    """
    Immutable spatial structure of an N-port fluid antenna.

    Eigenvalues are sorted descending; each eigenvector's first component
    above rounding is positive. ``cofactor_k`` is None when the model is
    near-singular.
    """
    n_ports: int
    width: float
    sigma2: float
    matrix_j: np.ndarray = _array_field()
    eigvals: np.ndarray = _array_field()
    eigvecs: np.ndarray = _array_field()
    det_j: float
    cofactor_k: Optional[np.ndarray] = _array_field()
    condition_estimate: float = _bound_field()
    near_singular: bool = False

    @property
    def clipped_eigvals(self) -> np.ndarray:
        """Eigenvalues with rounding negatives set to zero."""
        return np.clip(self.eigvals, 0.0, None)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix_j))

    def mixing_matrix(self, keep: Optional[int] = None) -> np.ndarray:
        """Columns u_m * sqrt(lambda_m) for the ``keep`` leading eigenpairs."""
        keep = self.n_ports if keep is None else keep
        return self.eigvecs[:, :keep] * np.sqrt(self.clipped_eigvals[:keep])


@dataclass_json
@dataclass(frozen=True, eq=False)
class RankReport:
    """
    Numerical rank of a correlation matrix.

    ``tolerance_used`` is the absolute threshold rel_tol * lambda_1.
    """
    numerical_rank: int
    tolerance_used: float
    rel_tol: float
    eigval_profile: np.ndarray = _array_field()
    condition_estimate: float = _bound_field()


@dataclass(frozen=True, eq=False)
class TruncatedSpectrum:
    """Rank-``keep`` truncation of a model's spectrum."""
    keep: int
    eigvals: np.ndarray
    eigvals_truncated: np.ndarray
    eigvecs: np.ndarray
    frobenius_error: float

    @property
    def matrix(self) -> np.ndarray:
        """U diag(truncated spectrum) U^T."""
        return (self.eigvecs * self.eigvals_truncated) @ self.eigvecs.T


def correlation_matrix(n_ports: int, width: float, sigma2: float = 1.0) -> np.ndarray:
    """
    Jakes correlation matrix J of N ports spread over W wavelengths.

    J[m, n] = sigma2 * J0(2 pi (m - n) W / (N - 1)); a single port is [[sigma2]].
    """
    _check_geometry(n_ports, width, sigma2)
    if n_ports == 1:
        return np.array([[float(sigma2)]])
    lags = np.arange(n_ports, dtype=float)
    column = sigma2 * np.asarray(bessel_j0(2.0 * math.pi * lags * width / (n_ports - 1)))
    return linalg.toeplitz(column)


def _check_geometry(n_ports: int, width: float, sigma2: float) -> None:
    if int(n_ports) != n_ports or n_ports < 1:
        raise DomainError("n_ports must be a positive integer", {"n_ports": n_ports})
    if not (math.isfinite(width) and width > 0):
        raise DomainError("width must be positive", {"width": width})
    if not (math.isfinite(sigma2) and sigma2 > 0):
        raise DomainError("sigma2 must be positive", {"sigma2": sigma2})


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    magnitude = np.abs(vectors)
    threshold = 1e-10 * magnitude.max(axis=0)
    first = np.argmax(magnitude > threshold, axis=0)
    signs = np.sign(vectors[first, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def build_correlation(
    n_ports: int,
    width: float,
    sigma2: float = 1.0,
    logger: Optional[Logger] = None
) -> CorrelationModel:
    """
    Build the correlation model of an N-port fluid antenna.

    Args:
        n_ports: Number of ports N (>= 1)
        width: Aperture W in wavelengths (> 0)
        sigma2: Large-scale fading power (> 0)
        logger: Optional logger instance

    Returns:
        CorrelationModel with sorted eigenpairs, determinant and, unless the
        matrix is near-singular, the cofactor matrix

    Raises:
        DomainError: If a parameter is out of range
    """
    logger = logger or StandardLogger("faslab.correlation")
    matrix_j = correlation_matrix(n_ports, width, sigma2)

    values, vectors = linalg.eigh(matrix_j)
    values = values[::-1].copy()
    vectors = _canonical_signs(vectors[:, ::-1].copy())

    sign, logdet = np.linalg.slogdet(matrix_j)
    det_j = float(sign * math.exp(logdet)) if math.isfinite(logdet) else 0.0
    smallest = values[-1]
    condition = float(values[0] / smallest) if smallest > 0 else math.inf

    near_singular = det_j < NEAR_SINGULAR_DET or condition > NEAR_SINGULAR_COND
    cofactor = None
    if not near_singular:
        cofactor = _frozen(det_j * linalg.inv(matrix_j).T)

    if near_singular:
        logger.debug(
            "Correlation matrix is near-singular",
            n_ports=n_ports, width=width, condition=condition,
        )

    return CorrelationModel(
        n_ports=n_ports,
        width=float(width),
        sigma2=float(sigma2),
        matrix_j=_frozen(matrix_j),
        eigvals=_frozen(values),
        eigvecs=_frozen(vectors),
        det_j=det_j,
        cofactor_k=cofactor,
        condition_estimate=condition,
        near_singular=near_singular,
    )


def numerical_rank(model: CorrelationModel, rel_tol: Optional[float] = None) -> RankReport:
    """
    Count eigenvalues above ``rel_tol * lambda_1``.

    The default tolerance is N times machine epsilon.
    """
    if rel_tol is None:
        rel_tol = model.n_ports * float(np.finfo(float).eps)
    if not 0 < rel_tol < 1:
        raise DomainError("rel_tol must lie in (0, 1)", {"rel_tol": rel_tol})

    threshold = rel_tol * float(model.eigvals[0])
    rank = int(np.count_nonzero(model.eigvals > threshold))
    return RankReport(
        numerical_rank=max(rank, 1),
        tolerance_used=threshold,
        rel_tol=rel_tol,
        eigval_profile=model.eigvals.copy(),
        condition_estimate=model.condition_estimate,
    )


@lru_cache(maxsize=64)
def reference_rank_nprime(
    width: float,
    sigma2: float = 1.0,
    surrogate_n: int = DEFAULT_SURROGATE_N,
    rel_tol: float = DEFAULT_NPRIME_TOL
) -> int:
    """
    Numerical rank N' of the dense-port correlation matrix at aperture W.

    The N -> infinity limit is approximated by a ``surrogate_n``-port matrix
    over the same aperture.
    """
    if surrogate_n < 256:
        raise DomainError("surrogate_n must be at least 256", {"surrogate_n": surrogate_n})
    if not 0 < rel_tol < 1:
        raise DomainError("rel_tol must lie in (0, 1)", {"rel_tol": rel_tol})

    values = linalg.eigvalsh(correlation_matrix(surrogate_n, width, sigma2))
    return int(np.count_nonzero(values > rel_tol * values[-1]))


def truncate_rank(model: CorrelationModel, keep: int) -> TruncatedSpectrum:
    """
    Best rank-``keep`` approximation of J in Frobenius norm.

    Raises:
        DomainError: If keep is outside [1, N]
    """
    if not 1 <= keep <= model.n_ports:
        raise DomainError(
            "keep must lie in [1, n_ports]", {"keep": keep, "n_ports": model.n_ports}
        )
    truncated = model.eigvals.copy()
    truncated[keep:] = 0.0
    dropped = model.eigvals[keep:]
    return TruncatedSpectrum(
        keep=keep,
        eigvals=model.eigvals,
        eigvals_truncated=truncated,
        eigvecs=model.eigvecs,
        frobenius_error=float(np.sqrt(np.sum(dropped * dropped))),
    )


def frechet_distance(spectrum_a: np.ndarray, spectrum_b: np.ndarray) -> float:
    """
    Frechet distance between zero-mean Gaussians sharing eigenvectors.

    Sum of (sqrt(a_n) - sqrt(b_n))^2, negatives clipped to zero first.

    Raises:
        DomainError: If the spectra differ in length
    """
    a = np.clip(np.asarray(spectrum_a, dtype=float), 0.0, None)
    b = np.clip(np.asarray(spectrum_b, dtype=float), 0.0, None)
    if a.shape != b.shape:
        raise DomainError(
            "Spectra must have equal length", {"len_a": a.size, "len_b": b.size}
        )
    return float(np.sum((np.sqrt(a) - np.sqrt(b)) ** 2))
