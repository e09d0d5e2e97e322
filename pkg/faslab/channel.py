"""
Correlated channel generation.

Three generative models share one randomness contract: trials are split
into fixed-size batches and batch ``b`` of stream ``s`` is drawn from a
Philox generator keyed by the seed with counter words (0, 0, s, b). Any
batch can therefore be produced independently, in any order, on any
worker, and the result is bit-identical.
"""

import math
import struct
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Tuple

import numpy as np

from .config import DEFAULT_BATCH_SIZE
from .correlation import CorrelationModel
from .exceptions import DomainError, ModelConsistencyError


STREAM_EIGEN = 0
STREAM_RESIDUAL = 1

# Residual power below -RESIDUAL_ROUNDING * sigma2 means a broken eigensystem.
RESIDUAL_ROUNDING = 1e-12


class ModelKind(Enum):
    """Generative model of a channel batch."""
    EXACT = 0
    EPS_RANK = 1
    TRUNCATED = 2


@dataclass(frozen=True)
class ModelTag:
    kind: ModelKind
    order: int

    def __str__(self) -> str:
        if self.kind is ModelKind.EXACT:
            return "Exact"
        if self.kind is ModelKind.EPS_RANK:
            return f"EpsRank({self.order})"
        return f"Truncated({self.order})"


@dataclass(frozen=True, eq=False)
class ChannelBatch:
    """Complex coefficients of ``trials`` channel realisations over N ports."""
    trials: int
    coefficients: np.ndarray
    model_tag: ModelTag
    seed: int

    @property
    def n_ports(self) -> int:
        return int(self.coefficients.shape[1])


def batch_generator(seed: int, batch_index: int, stream: int = STREAM_EIGEN) -> np.random.Generator:
    """Generator for one (seed, stream, batch) cell of the random stream."""
    if not 0 <= seed < 2 ** 64:
        raise DomainError("seed must be a 64-bit unsigned integer", {"seed": seed})
    counter = np.array([0, 0, stream, batch_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


def complex_gaussians(
    seed: int,
    batch_index: int,
    rows: int,
    width: int,
    stream: int = STREAM_EIGEN
) -> np.ndarray:
    """
    Circularly symmetric unit-variance complex Gaussians, shape (rows, width).

    Real and imaginary parts are i.i.d. N(0, 1/2). A partial batch is the
    leading rows of the full batch.
    """
    gen = batch_generator(seed, batch_index, stream)
    pairs = gen.standard_normal((rows, width, 2))
    return (pairs[..., 0] + 1j * pairs[..., 1]) * math.sqrt(0.5)


def iter_batches(trials: int, batch_size: int = DEFAULT_BATCH_SIZE) -> Iterator[Tuple[int, int]]:
    """Yield (batch_index, rows) covering ``trials`` trials."""
    if trials < 1:
        raise DomainError("trials must be positive", {"trials": trials})
    full, rest = divmod(trials, batch_size)
    for index in range(full):
        yield index, batch_size
    if rest:
        yield full, rest


def correlate(z: np.ndarray, model: CorrelationModel, keep: Optional[int] = None) -> np.ndarray:
    """Map eigen-domain draws to port coefficients using ``keep`` eigenpairs."""
    keep = model.n_ports if keep is None else keep
    mixing = model.mixing_matrix(keep)
    return z[:, :keep] @ mixing.T


def residual_powers(model: CorrelationModel, eps_rank: int) -> np.ndarray:
    """
    Per-port residual power sigma2 - sum_{m <= eps_rank} u_nm^2 lambda_m.

    Raises:
        ModelConsistencyError: If a residual is negative beyond rounding
    """
    captured = (model.eigvecs[:, :eps_rank] ** 2) @ model.clipped_eigvals[:eps_rank]
    residual = model.sigma2 - captured
    if np.any(residual < -RESIDUAL_ROUNDING * model.sigma2):
        raise ModelConsistencyError(
            "Negative residual power in the eps-rank model",
            {"min_residual": float(residual.min()), "eps_rank": eps_rank},
        )
    return np.clip(residual, 0.0, None)


def _check_order(model: CorrelationModel, order: int, name: str) -> None:
    if not 1 <= order <= model.n_ports:
        raise DomainError(
            f"{name} must lie in [1, n_ports]", {name: order, "n_ports": model.n_ports}
        )


def _sample(
    model: CorrelationModel,
    keep: int,
    trials: int,
    seed: int,
    batch_size: int,
    residual: Optional[np.ndarray] = None
) -> np.ndarray:
    out = np.empty((trials, model.n_ports), dtype=complex)
    start = 0
    for index, rows in iter_batches(trials, batch_size):
        z = complex_gaussians(seed, index, rows, model.n_ports)
        block = correlate(z, model, keep)
        if residual is not None:
            v = complex_gaussians(seed, index, rows, model.n_ports, STREAM_RESIDUAL)
            block = block + np.sqrt(residual) * v
        out[start:start + rows] = block
        start += rows
    out.setflags(write=False)
    return out


def sample_exact(
    model: CorrelationModel,
    trials: int,
    seed: int,
    batch_size: int = DEFAULT_BATCH_SIZE
) -> ChannelBatch:
    """h_n = sum_m u_nm sqrt(lambda_m) z_m over all N eigenpairs."""
    coefficients = _sample(model, model.n_ports, trials, seed, batch_size)
    return ChannelBatch(trials, coefficients, ModelTag(ModelKind.EXACT, model.n_ports), seed)


def sample_eps_rank(
    model: CorrelationModel,
    eps_rank: int,
    trials: int,
    seed: int,
    batch_size: int = DEFAULT_BATCH_SIZE
) -> ChannelBatch:
    """
    Leading ``eps_rank`` eigenpairs plus an independent per-port residual.

    The residual power of port n is chosen so that E|h_n|^2 = sigma2.
    """
    _check_order(model, eps_rank, "eps_rank")
    residual = residual_powers(model, eps_rank)
    coefficients = _sample(model, eps_rank, trials, seed, batch_size, residual)
    return ChannelBatch(trials, coefficients, ModelTag(ModelKind.EPS_RANK, eps_rank), seed)


def sample_truncated(
    model: CorrelationModel,
    keep: int,
    trials: int,
    seed: int,
    batch_size: int = DEFAULT_BATCH_SIZE
) -> ChannelBatch:
    """Same draws as ``sample_exact`` with the eigen-expansion stopped at ``keep``."""
    _check_order(model, keep, "keep")
    coefficients = _sample(model, keep, trials, seed, batch_size)
    return ChannelBatch(trials, coefficients, ModelTag(ModelKind.TRUNCATED, keep), seed)


def envelope_max(batch: ChannelBatch) -> np.ndarray:
    """Per-trial maximum envelope over ports."""
    return np.abs(batch.coefficients).max(axis=1)


# magic, version, kind, order, n_ports, trials, seed, reserved
_HEADER = struct.Struct("<4sHHIIQQ8x")
_MAGIC = b"FASB"
_VERSION = 1


def dump_batch(batch: ChannelBatch, path: str) -> None:
    """
    Write a batch as a flat little-endian binary file.

    The header is followed by trials x ports complex128 values, row-major,
    each stored as interleaved real and imaginary float64.
    """
    header = _HEADER.pack(
        _MAGIC, _VERSION, batch.model_tag.kind.value, batch.model_tag.order,
        batch.n_ports, batch.trials, batch.seed,
    )
    body = np.ascontiguousarray(batch.coefficients, dtype="<c16")
    with open(path, "wb") as f:
        f.write(header)
        f.write(body.tobytes())


def load_batch(path: str) -> ChannelBatch:
    """Read a batch written by ``dump_batch``."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _HEADER.size:
        raise DomainError("Batch file is truncated", {"path": path})
    magic, version, kind, order, n_ports, trials, seed = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != _VERSION:
        raise DomainError("Not a faslab batch file", {"path": path})
    body = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size)
    if body.size != trials * n_ports:
        raise DomainError(
            "Batch file body does not match its header",
            {"path": path, "values": body.size},
        )
    coefficients = body.reshape(trials, n_ports).astype(complex)
    coefficients.setflags(write=False)
    return ChannelBatch(trials, coefficients, ModelTag(ModelKind(kind), order), seed)
