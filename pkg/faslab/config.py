"""
Configuration management for faslab.

This module provides the runtime configuration (threads, batch size,
logging) read from the environment, and the experiment configuration that
the CLI loads from JSON files and overrides from flags.
"""

import json
import os
from dataclasses import dataclass, field, fields, replace
from typing import Any, List, Mapping, Optional

from dataclasses_json import dataclass_json

from .exceptions import ConfigError


DEFAULT_BATCH_SIZE = 1 << 16


@dataclass
class FasLabConfig:
    """
    Runtime configuration for the numerical kernels.

    Monte Carlo results depend on ``batch_size`` (it fixes the random stream
    layout) but never on ``threads``.
    """

    # Parallelism
    threads: int = 0
    batch_size: int = DEFAULT_BATCH_SIZE

    # Monte Carlo policy
    deep_tail_trials: int = 10_000_000

    # Logging
    log_level: str = "INFO"

    @classmethod
    def from_env(cls) -> 'FasLabConfig':
        """
        Create configuration from environment variables.

        Environment variables:
        - FAS_LAB_THREADS: worker cap for Monte Carlo batches (0 = auto)
        - FAS_LAB_BATCH_SIZE: trials per random-stream batch
        - FAS_LAB_LOG_LEVEL: logging level

        Returns:
            FasLabConfig instance with values from environment
        """
        config = cls()

        if os.getenv('FAS_LAB_THREADS'):
            try:
                config.threads = int(os.getenv('FAS_LAB_THREADS', ''))
            except ValueError:
                pass

        if os.getenv('FAS_LAB_BATCH_SIZE'):
            try:
                config.batch_size = int(os.getenv('FAS_LAB_BATCH_SIZE', ''))
            except ValueError:
                pass

        if os.getenv('FAS_LAB_LOG_LEVEL'):
            config.log_level = os.getenv('FAS_LAB_LOG_LEVEL', config.log_level)

        return config

    def resolved_threads(self) -> int:
        """Worker count with 0 meaning one worker per CPU."""
        if self.threads > 0:
            return self.threads
        return os.cpu_count() or 1

    def validate(self) -> None:
        """
        Validate the configuration.

        Raises:
            ConfigError: If configuration is invalid
        """
        if self.threads < 0:
            raise ConfigError("Threads must be non-negative (0 = auto)")

        if self.batch_size <= 0:
            raise ConfigError("Batch size must be positive")

        if self.deep_tail_trials <= 0:
            raise ConfigError("Deep-tail trial threshold must be positive")

        if self.log_level.upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            raise ConfigError(f"Unknown log level: {self.log_level}")


@dataclass_json
@dataclass
class ExperimentConfig:
    """
    Parameters of one experiment run.

    Defaults reproduce the reference operating point: sigma2 = 1, N = 50,
    W = 0.5 wavelengths, q = 10 bits and SNR = 30 dB.
    """

    n_ports: int = 50
    width: float = 0.5
    sigma2: float = 1.0
    rate_q: float = 10.0
    snr_db: List[float] = field(default_factory=lambda: [30.0])

    # Series and reduction
    s0: int = 20
    max_series_ports: int = 4
    eps_tol: float = 0.01
    eps_rank: Optional[int] = None

    # Rank tolerances (None selects N * machine epsilon)
    rank_tol: Optional[float] = None
    nprime_tol: float = 1e-3
    surrogate_n: int = 1024

    # Monte Carlo
    trials: int = 1_000_000
    seed: int = 0

    output: Optional[str] = None

    @classmethod
    def from_file(cls, filepath: str) -> 'ExperimentConfig':
        """
        Load an experiment configuration from a JSON document.

        Unknown keys are ignored; missing keys keep their defaults.
        """
        try:
            with open(filepath, 'r') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read experiment config {filepath}: {e}")

        if not isinstance(data, dict):
            raise ConfigError(f"Experiment config {filepath} must hold a JSON object")

        config: ExperimentConfig = cls.from_dict(data)  # type: ignore[attr-defined]
        return config

    def merged(self, overrides: Mapping[str, Any]) -> 'ExperimentConfig':
        """Return a copy with every non-None override applied."""
        names = {f.name for f in fields(self)}
        changes = {
            key: value for key, value in overrides.items()
            if key in names and value is not None
        }
        return replace(self, **changes)

    def save_to_file(self, filepath: str) -> None:
        """Save the configuration as a JSON document."""
        with open(filepath, 'w') as f:
            f.write(self.to_json(indent=2))  # type: ignore[attr-defined]

    def validate(self) -> None:
        """
        Validate the configuration.

        Raises:
            ConfigError: If a physical parameter is out of range or the SNR
                grid is not sorted
        """
        if self.n_ports < 1:
            raise ConfigError("Number of ports must be at least 1")

        for name in ('width', 'sigma2', 'rate_q', 'eps_tol', 'nprime_tol'):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")

        if self.s0 < 0:
            raise ConfigError("Series truncation order s0 must be non-negative")

        if self.max_series_ports < 1:
            raise ConfigError("Series port cap must be at least 1")

        if self.eps_rank is not None and not 1 <= self.eps_rank <= self.n_ports:
            raise ConfigError("eps_rank must lie in [1, n_ports]")

        if self.rank_tol is not None and not 0 < self.rank_tol < 1:
            raise ConfigError("rank_tol must lie in (0, 1)")

        if self.surrogate_n < 256:
            raise ConfigError("surrogate_n must be at least 256")

        if self.trials < 1:
            raise ConfigError("trials must be positive")

        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

        if not self.snr_db:
            raise ConfigError("SNR grid must not be empty")

        if any(b < a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ConfigError("SNR grid must be sorted ascending")


def get_default_config() -> FasLabConfig:
    """
    Get the default runtime configuration.

    Values come from environment variables, falling back to defaults.

    Returns:
        FasLabConfig instance
    """
    return FasLabConfig.from_env()
