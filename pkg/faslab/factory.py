"""
Factory functions for creating configured faslab components.

This module assembles simulators, schemes and outage evaluators from an
ExperimentConfig with sensible defaults.
"""

from typing import Optional

from .adapters import (
    AsymptoteOutageEvaluator,
    Eq15OutageEvaluator,
    MonteCarloOutageEvaluator,
    SeriesOutageEvaluator,
)
from .analytic import SeriesConfig, algorithm1_nstar, reduce_to_nstar
from .config import ExperimentConfig, FasLabConfig, get_default_config
from .correlation import CorrelationModel, build_correlation
from .exceptions import DomainError
from .interfaces import Logger, OutageEvaluator
from .log import StandardLogger
from .simulate import MonteCarloSimulator, Scheme


METHODS = ("mc", "theorem1", "eq15", "asymptote")
SCHEMES = ("fas", "siso", "sc", "mrc")


def create_simulator(
    config: Optional[FasLabConfig] = None,
    logger: Optional[Logger] = None,
    sigma2: float = 1.0
) -> MonteCarloSimulator:
    """
    Create a Monte Carlo simulator.

    Args:
        config: Runtime configuration (defaults to the environment)
        logger: Optional logger instance
        sigma2: Large-scale fading power of every simulated scheme

    Returns:
        Configured MonteCarloSimulator instance
    """
    if config is None:
        config = get_default_config()
    if logger is None:
        logger = StandardLogger("faslab.simulate")
    return MonteCarloSimulator(config=config, logger=logger, sigma2=sigma2)


def parse_scheme(text: str, experiment: ExperimentConfig) -> Scheme:
    """
    Parse a scheme description.

    Accepted forms: ``siso``, ``fas``, ``fas:N``, ``fas:N:W``, ``sc``,
    ``sc:N``, ``mrc``, ``mrc:N``. Missing counts and widths come from the
    experiment.

    Raises:
        DomainError: If the description cannot be parsed
    """
    parts = text.strip().lower().split(":")
    kind = parts[0]
    try:
        count = int(parts[1]) if len(parts) > 1 else experiment.n_ports
        width = float(parts[2]) if len(parts) > 2 else experiment.width
    except ValueError:
        raise DomainError(f"Cannot parse scheme '{text}'")

    if kind == "siso" and len(parts) == 1:
        return Scheme.siso()
    if kind == "fas" and len(parts) <= 3:
        return Scheme.fas(count, width)
    if kind == "sc" and len(parts) <= 2:
        return Scheme.sc(count)
    if kind == "mrc" and len(parts) <= 2:
        return Scheme.mrc(count)
    raise DomainError(f"Unknown scheme '{text}'; expected one of {', '.join(SCHEMES)}")


def create_model(
    experiment: ExperimentConfig,
    reduce: bool = False,
    logger: Optional[Logger] = None
) -> CorrelationModel:
    """Correlation model of the experiment, optionally reduced to N* ports."""
    model = build_correlation(experiment.n_ports, experiment.width, experiment.sigma2, logger)
    if reduce and model.n_ports > 1:
        model = reduce_to_nstar(model, experiment.eps_tol * experiment.sigma2, experiment.rank_tol)
    return model


def create_evaluator(
    method: str,
    experiment: ExperimentConfig,
    scheme: Optional[Scheme] = None,
    reduce: bool = False,
    config: Optional[FasLabConfig] = None,
    logger: Optional[Logger] = None
) -> OutageEvaluator:
    """
    Create an outage evaluator for one method.

    Args:
        method: One of ``mc``, ``theorem1``, ``eq15``, ``asymptote``
        experiment: Experiment parameters
        scheme: Receiver simulated by ``mc`` (defaults to FAS(N, W))
        reduce: Replace the model by its N*-port reduction first
        config: Runtime configuration for ``mc``
        logger: Optional logger instance

    Returns:
        Configured OutageEvaluator instance

    Example:
        >>> evaluator = create_evaluator("theorem1", ExperimentConfig(n_ports=2))
        >>> evaluator.curve(10.0, [20.0, 30.0])
    """
    if logger is None:
        logger = StandardLogger("faslab.factory")

    if method == "mc":
        if scheme is None:
            scheme = Scheme.fas(experiment.n_ports, experiment.width)
        simulator = create_simulator(config, logger, experiment.sigma2)
        return MonteCarloOutageEvaluator(simulator, scheme, experiment.trials, experiment.seed)

    model = create_model(experiment, reduce, logger)

    if method == "theorem1":
        cfg = SeriesConfig(s0=experiment.s0, max_ports=experiment.max_series_ports)
        return SeriesOutageEvaluator(model, cfg)

    if method == "eq15":
        eps_rank = experiment.eps_rank
        if eps_rank is None:
            eps_rank = algorithm1_nstar(model, experiment.eps_tol * experiment.sigma2, experiment.rank_tol)
        return Eq15OutageEvaluator(model, min(eps_rank, model.n_ports))

    if method == "asymptote":
        return AsymptoteOutageEvaluator(model, logger)

    raise DomainError(f"Unknown method '{method}'; expected one of {', '.join(METHODS)}")
