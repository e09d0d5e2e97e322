"""
Command-line front end.

Subcommands emit plot-ready CSV (or JSON for ``corr``) reproducing the
correlation analysis, N* table, outage curves, CDF surfaces, scheme
comparisons and diversity figures. Exit codes: 0 success, 1 numerical
failure, 2 usage error.
"""

import argparse
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .analytic import (
    NPrimeConfig,
    SeriesConfig,
    algorithm1_nstar,
    bivariate_cdf_quadrature,
    bivariate_pdf_quadrature,
    diversity_gain,
    flop_estimate,
    joint_cdf_series,
    joint_pdf_series,
)
from .config import ExperimentConfig, FasLabConfig, get_default_config
from .correlation import build_correlation, numerical_rank, reference_rank_nprime
from .exceptions import DomainError, FasLabError, NumericalError
from .factory import METHODS, create_evaluator, create_model, create_simulator, parse_scheme
from .interfaces import OutageQuery
from .log import StandardLogger, configure_logging
from .reporting import CsvReport, emit, render_json
from .simulate import Scheme, baseline_schemes


TABLE_WIDTHS = [0.5, 1.0, 2.0, 3.0, 4.0]

# argparse destination -> ExperimentConfig field
_OVERRIDES = {
    "n": "n_ports",
    "w": "width",
    "sigma2": "sigma2",
    "q": "rate_q",
    "snr": "snr_db",
    "s0": "s0",
    "eps_tol": "eps_tol",
    "eps_rank": "eps_rank",
    "rank_tol": "rank_tol",
    "nprime_tol": "nprime_tol",
    "surrogate_n": "surrogate_n",
    "trials": "trials",
    "seed": "seed",
    "output": "output",
}


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _experiment(args: argparse.Namespace) -> ExperimentConfig:
    base = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    overrides = {
        field: getattr(args, dest)
        for dest, field in _OVERRIDES.items()
        if getattr(args, dest, None) is not None
    }
    experiment = base.merged(overrides)
    experiment.validate()
    return experiment


def _runtime() -> FasLabConfig:
    runtime = get_default_config()
    runtime.validate()
    return runtime


def cmd_corr(args: argparse.Namespace) -> Dict[str, Any]:
    """Correlation model and rank report as a JSON document."""
    experiment = _experiment(args)
    model = build_correlation(experiment.n_ports, experiment.width, experiment.sigma2)
    report = numerical_rank(model, experiment.rank_tol)
    return {
        "schema": "corr/v1",
        "version": __version__,
        "trace": model.trace,
        "model": model.to_dict(),  # type: ignore[attr-defined]
        "rank": report.to_dict(),  # type: ignore[attr-defined]
    }


def cmd_nstar(args: argparse.Namespace) -> CsvReport:
    """N* over a list of apertures."""
    experiment = _experiment(args)
    widths = args.widths or TABLE_WIDTHS
    report = CsvReport(
        "nstar", ["width", "n_star", "numerical_rank", "flops"], args.argv,
        extra={"n_ports": experiment.n_ports, "eps_tol": experiment.eps_tol},
    )
    for width in widths:
        model = build_correlation(experiment.n_ports, width, experiment.sigma2)
        n_star = algorithm1_nstar(model, experiment.eps_tol * experiment.sigma2, experiment.rank_tol)
        rank = numerical_rank(model, experiment.rank_tol).numerical_rank
        report.add(width, n_star, rank, flop_estimate(experiment.n_ports, n_star))
    return report


def cmd_outage(args: argparse.Namespace) -> CsvReport:
    """Outage curve over the SNR grid with the chosen method."""
    experiment = _experiment(args)
    scheme = parse_scheme(args.scheme, experiment) if args.method == "mc" else None
    evaluator = create_evaluator(
        args.method, experiment, scheme=scheme, reduce=args.reduce, config=_runtime()
    )
    report = CsvReport(
        "outage", ["snr_db", "outage", "uncertainty", "method"], args.argv,
        seed=experiment.seed if args.method == "mc" else None,
        batch_size=_runtime().batch_size if args.method == "mc" else None,
    )
    for snr_db, estimate in evaluator.curve(experiment.rate_q, experiment.snr_db):
        report.add(snr_db, estimate.probability, estimate.uncertainty, estimate.method.value)
    return report


def _cdf_surface(args: argparse.Namespace, experiment: ExperimentConfig) -> CsvReport:
    if args.n is not None and args.n != 2:
        raise DomainError("cdf surface mode is defined for N = 2 only")
    model = build_correlation(2, experiment.width, experiment.sigma2)
    cfg = SeriesConfig(s0=experiment.s0, max_ports=experiment.max_series_ports)
    r_max = args.r_max if args.r_max is not None else 3.0 * np.sqrt(experiment.sigma2)
    grid = np.linspace(r_max / args.grid, r_max, args.grid)

    header = ["r1", "r2", "pdf_series", "cdf_series"]
    if args.numeric:
        header += ["pdf_numeric", "cdf_numeric"]
    report = CsvReport("cdf-surface", header, args.argv, extra={"s0": experiment.s0})
    for r1 in grid:
        for r2 in grid:
            row = [
                r1, r2,
                joint_pdf_series(model, [r1, r2], cfg).value,
                joint_cdf_series(model, [r1, r2], cfg).value,
            ]
            if args.numeric:
                row += [
                    bivariate_pdf_quadrature(model, r1, r2),
                    bivariate_cdf_quadrature(model, r1, r2),
                ]
            report.add(*row)
    return report


def _cdf_compare(args: argparse.Namespace, experiment: ExperimentConfig) -> CsvReport:
    model = build_correlation(experiment.n_ports, experiment.width, experiment.sigma2)
    if args.keep == "rank":
        keep = numerical_rank(model, experiment.rank_tol).numerical_rank
    elif args.keep == "nstar":
        keep = algorithm1_nstar(model, experiment.eps_tol * experiment.sigma2, experiment.rank_tol)
    else:
        try:
            keep = int(args.keep)
        except ValueError:
            raise DomainError(f"--keep expects rank, nstar or an integer, got '{args.keep}'")

    r_max = args.r_max if args.r_max is not None else 3.0 * np.sqrt(experiment.sigma2)
    radii = np.linspace(0.0, r_max, args.grid)
    simulator = create_simulator(_runtime(), sigma2=experiment.sigma2)
    comparison = simulator.envelope_cdf_comparison(
        model, keep, radii, experiment.trials, experiment.seed
    )
    report = CsvReport(
        "cdf-compare", ["radius", "cdf_exact", "cdf_truncated", "gap"], args.argv,
        seed=experiment.seed, batch_size=_runtime().batch_size,
        extra={"keep": keep, "max_gap": comparison.max_gap},
    )
    for r, exact, truncated in zip(radii, comparison.cdf_exact, comparison.cdf_truncated):
        report.add(r, exact, truncated, exact - truncated)
    return report


def cmd_cdf(args: argparse.Namespace) -> CsvReport:
    """Joint PDF/CDF surfaces (N = 2) or exact-vs-truncated envelope CDFs."""
    experiment = _experiment(args)
    if args.mode == "surface":
        return _cdf_surface(args, experiment)
    return _cdf_compare(args, experiment)


def cmd_compare(args: argparse.Namespace) -> CsvReport:
    """CRN-paired outage of several schemes and their pairwise gaps."""
    experiment = _experiment(args)
    if args.schemes:
        schemes = [parse_scheme(text, experiment) for text in args.schemes.split(",")]
    else:
        model = create_model(experiment)
        n_star = algorithm1_nstar(model, experiment.eps_tol * experiment.sigma2, experiment.rank_tol)
        schemes = baseline_schemes(experiment.width, n_star, experiment.n_ports)

    snr_db = experiment.snr_db[0]
    query = OutageQuery.from_db(experiment.rate_q, snr_db)
    simulator = create_simulator(_runtime(), sigma2=experiment.sigma2)
    comparison = simulator.compare_schemes(schemes, query, experiment.trials, experiment.seed)

    report = CsvReport(
        "compare",
        ["kind", "scheme_a", "scheme_b", "snr_db", "outage", "std_error", "trials", "seed"],
        args.argv, seed=experiment.seed, batch_size=_runtime().batch_size,
    )
    for label, estimate in comparison.estimates:
        report.add(
            "estimate", label, "", snr_db, estimate.probability, estimate.std_error,
            estimate.trials, experiment.seed,
        )
    for diff in comparison.differences:
        report.add(
            "difference", diff.scheme_a, diff.scheme_b, snr_db, diff.difference,
            diff.std_error, experiment.trials, experiment.seed,
        )
    return report


def cmd_diversity(args: argparse.Namespace) -> CsvReport:
    """N', min(N, N') and optionally the empirical slope per (N, W)."""
    experiment = _experiment(args)
    ports = args.ports or [experiment.n_ports]
    widths = args.widths or [experiment.width]
    nprime_cfg = NPrimeConfig(experiment.surrogate_n, experiment.nprime_tol)
    if args.empirical and len(experiment.snr_db) < 2:
        raise DomainError("--empirical needs an SNR window of at least two points")
    simulator = create_simulator(_runtime(), sigma2=experiment.sigma2) if args.empirical else None

    report = CsvReport(
        "diversity", ["n_ports", "width", "n_prime", "d_predicted", "d_empirical"], args.argv,
        seed=experiment.seed if args.empirical else None,
        batch_size=_runtime().batch_size if args.empirical else None,
        extra={"surrogate_n": experiment.surrogate_n, "nprime_tol": experiment.nprime_tol},
    )
    for width in widths:
        nprime = reference_rank_nprime(
            width, experiment.sigma2, experiment.surrogate_n, experiment.nprime_tol
        )
        for n_ports in ports:
            model = build_correlation(n_ports, width, experiment.sigma2)
            slope = None
            if simulator is not None:
                slope = simulator.empirical_diversity(
                    Scheme.fas(n_ports, width), experiment.rate_q, experiment.snr_db,
                    experiment.trials, experiment.seed,
                )
            report.add(n_ports, width, nprime, diversity_gain(model, nprime_cfg), slope)
    return report


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config JSON; flags override it")
    common.add_argument("--output", help="output file (default: stdout)")
    common.add_argument("--log-level", dest="log_level", help="logging level")
    common.add_argument("--sigma2", type=float, help="large-scale fading power")
    common.add_argument("--rank-tol", dest="rank_tol", type=float,
                        help="relative tolerance of the numerical rank (default N*eps)")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faslab",
        description="Outage, diversity and port-count analysis of fluid antenna systems.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_options()

    corr = sub.add_parser("corr", parents=[common], help="correlation model report (JSON)")
    corr.add_argument("--n", type=int, help="number of ports")
    corr.add_argument("--w", type=float, help="aperture in wavelengths")
    corr.set_defaults(handler=cmd_corr)

    nstar = sub.add_parser("nstar", parents=[common], help="N* over apertures")
    nstar.add_argument("--n", type=int, help="number of ports")
    nstar.add_argument("--w", dest="widths", type=_float_list,
                       help="comma-separated apertures (default 0.5,1,2,3,4)")
    nstar.add_argument("--eps-tol", dest="eps_tol", type=float,
                       help="eigenvalue mass tolerance, in units of sigma2")
    nstar.set_defaults(handler=cmd_nstar)

    outage = sub.add_parser("outage", parents=[common], help="outage curve")
    outage.add_argument("--method", choices=METHODS, default="mc")
    outage.add_argument("--scheme", default="fas",
                        help="mc receiver: siso, fas[:N[:W]], sc[:N], mrc[:N]")
    outage.add_argument("--n", type=int, help="number of ports")
    outage.add_argument("--w", type=float, help="aperture in wavelengths")
    outage.add_argument("--q", type=float, help="rate threshold in bits")
    outage.add_argument("--snr", type=_float_list, help="comma-separated SNR grid in dB")
    outage.add_argument("--s0", type=int, help="series truncation order")
    outage.add_argument("--eps-rank", dest="eps_rank", type=int,
                        help="eps-rank of the single-integral method (default N*)")
    outage.add_argument("--eps-tol", dest="eps_tol", type=float, help="N* tolerance")
    outage.add_argument("--trials", type=int, help="Monte Carlo trials")
    outage.add_argument("--seed", type=int, help="Monte Carlo seed")
    outage.add_argument("--reduce", action="store_true",
                        help="reduce the model to N* ports before analytic methods")
    outage.set_defaults(handler=cmd_outage)

    cdf = sub.add_parser("cdf", parents=[common], help="joint CDF surfaces or CDF comparison")
    cdf.add_argument("--mode", choices=("surface", "compare"), default="surface")
    cdf.add_argument("--n", type=int, help="number of ports (compare mode)")
    cdf.add_argument("--w", type=float, help="aperture in wavelengths")
    cdf.add_argument("--grid", type=int, default=50, help="grid points per axis")
    cdf.add_argument("--r-max", dest="r_max", type=float, help="largest radius")
    cdf.add_argument("--numeric", action="store_true",
                     help="add quadrature reference columns (surface mode)")
    cdf.add_argument("--keep", default="rank",
                     help="truncation order: rank, nstar or an integer (compare mode)")
    cdf.add_argument("--s0", type=int, help="series truncation order")
    cdf.add_argument("--eps-tol", dest="eps_tol", type=float, help="N* tolerance")
    cdf.add_argument("--trials", type=int, help="Monte Carlo trials")
    cdf.add_argument("--seed", type=int, help="Monte Carlo seed")
    cdf.set_defaults(handler=cmd_cdf)

    compare = sub.add_parser("compare", parents=[common], help="CRN scheme comparison")
    compare.add_argument("--schemes", help="comma-separated schemes (default: baseline line-up)")
    compare.add_argument("--n", type=int, help="number of ports")
    compare.add_argument("--w", type=float, help="aperture in wavelengths")
    compare.add_argument("--q", type=float, help="rate threshold in bits")
    compare.add_argument("--snr", type=_float_list, help="SNR in dB (first value used)")
    compare.add_argument("--eps-tol", dest="eps_tol", type=float, help="N* tolerance")
    compare.add_argument("--trials", type=int, help="Monte Carlo trials")
    compare.add_argument("--seed", type=int, help="Monte Carlo seed")
    compare.set_defaults(handler=cmd_compare)

    diversity = sub.add_parser("diversity", parents=[common], help="diversity order")
    diversity.add_argument("--n", dest="ports", type=_int_list, help="comma-separated port counts")
    diversity.add_argument("--w", dest="widths", type=_float_list, help="comma-separated apertures")
    diversity.add_argument("--q", type=float, help="rate threshold in bits")
    diversity.add_argument("--snr", type=_float_list, help="SNR window in dB (with --empirical)")
    diversity.add_argument("--empirical", action="store_true", help="add the Monte Carlo slope")
    diversity.add_argument("--surrogate-n", dest="surrogate_n", type=int,
                           help="ports of the dense surrogate matrix")
    diversity.add_argument("--nprime-tol", dest="nprime_tol", type=float,
                           help="relative tolerance of N'")
    diversity.add_argument("--trials", type=int, help="Monte Carlo trials")
    diversity.add_argument("--seed", type=int, help="Monte Carlo seed")
    diversity.set_defaults(handler=cmd_diversity)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv

    logger = StandardLogger("faslab.cli")
    try:
        configure_logging(args.log_level or _runtime().log_level)
        logger.debug("Running command", command=args.command)
        result = args.handler(args)
        output = getattr(args, "output", None) or _experiment(args).output
        if isinstance(result, CsvReport):
            emit(result.render(__version__), output)
        else:
            emit(render_json(result), output)
    except DomainError as e:
        print(f"faslab: error: {e.message}", file=sys.stderr)
        return 2
    except (NumericalError, FasLabError) as e:
        print(f"faslab: numerical failure: {e.message}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
