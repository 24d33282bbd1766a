"""
The `varest` command line tool.

Exit codes: 0 on success, 2 on bad input, 3 when a formula or estimator is undefined for the data.
Reports go to stdout; log messages and warnings go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import polars as pl

from varest.constants import (
    ESTIMATOR_KEY,
    NEGATIVE_KEY,
    REGRESSION_COEFFICIENT_TYPES,
    EstimatorKind,
    InputError,
    ModeError,
    NumericError,
    OutputFormat,
    ThetaMode,
)
from varest.estimators import EstimatorConfig, estimate
from varest.loaders import load_population_csv, read_summary_params
from varest.montecarlo import SimulationPlan, enumerate_exact, simulate, srswor_sample
from varest.moments import (
    Population,
    PopulationMoments,
    population_moments,
    sample_stats,
)
from varest.presets import PRESET_KINDS, TABLE_KINDS, configs_for
from varest.report import render, reports_to_frame
from varest.theory import TheoryReport, theory_reports

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_NUMERIC_ERROR = 3


@dataclass
class RunConfig:
    """
    Everything a command needs besides its own options. Exactly one of `data` and `params` is set.
    """

    data: Optional[Path] = None
    params: Optional[str] = None
    n: Optional[int] = None
    theta_mode: ThetaMode = ThetaMode.SIMPLE
    output_format: OutputFormat = OutputFormat.TABLE
    kinds: Optional[List[EstimatorKind]] = None
    presets: List[str] = field(default_factory=list)
    paper_literal: bool = False
    clamp_nonnegative: bool = False
    regression_coefficient: REGRESSION_COEFFICIENT_TYPES = "sample"
    n_jobs: int = 1

    def __post_init__(self):
        if (self.data is None) == (self.params is None):
            raise ModeError("Give exactly one of --data and --params.")

    @property
    def use_fpc(self) -> bool:
        return self.theta_mode == ThetaMode.FPC


def load_inputs(
    cfg: RunConfig, n: Optional[int] = None
) -> Tuple[Optional[Population], PopulationMoments]:
    """Loads the population (unit-level data only) and its moments for samples of size `n`."""
    if n is None:
        n = cfg.n
    if cfg.params is not None:
        return None, read_summary_params(cfg.params).to_moments(
            n=n, use_fpc=cfg.use_fpc
        )
    pop = load_population_csv(cfg.data)  # type: ignore
    if n is None:
        raise InputError("--n is required with --data.")
    return pop, population_moments(pop, n, use_fpc=cfg.use_fpc)


def _configs(cfg: RunConfig, pm: PopulationMoments):
    kinds = TABLE_KINDS if cfg.kinds is None else cfg.kinds
    return configs_for(kinds, pm, cfg.presets)


def cmd_moments(cfg: RunConfig) -> pl.DataFrame:
    _, pm = load_inputs(cfg)
    return pm.to_frame()


def cmd_theory_table(cfg: RunConfig) -> pl.DataFrame:
    _, pm = load_inputs(cfg)
    reports = theory_reports(pm, _configs(cfg, pm), paper_literal=cfg.paper_literal)
    return reports_to_frame(reports)


def cmd_estimate(
    cfg: RunConfig, indices: Optional[List[int]] = None, seed: int = 0
) -> pl.DataFrame:
    """
    Point estimates of every estimator on one sample: the units at `indices`, or an SRSWOR
    sample of size `cfg.n` drawn with `seed`.
    """
    if cfg.data is None:
        raise ModeError("Point estimates need unit-level data (--data).")
    n = len(indices) if indices is not None else cfg.n
    pop, pm = load_inputs(cfg, n)
    if indices is None:
        rng = np.random.default_rng(seed)
        indices = sorted(srswor_sample(pop.N, n, rng))  # type: ignore
        logger.info("Drew sample %s", indices)
    s = sample_stats(pop, indices)  # type: ignore

    labels, values, negative = [], [], []
    for est in _configs(cfg, pm):
        labels.append(est.label)
        try:
            result = estimate(
                est,
                s,
                pm,
                regression_coefficient=cfg.regression_coefficient,
                clamp_nonnegative=cfg.clamp_nonnegative,
            )
        except NumericError as e:
            logger.warning("%s is undefined on this sample: %s", est.label, e)
            values.append(None)
            negative.append(None)
            continue
        values.append(result.value)
        negative.append(result.negative)
    return pl.DataFrame(
        {ESTIMATOR_KEY: labels, "estimate": values, NEGATIVE_KEY: negative},
        schema={
            ESTIMATOR_KEY: pl.String,
            "estimate": pl.Float64,
            NEGATIVE_KEY: pl.Boolean,
        },
    )


def _theory_rows(
    cfg: RunConfig, pm: PopulationMoments, configs: Sequence[EstimatorConfig]
) -> List[TheoryReport]:
    if pm.theta == 0:
        logger.info("n = N: the fpc first-order MSEs are zero, skipping those rows")
        return []
    rows = []
    for est in configs:
        try:
            rows.extend(theory_reports(pm, [est], paper_literal=cfg.paper_literal))
        except NumericError as e:
            logger.warning("No first-order values for %s: %s", est.label, e)
    return rows


def cmd_simulate(
    cfg: RunConfig,
    plan: SimulationPlan,
    exact: bool = False,
    limit: Optional[int] = None,
) -> pl.DataFrame:
    """
    Simulated (or, with `exact`, enumerated) moments of each estimator, preceded by their
    first-order values for `theta = 1/n` and for `theta = 1/n - 1/N` (the `theta` column tells
    them apart). Optimal constants are fitted with the theta that `--fpc` selects.
    """
    if cfg.data is None:
        raise ModeError(
            "Simulation needs unit-level data (--data), not summary statistics."
        )
    pop = load_population_csv(cfg.data)
    pm = population_moments(pop, plan.n)
    pm_fpc = pm.with_n(plan.n, use_fpc=True)
    configs = list(plan.estimators) or _configs(cfg, pm_fpc if cfg.use_fpc else pm)
    options = dict(
        n_jobs=cfg.n_jobs,
        regression_coefficient=cfg.regression_coefficient,
        clamp_nonnegative=cfg.clamp_nonnegative,
    )
    if exact:
        empirical = enumerate_exact(pop, plan.n, configs, limit, **options)
    else:
        plan = SimulationPlan(plan.n, plan.replications, plan.seed, configs)
        empirical = simulate(pop, plan, **options)  # type: ignore

    theory = [*_theory_rows(cfg, pm, configs), *_theory_rows(cfg, pm_fpc, configs)]
    return reports_to_frame([*theory, *empirical])


def _estimator_list(text: str) -> List[EstimatorKind]:
    try:
        return [EstimatorKind(k.strip()) for k in text.split(",") if k.strip()]
    except ValueError:
        choices = ", ".join(k.value for k in EstimatorKind)
        raise argparse.ArgumentTypeError(
            f"invalid estimator list '{text}' (choose from {choices})"
        ) from None


def _index_list(text: str) -> List[int]:
    try:
        return [int(i) for i in text.split(",") if i.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"invalid index list '{text}' (expected e.g. 1,4,7)"
        ) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--data", type=Path, help="CSV file with columns y and x.")
    source.add_argument(
        "--params",
        help="Summary-statistics file, or apple104 for the bundled one.",
    )
    common.add_argument("--n", type=int, help="Sample size.")
    common.add_argument(
        "--fpc",
        action="store_true",
        help="Use theta = 1/n - 1/N instead of 1/n.",
    )
    common.add_argument(
        "--format",
        choices=[f.value for f in OutputFormat],
        default=OutputFormat.TABLE.value,
    )
    common.add_argument(
        "--estimators",
        type=_estimator_list,
        help="Comma-separated estimator kinds (default: the six-row comparison table).",
    )
    common.add_argument(
        "--preset",
        action="append",
        default=[],
        choices=list(PRESET_KINDS),
        help="Constants of t_k, t_s or t; may be repeated.",
    )
    common.add_argument(
        "--paper-literal",
        action="store_true",
        help="Report the bias of t_k without the theta factor.",
    )
    common.add_argument(
        "--clamp-nonnegative",
        action="store_true",
        help="Truncate negative variance estimates at zero.",
    )
    common.add_argument(
        "--regression-coefficient",
        choices=["sample", "population"],
        default="sample",
    )
    common.add_argument(
        "--jobs", type=int, default=1, help="Parallel workers for simulation."
    )

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--seed", type=int, default=0)
    sampling.add_argument("--reps", type=int, default=10_000, help="Replications.")
    sampling.add_argument(
        "--limit", type=int, help="Largest sample space to enumerate."
    )

    parser = argparse.ArgumentParser(
        prog="varest",
        description="Variance estimators that use an auxiliary variable.",
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v: info, -vv: debug."
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("moments", parents=[common], help="Population moments.")
    estimate_parser = commands.add_parser(
        "estimate", parents=[common], help="Point estimates on one sample."
    )
    estimate_parser.add_argument(
        "--indices", type=_index_list, help="1-based units of the sample, e.g. 1,4."
    )
    estimate_parser.add_argument("--seed", type=int, default=0)
    commands.add_parser(
        "theory-table", parents=[common], help="First-order bias, MSE and PRE."
    )
    simulate_parser = commands.add_parser(
        "simulate", parents=[common, sampling], help="Monte Carlo bias and MSE."
    )
    simulate_parser.add_argument(
        "--exact", action="store_true", help="Enumerate every sample instead."
    )
    commands.add_parser(
        "enumerate",
        parents=[common, sampling],
        help="Exact bias and MSE over all samples.",
    )
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        data=args.data,
        params=args.params,
        n=args.n,
        theta_mode=ThetaMode.FPC if args.fpc else ThetaMode.SIMPLE,
        output_format=OutputFormat(args.format),
        kinds=args.estimators,
        presets=args.preset,
        paper_literal=args.paper_literal,
        clamp_nonnegative=args.clamp_nonnegative,
        regression_coefficient=args.regression_coefficient,
        n_jobs=args.jobs,
    )


def _dispatch(args: argparse.Namespace) -> pl.DataFrame:
    cfg = _run_config(args)
    if args.command == "moments":
        return cmd_moments(cfg)
    if args.command == "theory-table":
        return cmd_theory_table(cfg)
    if args.command == "estimate":
        return cmd_estimate(cfg, args.indices, args.seed)
    if cfg.n is None:
        raise InputError("--n is required for simulation.")
    plan = SimulationPlan(n=cfg.n, replications=args.reps, seed=args.seed)
    exact = args.command == "enumerate" or args.exact
    return cmd_simulate(cfg, plan, exact=exact, limit=args.limit)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    logging.getLogger("varest").setLevel(level)
    logging.captureWarnings(True)

    try:
        df = _dispatch(args)
    except (InputError, OSError) as e:
        print(f"varest: error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except NumericError as e:
        print(f"varest: error: {e}", file=sys.stderr)
        return EXIT_NUMERIC_ERROR
    finally:
        logging.captureWarnings(False)

    sys.stdout.write(render(df, args.format))
    return EXIT_OK
