"""
Empirical checks of the first-order theory under simple random sampling without replacement.

`simulate` draws SRSWOR samples from seeded substreams; `enumerate_exact` visits every
n-subset once and so gives the exact design expectation and MSE of each estimator.

Both run their work in independent chunks with `joblib` and combine the per-chunk sums in
chunk order with `math.fsum`, so results never depend on `n_jobs`.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import ClassVar, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from varest.constants import (
    REGRESSION_COEFFICIENT_TYPES,
    Config,
    InvalidParams,
    InvalidSize,
    Source,
    TooLarge,
)
from varest.estimators import EstimatorConfig, estimate_batch
from varest.moments import (
    Population,
    PopulationMoments,
    population_moments,
    sample_stats_batch,
)
from varest.util import get_obj_repr

logger = logging.getLogger(__name__)

# Upper bound on the uniform draws held in memory at once while sampling a block
_MAX_DRAWS = 1 << 22


@dataclass(frozen=True)
class SimulationPlan:
    """
    Examples:
        >>> vr.SimulationPlan(n=2, replications=0, seed=1, estimators=[vr.EstimatorConfig("ratio")])
        Traceback (most recent call last):
        ...
        varest.constants.InvalidSize: The number of replications must be at least 1 (got 0).
    """

    n: int
    replications: int
    seed: int
    estimators: Sequence[EstimatorConfig] = field(default_factory=list)

    def __post_init__(self):
        if self.replications < 1:
            raise InvalidSize(
                f"The number of replications must be at least 1 (got {self.replications})."
            )
        if not 0 <= self.seed < 2**64:
            raise InvalidParams(
                f"The seed must be an unsigned 64-bit integer (got {self.seed})."
            )

    def validate(self, pop: Population) -> None:
        if not 2 <= self.n < pop.N:
            raise InvalidSize(
                f"Simulation needs 2 <= n < N (got n={self.n}, N={pop.N})."
            )


@dataclass(frozen=True)
class EmpiricalReport:
    """
    Moments of an estimator over the simulated samples where it was defined.
    `failed_sample_count` samples are excluded from every moment.
    """

    estimator: EstimatorConfig
    mean_estimate: float
    empirical_bias: float
    empirical_mse: float
    stderr_of_mean: float
    negative_estimate_count: int
    failed_sample_count: int

    source: ClassVar[Source] = Source.SIMULATION

    @property
    def label(self) -> str:
        return self.estimator.label

    def __repr__(self) -> str:
        return get_obj_repr(
            self,
            estimator=self.label,
            bias=self.empirical_bias,
            mse=self.empirical_mse,
            failed=self.failed_sample_count,
        )


@dataclass(frozen=True, repr=False)
class ExactReport(EmpiricalReport):
    """Design moments over all `sample_space_size = C(N, n)` samples. `stderr_of_mean` is 0, or NaN when every sample failed."""

    sample_space_size: int = 0

    source: ClassVar[Source] = Source.ENUMERATION


@dataclass(frozen=True)
class _Sums:
    """Per-chunk sums of one estimator; `dev` is the deviation `t - S2_y`."""

    total: float
    dev: float
    dev2: float
    valid: int
    failed: int
    negative: int


def srswor_sample(N: int, n: int, rng: np.random.Generator) -> frozenset:
    """
    Draws one simple random sample without replacement: the first `n` positions of a uniformly
    random permutation of `1..N`.

    Examples:
        >>> import numpy as np
        >>> sorted(vr.srswor_sample(4, 4, np.random.default_rng(0)))
        [1, 2, 3, 4]
        >>> vr.srswor_sample(4, 2, np.random.default_rng(7)) == vr.srswor_sample(4, 2, np.random.default_rng(7))
        True
        >>> vr.srswor_sample(4, 5, np.random.default_rng(0))
        Traceback (most recent call last):
        ...
        varest.constants.InvalidSize: Sample size n=5 must satisfy 2 <= n <= N (N=4).
    """
    if not 2 <= n <= N:
        raise InvalidSize(f"Sample size n={n} must satisfy 2 <= n <= N (N={N}).")
    return frozenset((_draw_positions(N, n, 1, rng)[0] + 1).tolist())


def _draw_positions(
    N: int, n: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    """`count` independent SRSWOR samples as 0-based positions, shape (count, n)."""
    rows_per_draw = max(1, _MAX_DRAWS // N)
    parts = []
    for start in range(0, count, rows_per_draw):
        rows = min(rows_per_draw, count - start)
        parts.append(np.argsort(rng.random((rows, N)), axis=1)[:, :n])
    return np.concatenate(parts)


def _chunk_sums(
    pop: Population,
    positions: np.ndarray,
    configs: Sequence[EstimatorConfig],
    pm: PopulationMoments,
    regression_coefficient: REGRESSION_COEFFICIENT_TYPES,
    clamp_nonnegative: bool,
) -> List[_Sums]:
    batch = sample_stats_batch(pop, positions)
    sums = []
    for cfg in configs:
        res = estimate_batch(
            cfg,
            batch,
            pm,
            regression_coefficient=regression_coefficient,
            clamp_nonnegative=clamp_nonnegative,
        )
        values = res.values[~res.failed]
        dev = values - pm.S2_y
        sums.append(
            _Sums(
                total=math.fsum(values),
                dev=math.fsum(dev),
                dev2=math.fsum(dev * dev),
                valid=len(values),
                failed=int(res.failed.sum()),
                negative=int(res.negative.sum()),
            )
        )
    return sums


def _simulate_block(
    pop: Population,
    n: int,
    seed: int,
    block: int,
    size: int,
    configs: Sequence[EstimatorConfig],
    pm: PopulationMoments,
    regression_coefficient: REGRESSION_COEFFICIENT_TYPES,
    clamp_nonnegative: bool,
) -> List[_Sums]:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    positions = _draw_positions(pop.N, n, size, rng)
    return _chunk_sums(
        pop, positions, configs, pm, regression_coefficient, clamp_nonnegative
    )


def _combine(
    chunks: List[List[_Sums]], configs: Sequence[EstimatorConfig], S2_y: float
) -> List[Tuple[EstimatorConfig, dict]]:
    combined = []
    for i, cfg in enumerate(configs):
        parts = [chunk[i] for chunk in chunks]
        valid = sum(p.valid for p in parts)
        counts = dict(
            negative_estimate_count=sum(p.negative for p in parts),
            failed_sample_count=sum(p.failed for p in parts),
        )
        if valid == 0:
            nan = float("nan")
            stats = dict(
                mean_estimate=nan,
                empirical_bias=nan,
                empirical_mse=nan,
                stderr_of_mean=nan,
            )
        else:
            dev = math.fsum(p.dev for p in parts)
            dev2 = math.fsum(p.dev2 for p in parts)
            mean = math.fsum(p.total for p in parts) / valid
            bias = mean - S2_y
            if valid > 1:
                variance = max(dev2 - dev * dev / valid, 0.0) / (valid - 1)
                stderr = math.sqrt(variance / valid)
            else:
                stderr = float("nan")
            stats = dict(
                mean_estimate=mean,
                empirical_bias=bias,
                # absorbs rounding so that mse >= bias^2 always holds
                empirical_mse=max(dev2 / valid, bias * bias),
                stderr_of_mean=stderr,
            )
        combined.append((cfg, {**stats, **counts}))
    return combined


def _log_summary(reports: Sequence[EmpiricalReport]) -> None:
    for r in reports:
        logger.info(
            "%s: %d failed, %d negative estimates",
            r.label,
            r.failed_sample_count,
            r.negative_estimate_count,
        )


def simulate(
    pop: Population,
    plan: SimulationPlan,
    *,
    n_jobs: Optional[int] = None,
    backend: str = "threading",
    regression_coefficient: Optional[REGRESSION_COEFFICIENT_TYPES] = None,
    clamp_nonnegative: Optional[bool] = None,
) -> List[EmpiricalReport]:
    """
    Monte Carlo bias and MSE of each estimator of `plan`.

    Replication `r` belongs to block `r // Config.replication_block_size`, and every block draws from
    its own stream `SeedSequence(plan.seed, spawn_key=(block,))`. The output therefore depends only
    on the population, the plan and the block size.

    Examples:
        >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 6, 8])
        >>> plan = vr.SimulationPlan(n=2, replications=2000, seed=42, estimators=[vr.EstimatorConfig("unbiased"), vr.EstimatorConfig("ratio")])
        >>> unbiased, ratio = vr.simulate(pop, plan)
        >>> ratio.empirical_mse < unbiased.empirical_mse
        True
        >>> abs(unbiased.empirical_bias) <= 4 * unbiased.stderr_of_mean
        True
        >>> vr.simulate(pop, plan, n_jobs=2) == [unbiased, ratio]
        True
    """
    plan.validate(pop)
    if n_jobs is None:
        n_jobs = Config.n_jobs
    if regression_coefficient is None:
        regression_coefficient = Config.regression_coefficient
    if clamp_nonnegative is None:
        clamp_nonnegative = Config.clamp_nonnegative
    block_size = Config.replication_block_size
    configs = list(plan.estimators)
    pm = population_moments(pop, plan.n)

    n_blocks = -(-plan.replications // block_size)
    logger.debug(
        "Simulating N=%d n=%d replications=%d blocks=%d n_jobs=%d",
        pop.N,
        plan.n,
        plan.replications,
        n_blocks,
        n_jobs,
    )
    chunks = Parallel(n_jobs=n_jobs, backend=backend)(
        delayed(_simulate_block)(
            pop,
            plan.n,
            plan.seed,
            block,
            min(block_size, plan.replications - block * block_size),
            configs,
            pm,
            regression_coefficient,
            clamp_nonnegative,
        )
        for block in range(n_blocks)
    )
    reports = [
        EmpiricalReport(estimator=cfg, **stats)
        for cfg, stats in _combine(chunks, configs, pm.S2_y)  # type: ignore
    ]
    _log_summary(reports)
    return reports


def _combination_chunks(N: int, n: int, size: int) -> Iterator[np.ndarray]:
    combos = itertools.combinations(range(N), n)
    while True:
        chunk = list(itertools.islice(combos, size))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.int64)


def enumerate_exact(
    pop: Population,
    n: int,
    estimators: Sequence[EstimatorConfig],
    limit: Optional[int] = None,
    *,
    n_jobs: Optional[int] = None,
    backend: str = "threading",
    regression_coefficient: Optional[REGRESSION_COEFFICIENT_TYPES] = None,
    clamp_nonnegative: Optional[bool] = None,
) -> List[ExactReport]:
    """
    Exact design expectation and MSE of each estimator, averaging over all `C(N, n)` samples.

    Parameters:
        limit:
            Largest sample space to enumerate. Defaults to `Config.enumeration_limit`.

    Examples:
        >>> pop = vr.Population([2, 4, 5, 7, 8, 10], [1, 3, 4, 6, 7, 9])
        >>> (report,) = vr.enumerate_exact(pop, 3, [vr.EstimatorConfig("unbiased")])
        >>> report.sample_space_size, abs(report.empirical_bias) < 1e-10 * vr.population_moments(pop, 3).S2_y
        (20, True)
        >>> vr.enumerate_exact(pop, 3, [vr.EstimatorConfig("unbiased")], limit=10)
        Traceback (most recent call last):
        ...
        varest.constants.TooLarge: C(6, 3) = 20 samples exceed the enumeration limit of 10.
    """
    if limit is None:
        limit = Config.enumeration_limit
    if n_jobs is None:
        n_jobs = Config.n_jobs
    if regression_coefficient is None:
        regression_coefficient = Config.regression_coefficient
    if clamp_nonnegative is None:
        clamp_nonnegative = Config.clamp_nonnegative
    pm = population_moments(pop, n)
    space = math.comb(pop.N, n)
    if space > limit:
        raise TooLarge(
            f"C({pop.N}, {n}) = {space} samples exceed the enumeration limit of {limit}."
        )
    configs = list(estimators)
    logger.debug("Enumerating C(%d, %d) = %d samples", pop.N, n, space)

    chunks = Parallel(n_jobs=n_jobs, backend=backend)(
        delayed(_chunk_sums)(
            pop, positions, configs, pm, regression_coefficient, clamp_nonnegative
        )
        for positions in _combination_chunks(
            pop.N, n, Config.replication_block_size
        )
    )
    reports = []
    for cfg, stats in _combine(chunks, configs, pm.S2_y):  # type: ignore
        if not math.isnan(stats["mean_estimate"]):
            stats["stderr_of_mean"] = 0.0
        reports.append(ExactReport(estimator=cfg, sample_space_size=space, **stats))
    _log_summary(reports)
    return reports
