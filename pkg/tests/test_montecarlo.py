import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.stats import chi2

import varest as vr
from varest.constants import InvalidParams, InvalidSize, TooLarge

from .util import csv_to_population, populations, random_population

ESTIMATORS = [
    vr.EstimatorConfig("unbiased"),
    vr.EstimatorConfig("ratio"),
    vr.EstimatorConfig("sahai_ray", vr.SahaiParams(w=0.8)),
]


def test_srswor_sample_covers_population():
    rng = np.random.default_rng(1)
    assert vr.srswor_sample(5, 5, rng) == frozenset(range(1, 6))
    sample = vr.srswor_sample(10, 3, rng)
    assert len(sample) == 3
    assert all(1 <= i <= 10 for i in sample)


def test_srswor_sample_is_uniform():
    rng = np.random.default_rng(2024)
    draws = 30_000
    counts = Counter(vr.srswor_sample(4, 2, rng) for _ in range(draws))
    subsets = [frozenset(c) for c in itertools.combinations(range(1, 5), 2)]
    assert set(counts) == set(subsets)
    expected = draws / len(subsets)
    statistic = sum((counts[s] - expected) ** 2 / expected for s in subsets)
    assert chi2.sf(statistic, df=len(subsets) - 1) > 1e-4


def test_plan_validation(toy_population):
    with pytest.raises(InvalidSize, match="replications"):
        vr.SimulationPlan(n=2, replications=0, seed=0)
    with pytest.raises(InvalidParams, match="64-bit"):
        vr.SimulationPlan(n=2, replications=10, seed=-1)
    with pytest.raises(InvalidParams):
        vr.SimulationPlan(n=2, replications=10, seed=2**64)
    with pytest.raises(InvalidSize, match="n < N"):
        vr.simulate(toy_population, vr.SimulationPlan(n=4, replications=10, seed=0))


def test_simulation_is_reproducible():
    pop = random_population(5, N=15)
    plan = vr.SimulationPlan(n=4, replications=1000, seed=99, estimators=ESTIMATORS)
    vr.Config.replication_block_size = 128
    serial = vr.simulate(pop, plan, n_jobs=1)
    assert vr.simulate(pop, plan, n_jobs=3) == serial
    assert vr.simulate(pop, plan) == serial

    other_seed = vr.SimulationPlan(n=4, replications=1000, seed=100, estimators=ESTIMATORS)
    assert vr.simulate(pop, other_seed) != serial


def test_exact_enumeration_unbiased_estimator():
    pop = random_population(11, N=10)
    (report,) = vr.enumerate_exact(pop, 4, [vr.EstimatorConfig("unbiased")])
    S2_y = vr.population_moments(pop, 4).S2_y
    assert report.sample_space_size == math.comb(10, 4)
    assert abs(report.empirical_bias) <= 1e-9 * S2_y
    assert report.stderr_of_mean == 0.0
    assert report.source == vr.Source.ENUMERATION


def test_exact_ratio_bias_with_shifted_auxiliary(six_units):
    pm = vr.population_moments(six_units, 3)
    (ratio,) = vr.enumerate_exact(six_units, 3, [vr.EstimatorConfig("ratio")])
    assert ratio.sample_space_size == 20
    assert ratio.failed_sample_count == 0
    assert abs(ratio.empirical_bias) <= 1e-9 * pm.S2_y
    assert ratio.empirical_mse <= 1e-12 * pm.S2_y**2
    assert vr.theoretical_bias(vr.EstimatorConfig("ratio"), pm) == 0.0


def test_census_has_no_error(toy_population):
    configs = [
        vr.EstimatorConfig("unbiased"),
        vr.EstimatorConfig("ratio"),
        vr.EstimatorConfig("sahai_ray", vr.SahaiParams(w=0.5)),
    ]
    for report in vr.enumerate_exact(toy_population, 4, configs):
        assert report.sample_space_size == 1
        assert report.empirical_bias == 0.0
        assert report.empirical_mse == 0.0


ALL_KINDS = [
    vr.EstimatorConfig("unbiased"),
    vr.EstimatorConfig("ratio"),
    vr.EstimatorConfig("product"),
    vr.EstimatorConfig("regression"),
    vr.EstimatorConfig("khosh", vr.KhoshParams(a=1, b=0, alpha=0.5)),
    vr.EstimatorConfig("sahai_ray", vr.SahaiParams(w=0.8)),
    vr.EstimatorConfig("generalized", vr.GeneralizedParams(alpha=0.5, beta=2)),
]


@settings(max_examples=30, deadline=None)
@given(populations)
def test_unbiased_estimator_is_exactly_unbiased(pop):
    tolerance = 1e-9 * float(np.var(pop.y)) + 1e-12 * float(np.mean(pop.y**2))
    for n in range(2, pop.N + 1):
        (report,) = vr.enumerate_exact(pop, n, [vr.EstimatorConfig("unbiased")])
        assert abs(report.empirical_bias) <= tolerance, n


@pytest.mark.parametrize("seed", range(20))
def test_simulation_agrees_with_enumeration(seed):
    N = 5 + seed % 8
    pop = random_population(seed, N=N)
    vr.Config.warn_on_expansion_validity = False
    vr.Config.warn_on_negative_estimate = False
    for n in range(2, N):
        S2_y = vr.population_moments(pop, n).S2_y
        exact = vr.enumerate_exact(pop, n, ALL_KINDS)
        assert abs(exact[0].empirical_bias) <= 1e-10 * S2_y
        plan = vr.SimulationPlan(
            n=n, replications=20_000, seed=1000 * seed + n, estimators=ALL_KINDS
        )
        for sim, ex in zip(vr.simulate(pop, plan), exact):
            assert sim.estimator == ex.estimator
            if ex.failed_sample_count == ex.sample_space_size:
                assert sim.failed_sample_count == plan.replications
                continue
            assert sim.empirical_mse >= sim.empirical_bias**2
            gap = abs(sim.mean_estimate - ex.mean_estimate)
            assert gap <= 4 * sim.stderr_of_mean + 1e-9 * S2_y, (n, sim.label)


def test_enumeration_limit(toy_population):
    with pytest.raises(TooLarge, match="C\\(4, 2\\) = 6"):
        vr.enumerate_exact(toy_population, 2, ESTIMATORS, limit=5)
    vr.Config.enumeration_limit = 5
    with pytest.raises(TooLarge):
        vr.enumerate_exact(toy_population, 2, ESTIMATORS)


def test_failed_samples_are_counted():
    pop = csv_to_population(
        """
        y,x
        1,2
        2,2
        3,5
        4,6
        5,9
        """
    )
    ratio, regression = vr.enumerate_exact(
        pop, 2, [vr.EstimatorConfig("ratio"), vr.EstimatorConfig("regression")]
    )
    assert ratio.failed_sample_count == 1
    assert not math.isnan(ratio.empirical_mse)
    # every two-unit sample leaves the sample regression coefficient undefined
    assert regression.failed_sample_count == 10
    assert math.isnan(regression.empirical_mse)
    assert math.isnan(regression.stderr_of_mean)
    assert ratio.stderr_of_mean == 0.0

    df = vr.reports_to_frame([ratio, regression])
    assert df.get_column("failed_samples").to_list() == [1, 10]


def test_negative_estimates_and_clamping(toy_population):
    ts = [vr.EstimatorConfig("sahai_ray", vr.SahaiParams(w=2))]
    (raw,) = vr.enumerate_exact(toy_population, 2, ts)
    assert raw.negative_estimate_count > 0
    (clamped,) = vr.enumerate_exact(toy_population, 2, ts, clamp_nonnegative=True)
    assert clamped.negative_estimate_count == raw.negative_estimate_count
    assert clamped.mean_estimate > raw.mean_estimate
    assert clamped.mean_estimate >= 0


def test_first_order_theory_improves_with_sample_size():
    pop = random_population(21, N=200, rho=0.9)
    ratio = vr.EstimatorConfig("ratio")

    def gap(n: int) -> float:
        pm = vr.population_moments(pop, n, use_fpc=True)
        plan = vr.SimulationPlan(n=n, replications=4000, seed=n, estimators=[ratio])
        (report,) = vr.simulate(pop, plan)
        theory = vr.theoretical_mse(ratio, pm)
        return abs(report.empirical_mse - theory) / theory

    assert gap(100) < gap(4)
