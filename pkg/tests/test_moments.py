import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import varest as vr
from varest.constants import BadIndex, InvalidSize, SchemaError, TooSmall

from .util import csv_to_population, populations


def test_hand_computed_moments():
    pop = vr.Population([1, 2, 3, 4], [2, 4, 6, 8])
    pm = vr.population_moments(pop, 2)
    assert pm.N == 4
    assert pm.S2_y == pytest.approx(5 / 3)
    assert pm.S2_x == pytest.approx(20 / 3)
    assert pm.rho_yx == pytest.approx(1.0)
    assert pm.lambda40 == pytest.approx(1.64)
    assert pm.lambda04 == pytest.approx(1.64)
    assert pm.lambda22 == pytest.approx(1.64)
    assert pm.beta2y_star == pytest.approx(0.64)
    assert pm.theta == 0.5
    assert pm.mean_y == 2.5
    assert pm.C_y == pytest.approx(math.sqrt(5 / 3) / 2.5)
    assert pm.C_yx == pytest.approx(pm.rho_yx * pm.C_y * pm.C_x)


def test_fpc_theta(toy_population):
    assert vr.population_moments(toy_population, 2, use_fpc=True).theta == 0.25
    assert vr.population_moments(toy_population, 4, use_fpc=True).theta == 0.0


def test_zero_mean_gives_no_coefficient_of_variation():
    pm = vr.population_moments(vr.Population([-1, 1, -2, 2], [1, 2, 3, 5]), 2)
    assert pm.mean_y == 0
    assert pm.C_y is None
    assert pm.C_x is not None


def test_population_inputs():
    df = pd.DataFrame({"y": [1.0, 2.0, 3.0], "x": [3.0, 1.0, 2.0]})
    from_pandas = vr.Population(df)
    from_sequences = vr.Population([1, 2, 3], [3, 1, 2])
    assert from_pandas.data.equals(from_sequences.data)
    assert len(from_pandas) == 3

    with pytest.raises(SchemaError, match="missing column"):
        vr.Population(pd.DataFrame({"y": [1, 2]}))
    with pytest.raises(SchemaError, match="finite"):
        vr.Population([1, float("nan")], [1, 2])
    with pytest.raises(TooSmall):
        vr.Population([], [])
    with pytest.raises(ValueError, match="required"):
        vr.Population([1, 2])


def test_population_is_read_only(toy_population):
    with pytest.raises(ValueError):
        toy_population.y[0] = 10


def test_take_and_with_index(toy_population):
    sub = toy_population.take([4, 2])
    assert sub.y.tolist() == [2.0, 4.0]
    assert toy_population.with_index().get_column("unit").to_list() == [1, 2, 3, 4]
    with pytest.raises(BadIndex):
        toy_population.take([0, 1])


def test_sample_size_checks(toy_population):
    with pytest.raises(InvalidSize, match="2 <= n <= N"):
        vr.population_moments(toy_population, 1)
    with pytest.raises(InvalidSize):
        vr.population_moments(toy_population, 5)
    pm = vr.population_moments(toy_population, 2)
    with pytest.raises(InvalidSize):
        pm.with_n(5)


def test_sample_stats_full_sample_matches_population(toy_population):
    pm = vr.population_moments(toy_population, 4)
    s = vr.sample_stats(toy_population, range(1, 5))
    assert s.s2_y == pm.S2_y
    assert s.s2_x == pm.S2_x
    assert s.lambda22_hat == pm.lambda22
    assert s.lambda04_hat == pm.lambda04


def test_sample_stats_constant_sample():
    pop = csv_to_population(
        """
        y,x
        3,1
        3,2
        5,2
        """
    )
    s = vr.sample_stats(pop, [1, 2])
    assert s.s2_y == 0.0
    assert math.isnan(s.lambda22_hat)
    s = vr.sample_stats(pop, [2, 3])
    assert s.s2_x == 0.0
    assert math.isnan(s.lambda04_hat)


def test_batch_matches_scalar(six_units):
    positions = np.array([[0, 2, 4], [1, 3, 5], [0, 1, 5]])
    batch = vr.sample_stats_batch(six_units, positions)
    for row, pos in enumerate(positions):
        s = vr.sample_stats(six_units, (pos + 1).tolist())
        assert batch.s2_y[row] == s.s2_y
        assert batch.s2_x[row] == s.s2_x
        assert batch.lambda22_hat[row] == s.lambda22_hat
    with pytest.raises(TooSmall):
        vr.sample_stats_batch(six_units, np.array([[0], [1]]))


def test_from_summary_and_to_frame(apple_moments):
    assert apple_moments.beta2y_star == pytest.approx(15.523)
    assert apple_moments.S2_y == pytest.approx(136.1749, rel=1e-6)
    assert apple_moments.mean_y is None
    assert apple_moments.C_yx == pytest.approx(2.668, rel=1e-3)
    df = apple_moments.to_frame()
    values = dict(df.rows())
    assert values["N"] == 104
    assert values["mean_y"] is None
    assert values["lambda22_star"] == pytest.approx(13.398)


@settings(max_examples=50, deadline=None)
@given(populations)
def test_kurtosis_at_least_one(pop):
    assert vr.central_moment_ratio(pop, 4, 0) >= 1 - 1e-12
    assert vr.central_moment_ratio(pop, 0, 4) >= 1 - 1e-12


@settings(max_examples=50, deadline=None)
@given(
    populations,
    st.floats(min_value=0.01, max_value=100),
    st.floats(min_value=0.01, max_value=100),
)
def test_scale_invariance(pop, k_y, k_x):
    pm = vr.population_moments(pop, 2)
    scaled = vr.population_moments(pop.scaled(k_y, k_x), 2)
    assert scaled.S2_y == pytest.approx(k_y**2 * pm.S2_y, rel=1e-9)
    assert scaled.S2_x == pytest.approx(k_x**2 * pm.S2_x, rel=1e-9)
    for name in ("rho_yx", "lambda40", "lambda04", "lambda22"):
        assert getattr(scaled, name) == pytest.approx(
            getattr(pm, name), rel=1e-9, abs=1e-12
        )
