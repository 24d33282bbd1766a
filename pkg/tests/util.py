from __future__ import annotations

import io

import numpy as np
import polars as pl
from hypothesis import strategies as st

from varest import Population


def csv_to_population(csv_string: str) -> Population:
    """Reads an indented CSV literal into a population."""
    csv_string = "\n".join(line.strip() for line in csv_string.splitlines())
    return Population(pl.read_csv(io.StringIO(csv_string)))


def random_population(
    seed: int, N: int, rho: float = 0.8, sigma: float = 0.5
) -> Population:
    """Lognormal-like y with x positively correlated to it."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((2, N))
    y = np.exp(sigma * z[0])
    x = np.exp(sigma * (rho * z[0] + np.sqrt(1 - rho**2) * z[1]))
    return Population(np.round(10 * y, 3), np.round(100 * x, 3))


def rel_err(actual: float, expected: float) -> float:
    return abs(actual - expected) / abs(expected)


# Populations of 4 to 12 units with non-constant y and x
values = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False).map(
    lambda v: round(v, 2)
)
populations = (
    st.integers(min_value=4, max_value=12)
    .flatmap(
        lambda N: st.tuples(
            st.lists(values, min_size=N, max_size=N),
            st.lists(values, min_size=N, max_size=N),
        )
    )
    .filter(lambda yx: len(set(yx[0])) > 1 and len(set(yx[1])) > 1)
    .map(lambda yx: Population(*yx))
)
