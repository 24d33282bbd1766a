"""
Population- and sample-level statistics consumed by the estimators and the theory formulas.

Central moments use the 1/N (resp. 1/n) divisor, so that `λ40` is the usual kurtosis.
Variances use N-1 for the population and n-1 for samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd
import polars as pl
from packaging import version

from varest.constants import (
    POLARS_VERSION,
    VALUE_TYPE,
    X_KEY,
    Y_KEY,
    BadIndex,
    DegenerateVariate,
    InvalidOrder,
    InvalidSize,
    SchemaError,
    TooSmall,
)
from varest.util import as_float_array, get_obj_repr

PopulationTypes = Union[pl.DataFrame, pd.DataFrame]


class Population:
    """
    A finite population of paired units `(y_i, x_i)`, `i = 1..N`.

    Parameters:
        y:
            Either the study variate (any sequence of numbers) or a polars/pandas DataFrame with columns `y` and `x`.
        x:
            The auxiliary variate. Must be omitted when `y` is a DataFrame.

    Examples:
        >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 6, 8])
        >>> pop
        <Population N=4>
        >>> pop.data
        shape: (4, 2)
        ┌─────┬─────┐
        │ y   ┆ x   │
        │ --- ┆ --- │
        │ f64 ┆ f64 │
        ╞═════╪═════╡
        │ 1.0 ┆ 2.0 │
        │ 2.0 ┆ 4.0 │
        │ 3.0 ┆ 6.0 │
        │ 4.0 ┆ 8.0 │
        └─────┴─────┘
        >>> vr.Population([1, 2], [1, 2, 3])
        Traceback (most recent call last):
        ...
        varest.constants.SchemaError: y and x must have the same length (got 2 and 3).
        >>> vr.Population([1], [1])
        Traceback (most recent call last):
        ...
        varest.constants.TooSmall: A population needs at least 2 units (got 1).
    """

    def __init__(
        self,
        y: Union[Sequence[float], np.ndarray, PopulationTypes],
        x: Optional[Union[Sequence[float], np.ndarray]] = None,
    ):
        if isinstance(y, (pl.DataFrame, pd.DataFrame)):
            if x is not None:
                raise ValueError("Pass either a DataFrame or two sequences, not both.")
            df = pl.from_pandas(y) if isinstance(y, pd.DataFrame) else y
            missing = [c for c in (Y_KEY, X_KEY) if c not in df.columns]
            if missing:
                raise SchemaError(f"Population data is missing column(s) {missing}.")
            y, x = df.get_column(Y_KEY), df.get_column(X_KEY)
        elif x is None:
            raise ValueError("The auxiliary variate x is required.")

        y_arr, x_arr = as_float_array(y, Y_KEY), as_float_array(x, X_KEY)
        if len(y_arr) != len(x_arr):
            raise SchemaError(
                f"y and x must have the same length (got {len(y_arr)} and {len(x_arr)})."
            )
        if len(y_arr) < 2:
            raise TooSmall(f"A population needs at least 2 units (got {len(y_arr)}).")
        if not (np.isfinite(y_arr).all() and np.isfinite(x_arr).all()):
            raise SchemaError("Population values must be finite (no NaN or Inf).")

        y_arr.flags.writeable = False
        x_arr.flags.writeable = False
        self._y = y_arr
        self._x = x_arr

    @classmethod
    def from_frame(cls, df: PopulationTypes) -> Population:
        return cls(df)

    @property
    def data(self) -> pl.DataFrame:
        return pl.DataFrame(
            {Y_KEY: self._y, X_KEY: self._x},
            schema={Y_KEY: VALUE_TYPE, X_KEY: VALUE_TYPE},
        )

    @property
    def y(self) -> np.ndarray:
        return self._y

    @property
    def x(self) -> np.ndarray:
        return self._x

    @property
    def N(self) -> int:
        return len(self._y)

    def __len__(self) -> int:
        return self.N

    def __repr__(self) -> str:
        return get_obj_repr(self, N=self.N)

    def scaled(self, k_y: float, k_x: float) -> Population:
        """
        Returns a copy with y multiplied by `k_y` and x by `k_x`.

        Examples:
            >>> vr.Population([1, 2], [3, 4]).scaled(2, 10).data.rows()
            [(2.0, 30.0), (4.0, 40.0)]
        """
        return Population(self._y * k_y, self._x * k_x)

    def take(self, indices: Iterable[int]) -> Population:
        """
        Returns the sub-population at the given 1-based indices (sorted ascending).

        Examples:
            >>> vr.Population([1, 2, 3, 4], [2, 4, 6, 8]).take({1, 4}).data.rows()
            [(1.0, 2.0), (4.0, 8.0)]
        """
        idx = _validate_indices(indices, self.N)
        return Population(self._y[idx], self._x[idx])

    def with_index(self, name: str = "unit") -> pl.DataFrame:
        """
        The population data with a leading 1-based unit index column.

        Examples:
            >>> vr.Population([5, 6], [7, 8]).with_index().columns
            ['unit', 'y', 'x']
        """
        if POLARS_VERSION < _ROW_INDEX_VERSION:
            return self.data.with_row_count(name, offset=1)  # pragma: no cover
        return self.data.with_row_index(name, offset=1)


_ROW_INDEX_VERSION = version.parse("0.20.4")


@dataclass(frozen=True)
class PopulationMoments:
    """
    Every population-level scalar the theory consumes.

    `mean_y`, `mean_x`, `C_y` and `C_x` are `None` when unavailable (summary input without means, or a zero mean).
    The starred quantities are derived properties and so always equal the corresponding λ minus one.
    """

    n: int
    S2_y: float
    S2_x: float
    rho_yx: float
    lambda40: float
    lambda04: float
    lambda22: float
    theta: float
    N: Optional[int] = None
    mean_y: Optional[float] = None
    mean_x: Optional[float] = None
    C_y: Optional[float] = None
    C_x: Optional[float] = None
    use_fpc: bool = False

    @property
    def beta2y_star(self) -> float:
        return self.lambda40 - 1

    @property
    def beta2x_star(self) -> float:
        return self.lambda04 - 1

    @property
    def lambda22_star(self) -> float:
        return self.lambda22 - 1

    @property
    def S_y(self) -> float:
        return math.sqrt(self.S2_y)

    @property
    def S_x(self) -> float:
        return math.sqrt(self.S2_x)

    @property
    def C_yx(self) -> Optional[float]:
        """ρ·C_y·C_x; reported for provenance only."""
        if self.C_y is None or self.C_x is None:
            return None
        return self.rho_yx * self.C_y * self.C_x

    def with_n(self, n: int, use_fpc: Optional[bool] = None) -> PopulationMoments:
        """
        Returns a copy for another sample size (and optionally another theta mode).

        Examples:
            >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 6, 8])
            >>> pm = vr.population_moments(pop, 2)
            >>> pm.with_n(4).theta, pm.with_n(4, use_fpc=True).theta
            (0.25, 0.0)
        """
        if use_fpc is None:
            use_fpc = self.use_fpc
        _check_sample_size(n, self.N)
        return replace(self, n=n, use_fpc=use_fpc, theta=_theta(n, self.N, use_fpc))

    @classmethod
    def from_summary(
        cls,
        N: int,
        n: int,
        S_y: float,
        S_x: float,
        rho_yx: float,
        beta2y: float,
        beta2x: float,
        lambda22: float,
        C_y: Optional[float] = None,
        C_x: Optional[float] = None,
        use_fpc: bool = False,
    ) -> PopulationMoments:
        """
        Builds moments from published summary statistics. Means are not derivable and left as `None`.

        Examples:
            >>> pm = vr.PopulationMoments.from_summary(
            ...     N=104, n=20, S_y=11.6694, S_x=23029.072, rho_yx=0.865,
            ...     beta2y=16.523, beta2x=17.516, lambda22=14.398, C_x=1.653,
            ... )
            >>> round(pm.beta2y_star, 3), round(pm.beta2x_star, 3), round(pm.lambda22_star, 3)
            (15.523, 16.516, 13.398)
            >>> pm.theta
            0.05
        """
        _check_sample_size(n, N)
        S2_y, S2_x = S_y**2, S_x**2
        if S2_y == 0 or S2_x == 0:
            raise DegenerateVariate("Summary statistics give a zero variance.")
        return cls(
            n=n,
            N=N,
            S2_y=S2_y,
            S2_x=S2_x,
            rho_yx=rho_yx,
            lambda40=beta2y,
            lambda04=beta2x,
            lambda22=lambda22,
            theta=_theta(n, N, use_fpc),
            C_y=C_y,
            C_x=C_x,
            use_fpc=use_fpc,
        )

    def to_frame(self) -> pl.DataFrame:
        """
        One row per quantity, including the derived ones.

        Examples:
            >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 6, 8])
            >>> vr.population_moments(pop, 2).to_frame().columns
            ['quantity', 'value']
        """
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(
            beta2y_star=self.beta2y_star,
            beta2x_star=self.beta2x_star,
            lambda22_star=self.lambda22_star,
            C_yx=self.C_yx,
        )
        return pl.DataFrame(
            {
                "quantity": list(values),
                "value": [None if v is None else float(v) for v in values.values()],
            },
            schema={"quantity": pl.String, "value": VALUE_TYPE},
        )


@dataclass(frozen=True)
class SampleStats:
    """
    Per-sample statistics. The λ-hat fields are NaN when the matching sample variance is zero.
    """

    n: int
    s2_y: float
    s2_x: float
    lambda22_hat: float
    lambda04_hat: float


@dataclass(frozen=True)
class SampleBatch:
    """
    Many samples of the same size at once, one array element per sample.
    Used by the simulation and enumeration engines.
    """

    n: int
    s2_y: np.ndarray
    s2_x: np.ndarray
    lambda22_hat: np.ndarray
    lambda04_hat: np.ndarray

    def __len__(self) -> int:
        return len(self.s2_y)


def _centered(values: np.ndarray) -> np.ndarray:
    """Deviations from the row means; rows with a single repeated value give exact zeros."""
    dev = values - values.mean(axis=-1, keepdims=True)
    constant = np.ptp(values, axis=-1) == 0
    if constant.any():
        dev[constant] = 0.0
    return dev


def _moment_ratio(dy: np.ndarray, dx: np.ndarray, p: int, q: int) -> np.ndarray:
    mu_pq = np.mean(dy**p * dx**q, axis=-1)
    mu20 = np.mean(dy**2, axis=-1)
    mu02 = np.mean(dx**2, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return mu_pq / (mu20 ** (p / 2) * mu02 ** (q / 2))


def _check_order(p: int, q: int) -> None:
    if p < 0 or q < 0 or (p + q) % 2 != 0 or p + q < 2:
        raise InvalidOrder(
            f"Moment order (p, q) = ({p}, {q}) must be nonnegative with an even sum of at least 2."
        )


def central_moment_ratio(pop: Population, p: int, q: int) -> float:
    """
    The standardized bivariate central moment `λ_pq = μ_pq / (μ20^(p/2) μ02^(q/2))`,
    with `μ_pq = (1/N) Σ (y_i - ȳ)^p (x_i - x̄)^q`.

    Examples:
        >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 6, 8])
        >>> round(vr.central_moment_ratio(pop, 4, 0), 12)
        1.64
        >>> round(vr.central_moment_ratio(pop, 2, 2), 12)
        1.64
        >>> vr.central_moment_ratio(vr.Population([0, 0, 1, 1], [1, 2, 3, 4]), 4, 0)
        1.0
        >>> vr.central_moment_ratio(pop, 3, 0)
        Traceback (most recent call last):
        ...
        varest.constants.InvalidOrder: Moment order (p, q) = (3, 0) must be nonnegative with an even sum of at least 2.
        >>> vr.central_moment_ratio(vr.Population([1, 1], [1, 2]), 2, 2)
        Traceback (most recent call last):
        ...
        varest.constants.DegenerateVariate: y has zero variance; λ_22 is undefined.
    """
    _check_order(p, q)
    dy, dx = _centered(pop.y[None, :]), _centered(pop.x[None, :])
    if p > 0 and not np.any(dy):
        raise DegenerateVariate(f"y has zero variance; λ_{p}{q} is undefined.")
    if q > 0 and not np.any(dx):
        raise DegenerateVariate(f"x has zero variance; λ_{p}{q} is undefined.")
    return float(_moment_ratio(dy, dx, p, q)[0])


def _theta(n: int, N: Optional[int], use_fpc: bool) -> float:
    if not use_fpc:
        return 1 / n
    if N is None:
        raise InvalidSize("The finite population correction needs the population size N.")
    return 1 / n - 1 / N


def _check_sample_size(n: int, N: Optional[int]) -> None:
    if n < 2 or (N is not None and n > N):
        raise InvalidSize(f"Sample size n={n} must satisfy 2 <= n <= N (N={N}).")


def population_moments(
    pop: Population, n: int, use_fpc: bool = False
) -> PopulationMoments:
    """
    Computes every population quantity the theory formulas consume, for samples of size `n`.

    Parameters:
        pop:
            The population.
        n:
            The sample size. Only `theta` depends on it.
        use_fpc:
            If True, `theta = 1/n - 1/N` instead of `1/n`.

    Examples:
        >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 6, 8])
        >>> pm = vr.population_moments(pop, 2)
        >>> pm.S2_y, pm.S2_x, pm.theta
        (1.6666666666666667, 6.666666666666667, 0.5)
        >>> round(pm.rho_yx, 12), round(pm.lambda22, 12)
        (1.0, 1.64)
        >>> vr.population_moments(pop, 4, use_fpc=True).theta
        0.0
        >>> vr.population_moments(vr.Population([1, 1], [1, 2]), 2)
        Traceback (most recent call last):
        ...
        varest.constants.DegenerateVariate: y has zero variance.
    """
    N = pop.N
    _check_sample_size(n, N)
    y, x = pop.y[None, :], pop.x[None, :]
    dy, dx = _centered(y), _centered(x)
    ss_y, ss_x = np.sum(dy**2, axis=-1)[0], np.sum(dx**2, axis=-1)[0]
    if ss_y == 0:
        raise DegenerateVariate("y has zero variance.")
    if ss_x == 0:
        raise DegenerateVariate("x has zero variance.")

    S2_y, S2_x = float(ss_y / (N - 1)), float(ss_x / (N - 1))
    mean_y, mean_x = float(y.mean(axis=-1)[0]), float(x.mean(axis=-1)[0])
    return PopulationMoments(
        n=n,
        N=N,
        mean_y=mean_y,
        mean_x=mean_x,
        S2_y=S2_y,
        S2_x=S2_x,
        C_y=math.sqrt(S2_y) / mean_y if mean_y != 0 else None,
        C_x=math.sqrt(S2_x) / mean_x if mean_x != 0 else None,
        rho_yx=float(_moment_ratio(dy, dx, 1, 1)[0]),
        lambda40=float(_moment_ratio(dy, dx, 4, 0)[0]),
        lambda04=float(_moment_ratio(dy, dx, 0, 4)[0]),
        lambda22=float(_moment_ratio(dy, dx, 2, 2)[0]),
        theta=_theta(n, N, use_fpc),
        use_fpc=use_fpc,
    )


def _validate_indices(indices: Iterable[int], N: int) -> np.ndarray:
    """Converts 1-based unit indices to sorted 0-based positions."""
    idx = list(indices)
    bad = [i for i in idx if isinstance(i, bool) or int(i) != i or not 1 <= i <= N]
    if bad:
        raise BadIndex(f"Indices {bad} are outside [1, {N}].")
    if len(set(idx)) != len(idx):
        duplicated = sorted({i for i in idx if idx.count(i) > 1})
        raise BadIndex(f"Indices {duplicated} appear more than once.")
    return np.sort(np.asarray(idx, dtype=np.int64)) - 1


def sample_stats_batch(pop: Population, positions: np.ndarray) -> SampleBatch:
    """
    Sample statistics for many samples at once.

    Parameters:
        pop:
            The population.
        positions:
            Integer array of shape (samples, n) holding 0-based unit positions; rows must not repeat a unit.

    Examples:
        >>> import numpy as np
        >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 6, 8])
        >>> batch = vr.sample_stats_batch(pop, np.array([[0, 3], [1, 2]]))
        >>> batch.s2_y.tolist(), batch.s2_x.tolist()
        ([4.5, 0.5], [18.0, 2.0])
    """
    positions = np.asarray(positions)
    if positions.ndim != 2 or positions.shape[1] < 2:
        raise TooSmall("Each sample needs at least 2 units.")
    n = positions.shape[1]
    dy, dx = _centered(pop.y[positions]), _centered(pop.x[positions])
    return SampleBatch(
        n=n,
        s2_y=np.sum(dy**2, axis=-1) / (n - 1),
        s2_x=np.sum(dx**2, axis=-1) / (n - 1),
        lambda22_hat=_moment_ratio(dy, dx, 2, 2),
        lambda04_hat=_moment_ratio(dy, dx, 0, 4),
    )


def sample_stats(pop: Population, indices: Iterable[int]) -> SampleStats:
    """
    Statistics of the sample made of the units at the given 1-based `indices`.

    Examples:
        >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 6, 8])
        >>> s = vr.sample_stats(pop, {1, 4})
        >>> s.n, s.s2_y, s.s2_x
        (2, 4.5, 18.0)
        >>> vr.sample_stats(pop, [2, 2])
        Traceback (most recent call last):
        ...
        varest.constants.BadIndex: Indices [2] appear more than once.
        >>> vr.sample_stats(pop, [5, 1])
        Traceback (most recent call last):
        ...
        varest.constants.BadIndex: Indices [5] are outside [1, 4].
        >>> vr.sample_stats(pop, [3])
        Traceback (most recent call last):
        ...
        varest.constants.TooSmall: A sample needs at least 2 units (got 1).
    """
    idx = _validate_indices(indices, pop.N)
    if len(idx) < 2:
        raise TooSmall(f"A sample needs at least 2 units (got {len(idx)}).")
    batch = sample_stats_batch(pop, idx[None, :])
    return SampleStats(
        n=batch.n,
        s2_y=float(batch.s2_y[0]),
        s2_x=float(batch.s2_x[0]),
        lambda22_hat=float(batch.lambda22_hat[0]),
        lambda04_hat=float(batch.lambda04_hat[0]),
    )
