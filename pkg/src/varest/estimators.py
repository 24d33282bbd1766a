"""
Point estimators of the population variance `S2_y` computed from a sample.

Every estimator is evaluated in its exact closed form. Each formula lives in one
private kernel that works on floats and numpy arrays alike; the public `est_*`
functions add the precondition checks and warnings, while `estimate_batch` runs the
same kernels over many samples and marks failures instead of raising.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from varest.constants import (
    REGRESSION_COEFFICIENT_TYPES,
    Config,
    DegenerateRegression,
    DomainError,
    EstimatorKind,
    EstimatorKindValue,
    ExpansionValidityWarning,
    InvalidParams,
    NegativeEstimateWarning,
    ZeroDenominator,
)
from varest.moments import PopulationMoments, SampleBatch, SampleStats


@dataclass(frozen=True)
class GeneralizedParams:
    """
    Constants of the transformed generalized estimator
    `t = alpha1 * s2_u * [S2_v / (alpha * s2_v + (1 - alpha) * S2_v)]^beta - a`,
    with `s2_u = s2_y + a`, `s2_v = c * s2_x + d * S2_x` and `S2_v = (c + d) * S2_x`.

    Examples:
        >>> vr.GeneralizedParams(c=1.653, d=0.9742).A == 1.653 / (1.653 + 0.9742)
        True
        >>> vr.GeneralizedParams(c=1, d=-1)
        Traceback (most recent call last):
        ...
        varest.constants.InvalidParams: c + d must be nonzero (got c=1, d=-1).
    """

    a: float = 0.0
    c: float = 1.0
    d: float = 0.0
    alpha1: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.c + self.d == 0:
            raise InvalidParams(
                f"c + d must be nonzero (got c={self.c}, d={self.d})."
            )

    @property
    def A(self) -> float:
        return self.alpha * self.c / (self.c + self.d)


@dataclass(frozen=True)
class KhoshParams:
    """Constants of `t_k = s2_y (a S2_x - b) / (alpha (a s2_x - b) + (1 - alpha)(a S2_x - b))`."""

    a: float = 1.0
    b: float = 0.0
    alpha: float = 1.0


@dataclass(frozen=True)
class SahaiParams:
    """Exponent of `t_s = s2_y [2 - (s2_x / S2_x)^w]`."""

    w: float = 1.0


ParamsTypes = Union[GeneralizedParams, KhoshParams, SahaiParams]

_PARAMS_TYPE = {
    EstimatorKind.KHOSH: KhoshParams,
    EstimatorKind.SAHAI_RAY: SahaiParams,
    EstimatorKind.GENERALIZED: GeneralizedParams,
}


@dataclass(frozen=True)
class EstimatorConfig:
    """
    A choice of estimator together with its constants.

    Examples:
        >>> vr.EstimatorConfig("ratio")
        EstimatorConfig(kind=<EstimatorKind.RATIO: 'ratio'>, params=None)
        >>> vr.EstimatorConfig("sahai_ray", vr.SahaiParams(w=0.5)).label
        't_s'
        >>> vr.EstimatorConfig("khosh")
        Traceback (most recent call last):
        ...
        varest.constants.InvalidParams: Estimator 'khosh' needs KhoshParams, got None.
        >>> vr.EstimatorConfig("ratio", vr.SahaiParams())
        Traceback (most recent call last):
        ...
        varest.constants.InvalidParams: Estimator 'ratio' takes no parameters, got SahaiParams.
    """

    kind: Union[EstimatorKind, EstimatorKindValue]
    params: Optional[ParamsTypes] = None

    def __post_init__(self):
        kind = EstimatorKind(self.kind)
        object.__setattr__(self, "kind", kind)
        expected = _PARAMS_TYPE.get(kind)
        if expected is None:
            if self.params is not None:
                raise InvalidParams(
                    f"Estimator '{kind.value}' takes no parameters, got {type(self.params).__name__}."
                )
        elif not isinstance(self.params, expected):
            got = "None" if self.params is None else type(self.params).__name__
            raise InvalidParams(
                f"Estimator '{kind.value}' needs {expected.__name__}, got {got}."
            )

    @property
    def label(self) -> str:
        return self.kind.label


@dataclass(frozen=True)
class Estimate:
    value: float
    negative: bool


@dataclass(frozen=True)
class BatchEstimates:
    """Estimates over many samples. `values` is NaN where the estimator failed."""

    values: np.ndarray
    failed: np.ndarray
    negative: np.ndarray


def _ratio(s2_y, s2_x, S2_x):
    return s2_y * (S2_x / s2_x)


def _product(s2_y, s2_x, S2_x):
    return s2_y * (s2_x / S2_x)


def _regression(s2_y, s2_x, S2_x, slope):
    return s2_y + slope * (S2_x - s2_x)


# λ04_hat of a two-unit sample is 1 up to rounding
_KURTOSIS_TOL = 1e-12


def _sample_slope(s2_y, s2_x, lambda22_hat, lambda04_hat):
    # (λ22 - 1) s2_y is zero for a constant-y sample even though λ22 is undefined there
    numerator = np.where(s2_y == 0, 0.0, (lambda22_hat - 1) * s2_y)
    excess = np.where(np.abs(lambda04_hat - 1) <= _KURTOSIS_TOL, 0.0, lambda04_hat - 1)
    return numerator / (excess * s2_x)


def _khosh_terms(s2_x, S2_x, p: KhoshParams):
    known = p.a * S2_x - p.b
    return known, p.alpha * (p.a * s2_x - p.b) + (1 - p.alpha) * known


def _khosh(s2_y, s2_x, S2_x, p: KhoshParams):
    known, mixed = _khosh_terms(s2_x, S2_x, p)
    return s2_y * (known / mixed)


def _sahai_ray(s2_y, s2_x, S2_x, p: SahaiParams):
    return s2_y * (2 - np.power(s2_x / S2_x, p.w))


def _generalized_terms(s2_x, S2_x, p: GeneralizedParams):
    """Returns `S2_v` and the mixed denominator `alpha s2_v + (1 - alpha) S2_v`."""
    s2_v = p.c * s2_x + p.d * S2_x
    S2_v = (p.c + p.d) * S2_x
    return S2_v, p.alpha * s2_v + (1 - p.alpha) * S2_v


def _generalized(s2_y, s2_x, S2_x, p: GeneralizedParams):
    S2_v, mixed = _generalized_terms(s2_x, S2_x, p)
    return p.alpha1 * (s2_y + p.a) * np.power(S2_v / mixed, p.beta) - p.a


def _is_integer(value: float) -> bool:
    return float(value).is_integer()


def _checked(value, name: str) -> float:
    value = float(value)
    if value < 0 and Config.warn_on_negative_estimate:
        warnings.warn(
            f"{name} produced a negative variance estimate ({value}).",
            NegativeEstimateWarning,
            stacklevel=3,
        )
    return value


def est_unbiased(s: SampleStats) -> float:
    """
    The conventional unbiased estimator `s2_y`.

    Examples:
        >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 6, 8])
        >>> vr.est_unbiased(vr.sample_stats(pop, {1, 4}))
        4.5
    """
    return float(s.s2_y)


def est_ratio(s: SampleStats, pm: PopulationMoments) -> float:
    """
    The ratio estimator `s2_y * S2_x / s2_x`.

    Examples:
        >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 6, 8])
        >>> pm = vr.population_moments(pop, 2)
        >>> round(vr.est_ratio(vr.sample_stats(pop, {1, 4}), pm), 12)
        1.666666666667
        >>> vr.est_ratio(vr.SampleStats(2, 1.0, 0.0, float("nan"), float("nan")), pm)
        Traceback (most recent call last):
        ...
        varest.constants.ZeroDenominator: The sample variance of x is zero; the ratio estimator is undefined.
    """
    if s.s2_x == 0:
        raise ZeroDenominator(
            "The sample variance of x is zero; the ratio estimator is undefined."
        )
    return float(_ratio(s.s2_y, s.s2_x, pm.S2_x))


def est_product(s: SampleStats, pm: PopulationMoments) -> float:
    """
    The product estimator `s2_y * s2_x / S2_x`.

    Examples:
        >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 6, 8])
        >>> pm = vr.population_moments(pop, 2)
        >>> round(vr.est_product(vr.sample_stats(pop, {1, 4}), pm), 12)
        12.15
    """
    return float(_product(s.s2_y, s.s2_x, pm.S2_x))


def regression_slope(
    s: SampleStats,
    pm: PopulationMoments,
    coefficient: Optional[REGRESSION_COEFFICIENT_TYPES] = None,
) -> float:
    """
    The coefficient `b` of the regression estimator.

    Parameters:
        coefficient:
            `"sample"` uses the plug-in `(λ22_hat - 1) s2_y / ((λ04_hat - 1) s2_x)`;
            `"population"` uses `λ*22 S2_y / (β*2x S2_x)` from `pm`.
            Defaults to `Config.regression_coefficient`.
    """
    if coefficient is None:
        coefficient = Config.regression_coefficient
    if coefficient == "population":
        if pm.beta2x_star == 0:
            raise DegenerateRegression(
                "β*2x is zero; the population regression coefficient is undefined."
            )
        return pm.lambda22_star * pm.S2_y / (pm.beta2x_star * pm.S2_x)
    if coefficient != "sample":
        raise ValueError(f"Unknown regression coefficient '{coefficient}'.")

    with np.errstate(all="ignore"):
        slope = float(_sample_slope(s.s2_y, s.s2_x, s.lambda22_hat, s.lambda04_hat))
    if not np.isfinite(slope):
        raise DegenerateRegression(
            "The sample regression coefficient is undefined: (λ04_hat - 1) * s2_x is zero."
        )
    return slope


def est_regression(
    s: SampleStats,
    pm: PopulationMoments,
    coefficient: Optional[REGRESSION_COEFFICIENT_TYPES] = None,
) -> float:
    """
    The regression estimator `s2_y + b (S2_x - s2_x)`. See `regression_slope` for `b`.

    Examples:
        >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 7, 8])
        >>> pm = vr.population_moments(pop, 4)
        >>> s = vr.sample_stats(pop, [1, 2, 3, 4])
        >>> vr.est_regression(s, pm) == s.s2_y
        True
        >>> vr.est_regression(vr.sample_stats(pop, [1, 2]), pm)
        Traceback (most recent call last):
        ...
        varest.constants.DegenerateRegression: The sample regression coefficient is undefined: (λ04_hat - 1) * s2_x is zero.
    """
    slope = regression_slope(s, pm, coefficient)
    return _checked(_regression(s.s2_y, s.s2_x, pm.S2_x, slope), "S2_Reg")


def est_khosh(s: SampleStats, pm: PopulationMoments, p: KhoshParams) -> float:
    """
    The ratio-type estimator `t_k`.

    Examples:
        >>> s = vr.SampleStats(2, 4.5, 18.0, 1.0, 1.0)
        >>> pm = vr.PopulationMoments(n=2, S2_y=5 / 3, S2_x=20 / 3, rho_yx=1.0, lambda40=1.64, lambda04=1.64, lambda22=1.64, theta=0.5)
        >>> round(vr.est_khosh(s, pm, vr.KhoshParams(a=1, b=1, alpha=0.5)), 12)
        2.25
        >>> vr.est_khosh(s, pm, vr.KhoshParams(alpha=0)) == s.s2_y
        True
    """
    _, mixed = _khosh_terms(s.s2_x, pm.S2_x, p)
    if mixed == 0:
        raise ZeroDenominator(
            "The mixed denominator alpha (a s2_x - b) + (1 - alpha)(a S2_x - b) is zero."
        )
    return _checked(_khosh(s.s2_y, s.s2_x, pm.S2_x, p), "t_k")


def est_sahai_ray(s: SampleStats, pm: PopulationMoments, p: SahaiParams) -> float:
    """
    The ratio-type estimator `t_s = s2_y [2 - (s2_x / S2_x)^w]`. The result can be negative; it is returned as-is
    with a `NegativeEstimateWarning`.

    Examples:
        >>> import warnings
        >>> s = vr.SampleStats(2, 4.5, 18.0, 1.0, 1.0)
        >>> pm = vr.PopulationMoments(n=2, S2_y=5 / 3, S2_x=20 / 3, rho_yx=1.0, lambda40=1.64, lambda04=1.64, lambda22=1.64, theta=0.5)
        >>> vr.est_sahai_ray(s, pm, vr.SahaiParams(w=0))
        4.5
        >>> with warnings.catch_warnings(record=True) as caught:
        ...     warnings.simplefilter("always")
        ...     value = vr.est_sahai_ray(s, pm, vr.SahaiParams(w=1))
        >>> round(value, 12), caught[0].category.__name__
        (-3.15, 'NegativeEstimateWarning')
    """
    ratio = s.s2_x / pm.S2_x
    if ratio <= 0 and not _is_integer(p.w):
        raise DomainError(
            f"(s2_x / S2_x)^w is undefined for s2_x / S2_x = {ratio} and non-integer w = {p.w}."
        )
    if ratio == 0 and p.w < 0:
        raise ZeroDenominator("s2_x is zero and w is negative.")
    return _checked(_sahai_ray(s.s2_y, s.s2_x, pm.S2_x, p), "t_s")


def est_generalized(
    s: SampleStats, pm: PopulationMoments, p: GeneralizedParams
) -> float:
    """
    The transformed generalized estimator, evaluated exactly (not through its series expansion).

    Emits an `ExpansionValidityWarning` when `|A e1| >= 1` with `e1 = s2_x / S2_x - 1`:
    the estimate is still well defined, but the first-order theory does not describe it.

    Examples:
        >>> s = vr.SampleStats(2, 4.5, 18.0, 1.0, 1.0)
        >>> pm = vr.PopulationMoments(n=2, S2_y=5 / 3, S2_x=20 / 3, rho_yx=1.0, lambda40=1.64, lambda04=1.64, lambda22=1.64, theta=0.5)
        >>> vr.est_generalized(s, pm, vr.GeneralizedParams(c=2, d=3, alpha=0.4, beta=0))
        4.5
        >>> vr.est_generalized(s, pm, vr.GeneralizedParams()) == vr.est_ratio(s, pm)
        True
    """
    S2_v, mixed = _generalized_terms(s.s2_x, pm.S2_x, p)
    if mixed == 0:
        raise ZeroDenominator(
            "The mixed denominator alpha s2_v + (1 - alpha) S2_v is zero."
        )
    if S2_v / mixed <= 0 and not _is_integer(p.beta):
        raise DomainError(
            f"The bracket S2_v / (alpha s2_v + (1 - alpha) S2_v) = {S2_v / mixed} cannot be raised to the non-integer power beta = {p.beta}."
        )
    if Config.warn_on_expansion_validity:
        e1 = s.s2_x / pm.S2_x - 1
        if abs(p.A * e1) >= 1:
            warnings.warn(
                f"|A e1| = {abs(p.A * e1)} >= 1: the first-order expansion does not hold for this sample.",
                ExpansionValidityWarning,
                stacklevel=2,
            )
    return _checked(_generalized(s.s2_y, s.s2_x, pm.S2_x, p), "t")


def estimate(
    cfg: EstimatorConfig,
    s: SampleStats,
    pm: PopulationMoments,
    *,
    regression_coefficient: Optional[REGRESSION_COEFFICIENT_TYPES] = None,
    clamp_nonnegative: Optional[bool] = None,
) -> Estimate:
    """
    Evaluates any estimator on one sample.

    Parameters:
        clamp_nonnegative:
            Truncate negative estimates at zero. `Estimate.negative` still reports the raw sign.
            Defaults to `Config.clamp_nonnegative`.

    Examples:
        >>> import warnings
        >>> s = vr.SampleStats(2, 4.5, 18.0, 1.0, 1.0)
        >>> pm = vr.PopulationMoments(n=2, S2_y=5 / 3, S2_x=20 / 3, rho_yx=1.0, lambda40=1.64, lambda04=1.64, lambda22=1.64, theta=0.5)
        >>> cfg = vr.EstimatorConfig("sahai_ray", vr.SahaiParams(w=1))
        >>> with warnings.catch_warnings():
        ...     warnings.simplefilter("ignore", vr.NegativeEstimateWarning)
        ...     result = vr.estimate(cfg, s, pm, clamp_nonnegative=True)
        >>> result
        Estimate(value=0.0, negative=True)
    """
    if clamp_nonnegative is None:
        clamp_nonnegative = Config.clamp_nonnegative
    kind, p = cfg.kind, cfg.params
    if kind == EstimatorKind.UNBIASED:
        value = est_unbiased(s)
    elif kind == EstimatorKind.RATIO:
        value = est_ratio(s, pm)
    elif kind == EstimatorKind.PRODUCT:
        value = est_product(s, pm)
    elif kind == EstimatorKind.REGRESSION:
        value = est_regression(s, pm, regression_coefficient)
    elif kind == EstimatorKind.KHOSH:
        value = est_khosh(s, pm, p)  # type: ignore
    elif kind == EstimatorKind.SAHAI_RAY:
        value = est_sahai_ray(s, pm, p)  # type: ignore
    elif kind == EstimatorKind.GENERALIZED:
        value = est_generalized(s, pm, p)  # type: ignore
    else:
        raise ValueError(f"Invalid estimator kind: {kind}")  # pragma: no cover

    negative = value < 0
    if negative and clamp_nonnegative:
        value = 0.0
    return Estimate(value=value, negative=negative)


def estimate_batch(
    cfg: EstimatorConfig,
    batch: SampleBatch,
    pm: PopulationMoments,
    *,
    regression_coefficient: Optional[REGRESSION_COEFFICIENT_TYPES] = None,
    clamp_nonnegative: Optional[bool] = None,
) -> BatchEstimates:
    """
    Evaluates an estimator on every sample of `batch`. A sample where the estimator is undefined
    (the cases where the scalar functions raise) is marked in `failed` instead.

    Examples:
        >>> import numpy as np
        >>> pop = vr.Population([1, 2, 3, 3], [2, 4, 6, 6])
        >>> pm = vr.population_moments(pop, 2)
        >>> batch = vr.sample_stats_batch(pop, np.array([[0, 1], [2, 3]]))
        >>> res = vr.estimate_batch(vr.EstimatorConfig("ratio"), batch, pm)
        >>> res.failed.tolist()
        [False, True]
    """
    if regression_coefficient is None:
        regression_coefficient = Config.regression_coefficient
    if clamp_nonnegative is None:
        clamp_nonnegative = Config.clamp_nonnegative

    kind, p = cfg.kind, cfg.params
    s2_y, s2_x, S2_x = batch.s2_y, batch.s2_x, pm.S2_x
    undefined = np.zeros(len(batch), dtype=bool)
    with np.errstate(all="ignore"):
        if kind == EstimatorKind.UNBIASED:
            raw = s2_y.copy()
        elif kind == EstimatorKind.RATIO:
            raw = _ratio(s2_y, s2_x, S2_x)
        elif kind == EstimatorKind.PRODUCT:
            raw = _product(s2_y, s2_x, S2_x)
        elif kind == EstimatorKind.REGRESSION:
            if regression_coefficient == "population":
                slope = np.divide(
                    pm.lambda22_star * pm.S2_y, pm.beta2x_star * pm.S2_x
                )
            else:
                slope = _sample_slope(
                    s2_y, s2_x, batch.lambda22_hat, batch.lambda04_hat
                )
                undefined = ~np.isfinite(slope)
            raw = _regression(s2_y, s2_x, S2_x, slope)
        elif kind == EstimatorKind.KHOSH:
            raw = _khosh(s2_y, s2_x, S2_x, p)  # type: ignore
        elif kind == EstimatorKind.SAHAI_RAY:
            raw = _sahai_ray(s2_y, s2_x, S2_x, p)  # type: ignore
            if not _is_integer(p.w):  # type: ignore
                undefined = s2_x <= 0
        elif kind == EstimatorKind.GENERALIZED:
            raw = _generalized(s2_y, s2_x, S2_x, p)  # type: ignore
            # with beta < 0 a zero denominator comes out finite
            _, mixed = _generalized_terms(s2_x, S2_x, p)  # type: ignore
            undefined = mixed == 0
        else:
            raise ValueError(f"Invalid estimator kind: {kind}")  # pragma: no cover

    raw = np.broadcast_to(np.asarray(raw, dtype=np.float64), s2_y.shape)
    failed = undefined | ~np.isfinite(raw)
    negative = ~failed & (raw < 0)
    values = np.where(failed, np.nan, raw)
    if clamp_nonnegative:
        values = np.where(negative, 0.0, values)
    return BatchEstimates(values=values, failed=failed, negative=negative)
