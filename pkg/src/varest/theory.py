"""
First-order bias and MSE of every estimator, the optimal constants that minimize them,
and the percent relative efficiency used to compare them.

All formulas are linear in `theta`, so `PopulationMoments.with_n` is the way to sweep sample sizes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import ClassVar, List, Optional, Sequence, Union

import polars as pl

from varest.constants import (
    Config,
    DegenerateVariate,
    DomainError,
    EstimatorKind,
    EstimatorKindValue,
    InvalidParams,
    Source,
    ZeroDenominator,
)
from varest.estimators import (
    EstimatorConfig,
    GeneralizedParams,
    KhoshParams,
    ParamsTypes,
    SahaiParams,
)
from varest.moments import PopulationMoments
from varest.util import get_obj_repr

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneralizedDerived:
    """
    The constants of the generalized estimator's first-order expansion.

    `B = beta (beta + 1) A^2 / 2` is the second-order coefficient of `(1 + A e1)^(-beta)`.
    """

    A: float
    B: float
    Q1: float
    Q2: float
    K: float

    @property
    def alpha1_opt(self) -> float:
        """`(Q2 + K) / (Q1 + K)`, the MSE-minimizing `alpha1`."""
        if self.Q1 + self.K == 0:
            raise ZeroDenominator(
                "Q1 + (S2_y + a)^2 is zero; alpha1_opt is undefined."
            )
        return (self.Q2 + self.K) / (self.Q1 + self.K)


@dataclass(frozen=True)
class TheoryReport:
    """
    First-order values of one estimator. `pre` is NaN when the MSE is not positive.
    """

    estimator: EstimatorConfig
    bias: float
    mse: float
    pre: float
    theta: float

    source: ClassVar[Source] = Source.THEORY

    @property
    def label(self) -> str:
        return self.estimator.label

    def __repr__(self) -> str:
        return get_obj_repr(
            self,
            estimator=self.label,
            bias=self.bias,
            mse=self.mse,
            pre=self.pre,
            theta=self.theta,
        )


def khosh_gamma(p: KhoshParams, pm: PopulationMoments) -> float:
    """
    `gamma = a S2_x / (a S2_x - b)`.

    Examples:
        >>> pm = vr.PopulationMoments(n=2, S2_y=5 / 3, S2_x=20 / 3, rho_yx=1.0, lambda40=1.64, lambda04=1.64, lambda22=1.64, theta=0.5)
        >>> vr.khosh_gamma(vr.KhoshParams(a=1, b=0), pm)
        1.0
        >>> vr.khosh_gamma(vr.KhoshParams(a=3, b=20), pm)
        Traceback (most recent call last):
        ...
        varest.constants.ZeroDenominator: gamma is undefined: a S2_x - b is zero (a=3, b=20).
    """
    known = p.a * pm.S2_x - p.b
    if known == 0:
        raise ZeroDenominator(
            f"gamma is undefined: a S2_x - b is zero (a={p.a}, b={p.b})."
        )
    return p.a * pm.S2_x / known


def generalized_derived(
    p: GeneralizedParams, pm: PopulationMoments
) -> GeneralizedDerived:
    """
    Computes `A`, `B`, `Q1`, `Q2` and the optimal `alpha1` of the generalized estimator.

    With `K = (S2_y + a)^2`:

    - `Q1 = theta [S4_y β*2y + β*2x (beta^2 A^2 K + 2 B K) - 4 beta A S2_y (S2_y + a) λ*22]`
    - `Q2 = theta [B K β*2x - S2_y (S2_y + a) beta A λ*22]`
    - `alpha1_opt = (Q2 + K) / (Q1 + K)`

    Examples:
        >>> pm = vr.PopulationMoments.from_summary(
        ...     N=104, n=20, S_y=11.6694, S_x=23029.072, rho_yx=0.865,
        ...     beta2y=16.523, beta2x=17.516, lambda22=14.398, C_x=1.653,
        ... )
        >>> d = vr.generalized_derived(vr.GeneralizedParams(a=1.653, c=1.653, d=0.9742), pm)
        >>> round(d.A, 5)
        0.62919
        >>> d.B == d.A**2
        True

        Without the exponent only the `s2_y` part remains.

        >>> d = vr.generalized_derived(vr.GeneralizedParams(beta=0), pm)
        >>> d.B, d.Q2, d.Q1 == pm.theta * (pm.S2_y**2 * pm.beta2y_star)
        (0.0, 0.0, True)
    """
    A = p.A
    B = p.beta * (p.beta + 1) * A**2 / 2
    S2_y, theta = pm.S2_y, pm.theta
    S2_u = S2_y + p.a
    K = S2_u**2
    Q1 = theta * (
        S2_y**2 * pm.beta2y_star
        + pm.beta2x_star * (p.beta**2 * A**2 * K + 2 * B * K)
        - 4 * p.beta * A * S2_y * S2_u * pm.lambda22_star
    )
    Q2 = theta * (
        B * K * pm.beta2x_star - S2_y * S2_u * p.beta * A * pm.lambda22_star
    )
    return GeneralizedDerived(A=A, B=B, Q1=Q1, Q2=Q2, K=K)


def theoretical_bias(
    cfg: EstimatorConfig,
    pm: PopulationMoments,
    *,
    paper_literal: Optional[bool] = None,
) -> float:
    """
    The first-order bias of an estimator.

    Parameters:
        paper_literal:
            Drop the `theta` factor from the bias of `t_k`, as it is commonly printed.
            Defaults to `Config.paper_literal`.

    Examples:
        >>> pm = vr.PopulationMoments.from_summary(
        ...     N=104, n=20, S_y=11.6694, S_x=23029.072, rho_yx=0.865,
        ...     beta2y=16.523, beta2x=17.516, lambda22=14.398, C_x=1.653,
        ... )
        >>> vr.theoretical_bias(vr.EstimatorConfig("unbiased"), pm)
        0.0
        >>> round(vr.theoretical_bias(vr.EstimatorConfig("sahai_ray", vr.SahaiParams(w=1)), pm), 2)
        -91.22

        The literal `t_k` bias is the regular one divided by `theta`.

        >>> tk = vr.EstimatorConfig("khosh", vr.KhoshParams(a=1, b=1, alpha=0.5))
        >>> literal = vr.theoretical_bias(tk, pm, paper_literal=True)
        >>> abs(literal * pm.theta - vr.theoretical_bias(tk, pm)) < 1e-9
        True
    """
    if paper_literal is None:
        paper_literal = Config.paper_literal
    kind, p = cfg.kind, cfg.params
    theta, S2_y = pm.theta, pm.S2_y
    bx, l22 = pm.beta2x_star, pm.lambda22_star

    if kind in (EstimatorKind.UNBIASED, EstimatorKind.REGRESSION):
        return 0.0
    if kind == EstimatorKind.RATIO:
        return theta * S2_y * (bx - l22)
    if kind == EstimatorKind.PRODUCT:
        return theta * S2_y * l22
    if kind == EstimatorKind.KHOSH:
        ag = p.alpha * khosh_gamma(p, pm)  # type: ignore
        scale = S2_y if paper_literal else theta * S2_y
        return scale * (ag**2 * bx - ag * l22)
    if kind == EstimatorKind.SAHAI_RAY:
        w = p.w  # type: ignore
        return theta * S2_y * (w * (w - 1) / 2 * bx - w * l22)
    if kind == EstimatorKind.GENERALIZED:
        d = generalized_derived(p, pm)  # type: ignore
        S2_u = S2_y + p.a  # type: ignore
        alpha1 = p.alpha1  # type: ignore
        return (
            (alpha1 - 1) * S2_u
            + d.B * alpha1 * S2_u * theta * bx
            - p.beta * d.A * S2_y * alpha1 * theta * l22  # type: ignore
        )
    raise ValueError(f"Invalid estimator kind: {kind}")  # pragma: no cover


def theoretical_mse(cfg: EstimatorConfig, pm: PopulationMoments) -> float:
    """
    The first-order mean square error of an estimator.

    Examples:
        >>> pm = vr.PopulationMoments.from_summary(
        ...     N=104, n=20, S_y=11.6694, S_x=23029.072, rho_yx=0.865,
        ...     beta2y=16.523, beta2x=17.516, lambda22=14.398, C_x=1.653,
        ... )
        >>> for kind, published in [("unbiased", 14395.4), ("ratio", 4862.145), ("regression", 4316.267)]:
        ...     mse = vr.theoretical_mse(vr.EstimatorConfig(kind), pm)
        ...     print(kind, abs(mse - published) / published < 1e-3)
        unbiased True
        ratio True
        regression True

        Doubling the sample size halves every MSE.

        >>> ratio = vr.EstimatorConfig("ratio")
        >>> abs(vr.theoretical_mse(ratio, pm.with_n(40)) * 2 - vr.theoretical_mse(ratio, pm)) < 1e-9
        True
    """
    kind, p = cfg.kind, cfg.params
    theta, S4_y = pm.theta, pm.S2_y**2
    by, bx, l22 = pm.beta2y_star, pm.beta2x_star, pm.lambda22_star

    if kind == EstimatorKind.UNBIASED:
        return theta * S4_y * by
    if kind == EstimatorKind.RATIO:
        return theta * S4_y * (by + bx - 2 * l22)
    if kind == EstimatorKind.PRODUCT:
        return theta * S4_y * (by + bx + 2 * l22)
    if kind == EstimatorKind.REGRESSION:
        if by <= 0 or bx <= 0:
            raise DegenerateVariate(
                f"The regression MSE needs β*2y > 0 and β*2x > 0 (got {by} and {bx})."
            )
        return theta * S4_y * by * (1 - l22**2 / (by * bx))
    if kind == EstimatorKind.KHOSH:
        ag = p.alpha * khosh_gamma(p, pm)  # type: ignore
        return theta * S4_y * (by + ag**2 * bx - 2 * ag * l22)
    if kind == EstimatorKind.SAHAI_RAY:
        w = p.w  # type: ignore
        return theta * S4_y * (by + w**2 * bx - 2 * w * l22)
    if kind == EstimatorKind.GENERALIZED:
        d = generalized_derived(p, pm)  # type: ignore
        alpha1 = p.alpha1  # type: ignore
        return (alpha1 - 1) ** 2 * d.K + alpha1**2 * d.Q1 - 2 * alpha1 * d.Q2
    raise ValueError(f"Invalid estimator kind: {kind}")  # pragma: no cover


def optimal_params(
    kind: Union[EstimatorKind, EstimatorKindValue],
    pm: PopulationMoments,
    fixed: Optional[ParamsTypes] = None,
) -> ParamsTypes:
    """
    Fills in the MSE-minimizing free constant of an estimator: `alpha` for `t_k`, `w` for `t_s`
    and `alpha1` for `t`. The other constants come from `fixed`, or from the parameter defaults.

    Examples:
        >>> pm = vr.PopulationMoments.from_summary(
        ...     N=104, n=20, S_y=11.6694, S_x=23029.072, rho_yx=0.865,
        ...     beta2y=16.523, beta2x=17.516, lambda22=14.398, C_x=1.653,
        ... )
        >>> round(vr.optimal_params("sahai_ray", pm).w, 4)
        0.8112
        >>> vr.optimal_params("khosh", pm).alpha == vr.optimal_params("sahai_ray", pm).w
        True
        >>> vr.optimal_params("ratio", pm)
        Traceback (most recent call last):
        ...
        varest.constants.InvalidParams: Estimator 'ratio' has no free constant to optimize.
    """
    kind = EstimatorKind(kind)
    expected = {
        EstimatorKind.KHOSH: KhoshParams,
        EstimatorKind.SAHAI_RAY: SahaiParams,
        EstimatorKind.GENERALIZED: GeneralizedParams,
    }.get(kind)
    if expected is None:
        raise InvalidParams(
            f"Estimator '{kind.value}' has no free constant to optimize."
        )
    if fixed is None:
        fixed = expected()
    elif not isinstance(fixed, expected):
        raise InvalidParams(
            f"Estimator '{kind.value}' needs {expected.__name__}, got {type(fixed).__name__}."
        )

    if kind == EstimatorKind.GENERALIZED:
        return replace(fixed, alpha1=generalized_derived(fixed, pm).alpha1_opt)  # type: ignore

    if pm.beta2x_star == 0:
        raise ZeroDenominator("β*2x is zero; the optimal constant is undefined.")
    w_opt = pm.lambda22_star / pm.beta2x_star
    if kind == EstimatorKind.SAHAI_RAY:
        return replace(fixed, w=w_opt)  # type: ignore
    gamma = khosh_gamma(fixed, pm)  # type: ignore
    if gamma == 0:
        raise ZeroDenominator("gamma is zero; the optimal alpha is undefined.")
    return replace(fixed, alpha=w_opt / gamma)  # type: ignore


def with_optimal(cfg: EstimatorConfig, pm: PopulationMoments) -> EstimatorConfig:
    """Returns `cfg` with its free constant replaced by the optimum; kinds without one are returned unchanged."""
    if cfg.params is None:
        return cfg
    return EstimatorConfig(cfg.kind, optimal_params(cfg.kind, pm, cfg.params))


def pre(mse_reference: float, mse_candidate: float) -> float:
    """
    Percent relative efficiency `100 * mse_reference / mse_candidate`.

    Examples:
        >>> vr.pre(14395.4, 14395.4)
        100.0
        >>> round(vr.pre(14395.4, 4862.145), 3)
        296.071
        >>> vr.pre(1.0, 0.0)
        Traceback (most recent call last):
        ...
        varest.constants.ZeroDenominator: The candidate MSE is zero; PRE is undefined.
    """
    if mse_candidate == 0:
        raise ZeroDenominator("The candidate MSE is zero; PRE is undefined.")
    if mse_candidate < 0:
        raise DomainError(
            f"The candidate MSE is negative ({mse_candidate}); the first-order approximation has broken down."
        )
    return 100 * (mse_reference / mse_candidate)


def theory_reports(
    pm: PopulationMoments,
    configs: Sequence[EstimatorConfig],
    reference: Optional[EstimatorConfig] = None,
    *,
    paper_literal: Optional[bool] = None,
) -> List[TheoryReport]:
    """
    Bias, MSE and PRE of each configuration. The PRE reference defaults to the unbiased estimator.

    A configuration whose first-order MSE is zero or negative still gets a report; its PRE is NaN.
    Use `pre` directly for the strict comparison.

    Examples:
        >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 6, 8])
        >>> pm = vr.population_moments(pop, 2)
        >>> unbiased, ratio = vr.theory_reports(pm, [vr.EstimatorConfig("unbiased"), vr.EstimatorConfig("ratio")])
        >>> unbiased.pre, ratio.mse, ratio.pre
        (100.0, 0.0, nan)
    """
    if reference is None:
        reference = EstimatorConfig(EstimatorKind.UNBIASED)
    mse_reference = theoretical_mse(reference, pm)
    reports = []
    for cfg in configs:
        mse = theoretical_mse(cfg, pm)
        if mse > 0:
            efficiency = pre(mse_reference, mse)
        else:
            logger.warning(
                "%s has first-order MSE %s; its PRE is undefined", cfg.label, mse
            )
            efficiency = math.nan
        reports.append(
            TheoryReport(
                estimator=cfg,
                bias=theoretical_bias(cfg, pm, paper_literal=paper_literal),
                mse=mse,
                pre=efficiency,
                theta=pm.theta,
            )
        )
    return reports


def theory_table(
    pm: PopulationMoments,
    configs: Sequence[EstimatorConfig],
    reference: Optional[EstimatorConfig] = None,
    *,
    paper_literal: Optional[bool] = None,
) -> pl.DataFrame:
    """
    `theory_reports` as a report frame.

    Examples:
        >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 7, 8])
        >>> pm = vr.population_moments(pop, 2)
        >>> df = vr.theory_table(pm, [vr.EstimatorConfig("unbiased"), vr.EstimatorConfig("ratio")])
        >>> df.columns
        ['estimator', 'bias', 'mse', 'pre', 'theta', 'source']
        >>> df.get_column("pre").to_list()[0]
        100.0
    """
    from varest.report import reports_to_frame

    return reports_to_frame(
        theory_reports(pm, configs, reference, paper_literal=paper_literal)
    )
