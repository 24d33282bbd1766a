"""
Named parameter settings for the parameterized estimators.

Every preset fixes all constants but one and fills that one with its MSE-minimizing value,
so a preset only becomes a concrete `EstimatorConfig` once population moments are known.
"""

from __future__ import annotations

from typing import Callable, Dict, Iterable, List, Literal, Mapping, Optional

from varest.constants import EstimatorKind, InvalidParams
from varest.estimators import (
    EstimatorConfig,
    GeneralizedParams,
    KhoshParams,
    ParamsTypes,
    SahaiParams,
)
from varest.moments import PopulationMoments
from varest.theory import optimal_params

PresetName = Literal["paper-tk", "paper-ts", "paper-t-cx", "paper-t-bx"]

# d of the generalized estimator in the apple-orchard comparison
_APPLE_D = 0.9742


def _require_C_x(pm: PopulationMoments, name: str) -> float:
    if pm.C_x is None:
        raise InvalidParams(
            f"Preset '{name}' needs the coefficient of variation C_x, which is unavailable."
        )
    return pm.C_x


_FIXED: Dict[str, Callable[[PopulationMoments], ParamsTypes]] = {
    "paper-tk": lambda pm: KhoshParams(a=1.0, b=1.0),
    "paper-ts": lambda pm: SahaiParams(),
    # a = c = C_x
    "paper-t-cx": lambda pm: GeneralizedParams(
        a=_require_C_x(pm, "paper-t-cx"),
        c=_require_C_x(pm, "paper-t-cx"),
        d=_APPLE_D,
    ),
    # a = C_x with the transform of x left at c = 1
    "paper-t-bx": lambda pm: GeneralizedParams(
        a=_require_C_x(pm, "paper-t-bx"), c=1.0, d=_APPLE_D
    ),
}

PRESET_KINDS: Mapping[str, EstimatorKind] = {
    "paper-tk": EstimatorKind.KHOSH,
    "paper-ts": EstimatorKind.SAHAI_RAY,
    "paper-t-cx": EstimatorKind.GENERALIZED,
    "paper-t-bx": EstimatorKind.GENERALIZED,
}

DEFAULT_PRESETS: Mapping[EstimatorKind, str] = {
    EstimatorKind.KHOSH: "paper-tk",
    EstimatorKind.SAHAI_RAY: "paper-ts",
    EstimatorKind.GENERALIZED: "paper-t-cx",
}


def preset_config(name: PresetName, pm: PopulationMoments) -> EstimatorConfig:
    """
    The estimator configuration of a preset, with its free constant at the optimum for `pm`.

    Examples:
        >>> pm = vr.PopulationMoments.from_summary(
        ...     N=104, n=20, S_y=11.6694, S_x=23029.072, rho_yx=0.865,
        ...     beta2y=16.523, beta2x=17.516, lambda22=14.398, C_x=1.653,
        ... )
        >>> cfg = vr.preset_config("paper-t-cx", pm)
        >>> cfg.label, cfg.params.a, cfg.params.c, cfg.params.d
        ('t', 1.653, 1.653, 0.9742)
        >>> vr.preset_config("paper-tz", pm)
        Traceback (most recent call last):
        ...
        varest.constants.InvalidParams: Unknown preset 'paper-tz'. Choose one of ['paper-tk', 'paper-ts', 'paper-t-cx', 'paper-t-bx'].
    """
    if name not in _FIXED:
        raise InvalidParams(f"Unknown preset '{name}'. Choose one of {list(_FIXED)}.")
    kind = PRESET_KINDS[name]
    return EstimatorConfig(kind, optimal_params(kind, pm, _FIXED[name](pm)))


def resolve_presets(names: Optional[Iterable[str]] = None) -> Dict[EstimatorKind, str]:
    """
    Maps each parameterized kind to the preset used for it. Later names override earlier ones
    and the defaults.

    Examples:
        >>> vr.resolve_presets(["paper-t-bx"])[vr.EstimatorKind.GENERALIZED]
        'paper-t-bx'
    """
    resolved = dict(DEFAULT_PRESETS)
    for name in names or ():
        if name not in PRESET_KINDS:
            raise InvalidParams(
                f"Unknown preset '{name}'. Choose one of {list(PRESET_KINDS)}."
            )
        resolved[PRESET_KINDS[name]] = name
    return resolved


def configs_for(
    kinds: Iterable[EstimatorKind],
    pm: PopulationMoments,
    presets: Optional[Iterable[str]] = None,
) -> List[EstimatorConfig]:
    """
    Builds one configuration per kind, taking the constants of parameterized kinds from their presets.

    Examples:
        >>> pm = vr.PopulationMoments.from_summary(
        ...     N=104, n=20, S_y=11.6694, S_x=23029.072, rho_yx=0.865,
        ...     beta2y=16.523, beta2x=17.516, lambda22=14.398, C_x=1.653,
        ... )
        >>> [c.label for c in vr.configs_for([vr.EstimatorKind.PRODUCT, vr.EstimatorKind.SAHAI_RAY], pm)]
        ['S2_P', 't_s']
    """
    resolved = resolve_presets(presets)
    configs = []
    for kind in kinds:
        kind = EstimatorKind(kind)
        if kind in resolved:
            configs.append(preset_config(resolved[kind], pm))  # type: ignore
        else:
            configs.append(EstimatorConfig(kind))
    return configs


TABLE_KINDS = [
    EstimatorKind.UNBIASED,
    EstimatorKind.RATIO,
    EstimatorKind.REGRESSION,
    EstimatorKind.KHOSH,
    EstimatorKind.SAHAI_RAY,
    EstimatorKind.GENERALIZED,
]


def default_table_configs(
    pm: PopulationMoments, generalized_preset: PresetName = "paper-t-cx"
) -> List[EstimatorConfig]:
    """
    The six rows of the standard efficiency comparison: `S2_y`, `S2_R`, `S2_Reg`, then
    `t_k`, `t_s` and `t` at their optimal constants.

    Examples:
        >>> pm = vr.PopulationMoments.from_summary(
        ...     N=104, n=20, S_y=11.6694, S_x=23029.072, rho_yx=0.865,
        ...     beta2y=16.523, beta2x=17.516, lambda22=14.398, C_x=1.653,
        ... )
        >>> [c.label for c in vr.default_table_configs(pm)]
        ['S2_y', 'S2_R', 'S2_Reg', 't_k', 't_s', 't']
        >>> vr.default_table_configs(pm, "paper-ts")
        Traceback (most recent call last):
        ...
        varest.constants.InvalidParams: 'paper-ts' is not a preset of the generalized estimator.
    """
    if PRESET_KINDS.get(generalized_preset) != EstimatorKind.GENERALIZED:
        raise InvalidParams(
            f"'{generalized_preset}' is not a preset of the generalized estimator."
        )
    return configs_for(TABLE_KINDS, pm, [generalized_preset])
