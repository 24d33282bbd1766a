"""
File containing shared constants used across the package.
"""

import typing
from enum import Enum
from typing import Literal, Optional

import polars as pl
from packaging import version

# Constant to help split our logic depending on the polars version in use.
# This approach is compatible with polars-lts-cpu.
POLARS_VERSION = version.parse(pl.__version__)

Y_KEY = "y"
X_KEY = "x"
ESTIMATOR_KEY = "estimator"
BIAS_KEY = "bias"
MSE_KEY = "mse"
PRE_KEY = "pre"
STDERR_KEY = "stderr"
FAILED_KEY = "failed_samples"
NEGATIVE_KEY = "negative_estimates"
SAMPLE_SPACE_KEY = "sample_space_size"
THETA_KEY = "theta"
SOURCE_KEY = "source"
VALUE_TYPE = pl.Float64

REGRESSION_COEFFICIENT_TYPES = Literal["sample", "population"]


class _ConfigMeta(type):
    """Metaclass for Config that stores the default values of all configuration options."""

    def __init__(cls, name, bases, dct):
        super().__init__(name, bases, dct)
        cls._defaults = {
            k: v
            for k, v in dct.items()
            if not k.startswith("_") and type(v) != classmethod
        }


class Config(metaclass=_ConfigMeta):
    """
    Configuration options that apply to the entire library.

    Examples:
        >>> vr.Config.enumeration_limit
        2000000
        >>> vr.Config.enumeration_limit = 10
        >>> vr.Config.reset_defaults()
        >>> vr.Config.enumeration_limit
        2000000
    """

    # Decimals shown in table and CSV output (None prints full precision)
    float_to_str_precision: Optional[int] = 3
    enumeration_limit: int = 2_000_000
    # Replications sharing one RNG substream. Changing it changes simulated values.
    replication_block_size: int = 4096
    n_jobs: int = 1
    regression_coefficient: REGRESSION_COEFFICIENT_TYPES = "sample"
    # Report the bias of t_k without the theta factor
    paper_literal: bool = False
    clamp_nonnegative: bool = False
    warn_on_negative_estimate: bool = True
    warn_on_expansion_validity: bool = True

    @classmethod
    def reset_defaults(cls):
        """
        Resets all configuration options to their default values.
        """
        for key, value in cls._defaults.items():
            setattr(cls, key, value)


class EstimatorKind(Enum):
    UNBIASED = "unbiased"
    RATIO = "ratio"
    PRODUCT = "product"
    REGRESSION = "regression"
    KHOSH = "khosh"
    SAHAI_RAY = "sahai_ray"
    GENERALIZED = "generalized"

    @property
    def label(self) -> str:
        """Row name used in reports."""
        return _KIND_LABELS[self]


_KIND_LABELS = {
    EstimatorKind.UNBIASED: "S2_y",
    EstimatorKind.RATIO: "S2_R",
    EstimatorKind.PRODUCT: "S2_P",
    EstimatorKind.REGRESSION: "S2_Reg",
    EstimatorKind.KHOSH: "t_k",
    EstimatorKind.SAHAI_RAY: "t_s",
    EstimatorKind.GENERALIZED: "t",
}


class ThetaMode(Enum):
    SIMPLE = "1/n"
    FPC = "fpc"


class Source(Enum):
    THEORY = "theory"
    SIMULATION = "simulation"
    ENUMERATION = "enumeration"


class OutputFormat(Enum):
    TABLE = "table"
    CSV = "csv"
    JSON = "json"


# This is a hack to get the Literal type for EstimatorKind
# See: https://stackoverflow.com/questions/67292470/type-hinting-enum-member-value-in-python
EstimatorKindValue = Literal[
    "unbiased", "ratio", "product", "regression", "khosh", "sahai_ray", "generalized"
]
OutputFormatValue = Literal["table", "csv", "json"]
for enum, literal in [
    (EstimatorKind, EstimatorKindValue),
    (OutputFormat, OutputFormatValue),
]:
    assert set(typing.get_args(literal)) == {member.value for member in enum}


class VarestError(Exception):
    pass


class InputError(VarestError):
    """Bad user input: files, indices, sizes or parameter records."""


class ParseError(InputError):
    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        self.line = line
        self.key = key
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(InputError):
    pass


class MissingKey(InputError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"Missing required key '{key}'.")


class BadIndex(InputError):
    pass


class TooSmall(InputError):
    pass


class InvalidSize(InputError):
    pass


class InvalidOrder(InputError):
    pass


class InvalidParams(InputError):
    pass


class ModeError(InputError):
    pass


class TooLarge(InputError):
    pass


class NumericError(VarestError):
    """A formula or estimator is undefined at the given inputs."""


class DegenerateVariate(NumericError):
    pass


class ZeroDenominator(NumericError):
    pass


class DomainError(NumericError):
    pass


class DegenerateRegression(NumericError):
    pass


class VarestWarning(UserWarning):
    pass


class NegativeEstimateWarning(VarestWarning):
    pass


class ExpansionValidityWarning(VarestWarning):
    pass
