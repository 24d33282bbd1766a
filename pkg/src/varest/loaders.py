"""
Readers for unit-level population files and summary-statistic files.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Dict, Optional, Union

import polars as pl

from varest.constants import X_KEY, Y_KEY, MissingKey, ParseError, SchemaError
from varest.moments import Population, PopulationMoments

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Summary files shipped with the package, addressable by name
BUNDLED_PARAMS = {"apple104": "apple104.params"}


def load_population_csv(path: PathLike) -> Population:
    """
    Reads a CSV file with a header row holding the columns `y` and `x`. Other columns are ignored.

    Raises:
        SchemaError: If a required column is missing.
        ParseError: On a missing, non-numeric or non-finite value, naming its 1-based line.
    """
    try:
        df = pl.read_csv(path, infer_schema_length=0)
    except (pl.exceptions.ComputeError, pl.exceptions.NoDataError) as e:
        raise ParseError(f"Could not read {path} as CSV: {e}") from e

    missing = [c for c in (Y_KEY, X_KEY) if c not in df.columns]
    if missing:
        raise SchemaError(
            f"{path} is missing column(s) {missing}; the header must name 'y' and 'x'."
        )
    columns = {}
    for name in (Y_KEY, X_KEY):
        raw = df.get_column(name)
        values = raw.str.strip_chars().cast(pl.Float64, strict=False)
        bad = (~values.is_finite()).fill_null(True)
        if bad.any():
            row = int(bad.arg_true()[0])
            text = raw[row]
            if text is None or not text.strip():
                reason = f"missing value in column '{name}'"
            elif values[row] is None:
                reason = f"'{text}' in column '{name}' is not a number"
            else:
                reason = f"non-finite value '{text}' in column '{name}'"
            # line 1 is the header
            raise ParseError(reason, line=row + 2)
        columns[name] = values
    logger.debug("Loaded %d units from %s", df.height, path)
    return Population(pl.DataFrame(columns))


@dataclass(frozen=True)
class SummaryParams:
    """
    Published summary statistics of a population. `n` may be left to the caller;
    `C_y`, `C_x` and `C_yx` are optional.
    """

    N: int
    S_y: float
    S_x: float
    rho_yx: float
    beta2y: float
    beta2x: float
    lambda22: float
    n: Optional[int] = None
    C_y: Optional[float] = None
    C_x: Optional[float] = None
    C_yx: Optional[float] = None

    def to_moments(
        self, n: Optional[int] = None, use_fpc: bool = False
    ) -> PopulationMoments:
        """
        Parameters:
            n:
                Sample size, overriding the file's `n`.
        """
        if n is None:
            n = self.n
        if n is None:
            raise MissingKey("n")
        return PopulationMoments.from_summary(
            N=self.N,
            n=n,
            S_y=self.S_y,
            S_x=self.S_x,
            rho_yx=self.rho_yx,
            beta2y=self.beta2y,
            beta2x=self.beta2x,
            lambda22=self.lambda22,
            C_y=self.C_y,
            C_x=self.C_x,
            use_fpc=use_fpc,
        )


_SUMMARY_FIELDS = {f.name: f for f in fields(SummaryParams)}
_INTEGER_KEYS = {"N", "n"}
_OPTIONAL_KEYS = {"n", "C_y", "C_x", "C_yx"}


def _parse_value(key: str, text: str, line: int) -> Union[int, float]:
    try:
        if key in _INTEGER_KEYS:
            return int(text)
        value = float(text)
    except ValueError:
        raise ParseError(
            f"'{text}' is not a valid value for '{key}'.", line=line, key=key
        ) from None
    if not math.isfinite(value):
        raise ParseError(f"'{key}' must be finite (got {text}).", line=line, key=key)
    return value


def parse_summary_params(text: str) -> SummaryParams:
    """
    Parses `key = value` lines. `#` starts a comment.

    Examples:
        >>> params = vr.parse_summary_params('''
        ... N = 4  # units
        ... S_y = 1.5
        ... S_x = 2.5
        ... rho_yx = 0.9
        ... beta2y = 1.64
        ... beta2x = 1.7
        ... lambda22 = 1.6
        ... ''')
        >>> params.N, params.n, params.C_x
        (4, None, None)
        >>> vr.parse_summary_params("N = 4\\nN = 5")
        Traceback (most recent call last):
        ...
        varest.constants.ParseError: line 2: Duplicate key 'N'.
        >>> vr.parse_summary_params("N = 4")
        Traceback (most recent call last):
        ...
        varest.constants.MissingKey: Missing required key 'S_y'.
    """
    values: Dict[str, Union[int, float]] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ParseError(f"Expected 'key = value', got '{line}'.", line=line_no)
        if key not in _SUMMARY_FIELDS:
            raise ParseError(f"Unknown key '{key}'.", line=line_no, key=key)
        if key in values:
            raise ParseError(f"Duplicate key '{key}'.", line=line_no, key=key)
        values[key] = _parse_value(key, value, line_no)

    for key in _SUMMARY_FIELDS:
        if key not in values and key not in _OPTIONAL_KEYS:
            raise MissingKey(key)
    return SummaryParams(**values)  # type: ignore


def resolve_params_path(path: PathLike) -> PathLike:
    """Maps the name of a bundled summary file (e.g. `apple104`) to its location."""
    if str(path) in BUNDLED_PARAMS and not Path(path).exists():
        return resources.files("varest") / "data" / BUNDLED_PARAMS[str(path)]  # type: ignore
    return path


def read_summary_params(path: PathLike) -> SummaryParams:
    resolved = resolve_params_path(path)
    raw = Path(str(resolved)).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(
            f"The file is not valid UTF-8 (byte {raw[e.start]:#04x}).",
            line=raw.count(b"\n", 0, e.start) + 1,
        ) from None
    params = parse_summary_params(text)
    logger.debug("Read summary statistics from %s", resolved)
    return params


def load_summary_params(
    path: PathLike, n: Optional[int] = None, use_fpc: bool = False
) -> PopulationMoments:
    """
    Reads a summary-statistics file into population moments. Means are unavailable from a summary
    and left as `None`.

    Examples:
        >>> pm = vr.load_summary_params("apple104")
        >>> pm.N, pm.n, round(pm.beta2y_star, 3)
        (104, 20, 15.523)
    """
    return read_summary_params(path).to_moments(n=n, use_fpc=use_fpc)
