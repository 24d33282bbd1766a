"""
Report frames and their text, CSV and JSON renderings.
"""

from __future__ import annotations

import json
import math
from typing import Any, Dict, List, Optional, Sequence, Union

import polars as pl

from varest.constants import (
    BIAS_KEY,
    ESTIMATOR_KEY,
    FAILED_KEY,
    MSE_KEY,
    NEGATIVE_KEY,
    PRE_KEY,
    SAMPLE_SPACE_KEY,
    SOURCE_KEY,
    STDERR_KEY,
    THETA_KEY,
    VALUE_TYPE,
    Config,
    EstimatorKind,
    NumericError,
    OutputFormat,
    OutputFormatValue,
)
from varest.montecarlo import EmpiricalReport, ExactReport
from varest.theory import TheoryReport, pre
from varest.util import format_float

ReportTypes = Union[TheoryReport, EmpiricalReport, ExactReport]

REPORT_SCHEMA = {
    ESTIMATOR_KEY: pl.String,
    BIAS_KEY: VALUE_TYPE,
    MSE_KEY: VALUE_TYPE,
    PRE_KEY: VALUE_TYPE,
    STDERR_KEY: VALUE_TYPE,
    FAILED_KEY: pl.Int64,
    NEGATIVE_KEY: pl.Int64,
    SAMPLE_SPACE_KEY: pl.Int64,
    THETA_KEY: VALUE_TYPE,
    SOURCE_KEY: pl.String,
}
_CORE_COLUMNS = {ESTIMATOR_KEY, BIAS_KEY, MSE_KEY, PRE_KEY, SOURCE_KEY}


def _empirical_pre(report: EmpiricalReport, reference: Optional[float]):
    if reference is None:
        return None
    try:
        return pre(reference, report.empirical_mse)
    except NumericError:
        return None


def _row(report: ReportTypes, reference: Optional[float]) -> Dict[str, Any]:
    if isinstance(report, TheoryReport):
        return {
            ESTIMATOR_KEY: report.label,
            BIAS_KEY: report.bias,
            MSE_KEY: report.mse,
            PRE_KEY: report.pre,
            THETA_KEY: report.theta,
            SOURCE_KEY: report.source.value,
        }
    row = {
        ESTIMATOR_KEY: report.label,
        BIAS_KEY: report.empirical_bias,
        MSE_KEY: report.empirical_mse,
        PRE_KEY: _empirical_pre(report, reference),
        STDERR_KEY: report.stderr_of_mean,
        FAILED_KEY: report.failed_sample_count,
        NEGATIVE_KEY: report.negative_estimate_count,
        SOURCE_KEY: report.source.value,
    }
    if isinstance(report, ExactReport):
        row[SAMPLE_SPACE_KEY] = report.sample_space_size
    return row


def reports_to_frame(reports: Sequence[ReportTypes]) -> pl.DataFrame:
    """
    One row per report. Optional columns that no report fills are left out.

    The PRE of simulated and enumerated rows is relative to the unbiased estimator's row of the
    same source, and null when there is none.

    Examples:
        >>> pop = vr.Population([1, 2, 3, 4], [2, 4, 7, 8])
        >>> reports = vr.enumerate_exact(pop, 2, [vr.EstimatorConfig("unbiased"), vr.EstimatorConfig("ratio")])
        >>> df = vr.reports_to_frame(reports)
        >>> df.columns
        ['estimator', 'bias', 'mse', 'pre', 'stderr', 'failed_samples', 'negative_estimates', 'sample_space_size', 'source']
        >>> df.get_column("pre").to_list()[0], df.get_column("sample_space_size").to_list()
        (100.0, [6, 6])
    """
    references: Dict[Any, float] = {}
    for r in reports:
        if (
            not isinstance(r, TheoryReport)
            and r.estimator.kind == EstimatorKind.UNBIASED
        ):
            references.setdefault(r.source, r.empirical_mse)

    rows = [_row(r, references.get(r.source)) for r in reports]
    df = pl.DataFrame(
        {key: [row.get(key) for row in rows] for key in REPORT_SCHEMA},
        schema=REPORT_SCHEMA,
    )
    keep = [
        c
        for c in df.columns
        if c in _CORE_COLUMNS or df.get_column(c).null_count() < df.height
    ]
    return df.select(keep)


def _cell(value: Any, precision: Optional[int]) -> str:
    if isinstance(value, float):
        return format_float(value, precision)
    if value is None:
        return "NA"
    return str(value)


def _render_table(df: pl.DataFrame, precision: Optional[int]) -> str:
    numeric = [dtype.is_numeric() for dtype in df.dtypes]
    cells = [[_cell(v, precision) for v in row] for row in df.rows()]
    widths = [
        max([len(name)] + [len(row[i]) for row in cells])
        for i, name in enumerate(df.columns)
    ]

    def line(values: List[str]) -> str:
        return "  ".join(
            v.rjust(w) if num else v.ljust(w)
            for v, w, num in zip(values, widths, numeric)
        ).rstrip()

    out = [line(df.columns), line(["-" * w for w in widths])]
    out.extend(line(row) for row in cells)
    return "\n".join(out) + "\n"


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def render(
    df: pl.DataFrame,
    fmt: Union[OutputFormat, OutputFormatValue] = OutputFormat.TABLE,
    precision: Optional[int] = None,
) -> str:
    """
    Renders a frame as an aligned text table, CSV or JSON.

    Tables and CSV round floats to `precision` decimals (default `Config.float_to_str_precision`);
    JSON keeps full precision and writes NaN as null.

    Examples:
        >>> import polars as pl
        >>> df = pl.DataFrame({"estimator": ["S2_y", "S2_R"], "mse": [14392.6041, 4861.2]})
        >>> print(vr.render(df), end="")
        estimator        mse
        ---------  ---------
        S2_y       14392.604
        S2_R        4861.200
        >>> print(vr.render(df, "csv"), end="")
        estimator,mse
        S2_y,14392.604
        S2_R,4861.200
        >>> vr.render(df, "json")
        '[{"estimator": "S2_y", "mse": 14392.6041}, {"estimator": "S2_R", "mse": 4861.2}]'
    """
    fmt = OutputFormat(fmt)
    if precision is None:
        precision = Config.float_to_str_precision
    if fmt == OutputFormat.TABLE:
        return _render_table(df, precision)
    if fmt == OutputFormat.CSV:
        return df.write_csv(float_precision=precision)
    rows = [{k: _json_value(v) for k, v in row.items()} for row in df.to_dicts()]
    return json.dumps(rows)
