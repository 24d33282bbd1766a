"""
File containing utility functions and classes.
"""

import math
from typing import Any, Iterable, Optional

import numpy as np
import pandas as pd
import polars as pl

from varest.constants import Config


def get_obj_repr(obj: object, _props: Iterable[str] = (), **kwargs):
    """
    Helper function to generate __repr__ strings for classes. See usage for examples.
    """
    props = {prop: getattr(obj, prop) for prop in _props}
    props_str = " ".join(f"{k}={v}" for k, v in props.items() if v is not None)
    if props_str:
        props_str += " "
    kwargs_str = " ".join(f"{k}={v}" for k, v in kwargs.items() if v is not None)
    return f"<{obj.__class__.__name__} {props_str}{kwargs_str}>"


def format_float(value: Optional[float], precision: Optional[int] = None) -> str:
    """
    Formats a float for tables, rounding to `Config.float_to_str_precision` decimals unless `precision` is given.

    Examples:
        >>> format_float(296.07131)
        '296.071'
        >>> format_float(100)
        '100.000'
        >>> format_float(None)
        'NA'
        >>> format_float(float("nan"))
        'NaN'
        >>> vr.Config.float_to_str_precision = None
        >>> format_float(0.1)
        '0.1'
    """
    if value is None:
        return "NA"
    if math.isnan(value):
        return "NaN"
    if precision is None:
        precision = Config.float_to_str_precision
    if precision is None:
        return repr(float(value))
    return f"{value:.{precision}f}"


def as_float_array(values: Any, name: str) -> np.ndarray:
    """Converts a sequence, Series or array into a one-dimensional float64 numpy array."""
    if isinstance(values, (pl.Series, pd.Series)):
        values = values.to_numpy()
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"Column '{name}' must be one-dimensional.")
    return arr
