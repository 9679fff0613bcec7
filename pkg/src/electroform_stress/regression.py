"""Weighted straight-line least squares shared by the sin²ψ and stretch fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import fsum

import numpy as np

from .errors import SingularDesignError

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    slope_stderr: float
    intercept_stderr: float
    r_squared: float
    n: int
    dof: int
    ss_res: float
    ss_tot: float


def fit_line(x, y, weights=None) -> LineFit:
    """Fit ``y = intercept + slope*x`` by weighted least squares.

    Standard errors use the residual variance with n−2 degrees of freedom
    (zero when n == 2). All sums go through ``math.fsum``, so the result does
    not depend on point order.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    if not (x.shape == y.shape == w.shape and x.ndim == 1):
        raise ValueError("x, y and weights must be 1-D arrays of equal length")
    n = x.size
    if n < 2:
        raise SingularDesignError(f"need at least 2 points, got {n}")
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be finite and > 0")

    # power-of-two rescaling is exact and keeps squared residuals clear of underflow
    x_exp = _binary_exponent(x)
    y_exp = _binary_exponent(y)
    x = np.ldexp(x, -x_exp)
    y = np.ldexp(y, -y_exp)
    # every returned quantity is invariant to a common weight scale
    w = np.ldexp(w, -_binary_exponent(w))

    wsum = fsum(w)
    x_mean = fsum(w * x) / wsum
    y_mean = fsum(w * y) / wsum
    dx = x - x_mean
    dy = y - y_mean
    sxx = fsum(w * dx * dx)
    if sxx == 0.0 or np.all(x == x[0]):
        raise SingularDesignError("all abscissae are equal; slope is undefined")
    sxy = fsum(w * dx * dy)
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean

    fitted = intercept + slope * x
    resid = y - fitted
    # residuals at rounding level count as an exact fit
    scale = np.maximum(np.abs(y), np.abs(fitted))
    resid = np.where(np.abs(resid) <= 8 * _EPS * scale, 0.0, resid)
    ss_res = fsum(w * resid * resid)
    ss_tot = fsum(w * dy * dy)
    if ss_tot == 0.0:
        r_squared = 1.0 if ss_res == 0.0 else 0.0
    else:
        r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))

    dof = n - 2
    if dof > 0:
        s2 = ss_res / dof
        slope_se = math.sqrt(s2 / sxx)
        intercept_se = math.sqrt(s2 * (1.0 / wsum + x_mean * x_mean / sxx))
    else:
        slope_se = intercept_se = 0.0
    slope_scale = y_exp - x_exp
    try:
        return LineFit(
            slope=math.ldexp(slope, slope_scale),
            intercept=math.ldexp(intercept, y_exp),
            slope_stderr=math.ldexp(slope_se, slope_scale),
            intercept_stderr=math.ldexp(intercept_se, y_exp),
            r_squared=r_squared,
            n=n,
            dof=dof,
            ss_res=math.ldexp(ss_res, 2 * y_exp),
            ss_tot=math.ldexp(ss_tot, 2 * y_exp),
        )
    except OverflowError:
        raise SingularDesignError("abscissa spread too small for the data; slope overflows") from None


def _binary_exponent(values: np.ndarray) -> int:
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    if peak == 0.0 or not math.isfinite(peak):
        return 0
    return math.frexp(peak)[1]
