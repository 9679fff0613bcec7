"""Independent reference computations for the test suite.

Nothing here imports the code under test; the oracles work in exact rational
arithmetic or brute force.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product


def exact_wls(x, y, w=None):
    """Weighted least squares line by the 2x2 normal equations in exact rationals.

    Returns float (slope, intercept, r_squared, ss_res, ss_tot).
    """
    xs = [Fraction(v) for v in x]
    ys = [Fraction(v) for v in y]
    ws = [Fraction(1)] * len(xs) if w is None else [Fraction(v) for v in w]
    s = sum(ws)
    sx = sum(wi * xi for wi, xi in zip(ws, xs))
    sy = sum(wi * yi for wi, yi in zip(ws, ys))
    sxx = sum(wi * xi * xi for wi, xi in zip(ws, xs))
    sxy = sum(wi * xi * yi for wi, xi, yi in zip(ws, xs, ys))
    det = s * sxx - sx * sx
    slope = (s * sxy - sx * sy) / det
    intercept = (sxx * sy - sx * sxy) / det
    ss_res = sum(wi * (yi - intercept - slope * xi) ** 2 for wi, xi, yi in zip(ws, xs, ys))
    ybar = sy / s
    ss_tot = sum(wi * (yi - ybar) ** 2 for wi, yi in zip(ws, ys))
    r2 = Fraction(1) if ss_tot == 0 else 1 - ss_res / ss_tot
    return float(slope), float(intercept), float(r2), float(ss_res), float(ss_tot)


def exact_slope_stderr(x, y, w=None):
    xs = [Fraction(v) for v in x]
    ys = [Fraction(v) for v in y]
    ws = [Fraction(1)] * len(xs) if w is None else [Fraction(v) for v in w]
    n = len(xs)
    s = sum(ws)
    xbar = sum(wi * xi for wi, xi in zip(ws, xs)) / s
    slope, intercept, *_ = exact_wls(x, y, w)
    slope, intercept = Fraction(slope), Fraction(intercept)
    sxx = sum(wi * (xi - xbar) ** 2 for wi, xi in zip(ws, xs))
    ss_res = sum(wi * (yi - intercept - slope * xi) ** 2 for wi, xi, yi in zip(ws, xs, ys))
    return (float(ss_res / (n - 2) / sxx)) ** 0.5


def brute_force_branch_gap(psis, strains, tol=0.5):
    """Largest |ε(+ψ) − ε(−ψ)| over every ordered pair of opposite-sign tilts."""
    best = None
    for (pa, ea), (pb, eb) in product(zip(psis, strains), repeat=2):
        if pa > 0 and pb < 0 and abs(pa + pb) <= tol:
            gap = abs(ea - eb)
            best = gap if best is None else max(best, gap)
    return best


def hand_interp(points, x):
    """Textbook two-point linear interpolation, scanning segments in order."""
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        if x0 <= x <= x1:
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    raise ValueError("outside table")


def ranks(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    r = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            r[order[k]] = avg
        i = j + 1
    return r
