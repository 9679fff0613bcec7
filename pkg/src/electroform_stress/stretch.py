"""Stress-to-stretch correlation and additive dosing trends.

Stretch is in ppm, positive for expansion on release. A compressive deposit
(negative stress) expands when freed, so the expected slope is negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy import stats

from .errors import DomainError, InsufficientDataError, SingularDesignError
from .regression import fit_line

TREND_THRESHOLD = 0.5
TREND_DIRECTIONS = ("more_compressive", "less_compressive", "none")


@dataclass(frozen=True)
class StressStretchPair:
    stress: float
    stretch: float
    source: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.stress) and math.isfinite(self.stretch)):
            raise DomainError("stress and stretch must be finite")


@dataclass(frozen=True)
class LinearModel:
    slope: float
    intercept: float
    r_squared: float
    n: int

    def __post_init__(self):
        if not (0.0 <= self.r_squared <= 1.0):
            raise DomainError(f"r_squared must lie in [0, 1], got {self.r_squared!r}")
        if self.n < 2:
            raise DomainError("a linear model needs n >= 2")


@dataclass(frozen=True)
class DoseSeries:
    additive_name: str
    observations: tuple[tuple[int, float], ...]

    def __post_init__(self):
        obs = tuple((int(step), float(stress)) for step, stress in self.observations)
        object.__setattr__(self, "observations", obs)
        for step, stress in obs:
            if step < 1:
                raise DomainError(f"dose steps start at 1, got {step}")
            if not math.isfinite(stress):
                raise DomainError("stresses must be finite")
        steps = [s for s, _ in obs]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise DomainError("dose steps must be strictly increasing")


@dataclass(frozen=True)
class TrendReport:
    additive_name: str
    direction: str
    spearman_rho: float
    slope_sign: int
    threshold: float = TREND_THRESHOLD
    n: int = 0


def fit_stress_stretch(pairs: Iterable[StressStretchPair]) -> LinearModel:
    """Ordinary least squares of stretch (ppm) on stress (MPa)."""
    pairs = list(pairs)
    if len(pairs) < 2:
        raise InsufficientDataError(f"need at least 2 stress/stretch pairs, got {len(pairs)}")
    x = np.array([p.stress for p in pairs])
    if np.all(x == x[0]):
        raise SingularDesignError("all stresses are identical; slope is undefined")
    y = np.array([p.stretch for p in pairs])
    line = fit_line(x, y)
    return LinearModel(line.slope, line.intercept, line.r_squared, line.n)


def predict_stretch(model: LinearModel, stress: float) -> float:
    return model.slope * stress + model.intercept


def spearman_rho(x, y) -> float:
    """Spearman rank correlation with average ranks for ties.

    Ranks are half-integers, so the Pearson sums are formed exactly and a
    perfectly monotone series gives exactly ±1.
    """
    rx = [Fraction(r) for r in stats.rankdata(x)]
    ry = [Fraction(r) for r in stats.rankdata(y)]
    mx = sum(rx) / len(rx)
    my = sum(ry) / len(ry)
    sxy = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    sxx = sum((a - mx) ** 2 for a in rx)
    syy = sum((b - my) ** 2 for b in ry)
    if sxx == 0 or syy == 0:
        return 0.0
    if sxy * sxy == sxx * syy:
        return 1.0 if sxy > 0 else -1.0
    return float(sxy) / math.sqrt(float(sxx * syy))


def additive_trend(series: DoseSeries, threshold: float = TREND_THRESHOLD) -> TrendReport:
    """Rank correlation of signed stress against dose step.

    With compressive stress negative, ρ ≤ −threshold means the additive makes
    the deposit more compressive; ρ ≥ +threshold means less compressive.
    """
    obs = series.observations
    if len(obs) < 3:
        raise InsufficientDataError(f"trend testing needs at least 3 observations, got {len(obs)}")
    steps = np.array([s for s, _ in obs], dtype=float)
    stress = np.array([v for _, v in obs])
    if np.all(stress == stress[0]):
        rho = 0.0
        slope_sign = 0
    else:
        rho = spearman_rho(steps, stress)
        slope_sign = int(np.sign(fit_line(steps, stress).slope))
    if rho <= -threshold:
        direction = "more_compressive"
    elif rho >= threshold:
        direction = "less_compressive"
    else:
        direction = "none"
    return TrendReport(series.additive_name, direction, rho, slope_sign, threshold, len(obs))
