"""Deposit stress analyzer: leg separation of a plated test strip to stress.

A calibration table maps the separation reading (scale increments) to the
stress-thickness product in MPa·µm. Dividing by the deposit thickness gives
the stress. The table stores magnitudes. The sign comes from the bend
direction and the strip's sign convention:

* ``toward_deposit`` means each leg curls toward its plated face. On the
  usual strip, plated on the outer faces, that spreads the legs apart.
* with ``spread_means_tensile`` that reading is tensile (+). With
  ``spread_means_compressive`` every sign is reversed.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import DomainError, ExtrapolationError, InconsistentCalibrationError

SIGN_CONVENTIONS = ("spread_means_tensile", "spread_means_compressive")
BEND_DIRECTIONS = ("toward_deposit", "away_from_deposit")


@dataclass(frozen=True)
class StripReading:
    deflection: float
    deposit_thickness: float
    bend_direction: str = "toward_deposit"

    def __post_init__(self):
        if not (math.isfinite(self.deflection) and self.deflection >= 0):
            raise DomainError(f"deflection must be >= 0, got {self.deflection!r}")
        if not (math.isfinite(self.deposit_thickness) and self.deposit_thickness > 0):
            raise DomainError(f"deposit thickness must be > 0 um, got {self.deposit_thickness!r}")
        if self.bend_direction not in BEND_DIRECTIONS:
            raise DomainError(
                f"bend_direction must be one of {BEND_DIRECTIONS}, got {self.bend_direction!r}"
            )


@dataclass(frozen=True)
class CalibrationTable:
    """Piecewise-linear chart from deflection to |stress × thickness| (MPa·µm).

    ``corrections`` optionally holds a low-order part per node, so a node can
    carry an exact σ·t product that one double cannot hold. It is empty for
    tables read from files.
    """

    points: tuple[tuple[float, float], ...]
    sign_convention: str = "spread_means_tensile"
    corrections: tuple[float, ...] = ()

    def __post_init__(self):
        pts = tuple((float(d), float(s)) for d, s in self.points)
        object.__setattr__(self, "points", pts)
        corr = tuple(float(c) for c in self.corrections) or (0.0,) * len(pts)
        object.__setattr__(self, "corrections", corr)
        if self.sign_convention not in SIGN_CONVENTIONS:
            raise DomainError(
                f"sign_convention must be one of {SIGN_CONVENTIONS}, got {self.sign_convention!r}"
            )
        if len(pts) < 2:
            raise DomainError("calibration table needs the origin and at least one more point")
        if len(corr) != len(pts) or not all(math.isfinite(c) for c in corr):
            raise DomainError("corrections must be finite, one per table point")
        if pts[0] != (0.0, 0.0) or corr[0] != 0.0:
            raise DomainError("calibration table must start at (0, 0)")
        values = self._exact_values()
        for i in range(1, len(pts)):
            (d_prev, _), (d, s) = pts[i - 1], pts[i]
            if not (math.isfinite(d) and math.isfinite(s)):
                raise DomainError("calibration values must be finite")
            if d <= d_prev:
                raise DomainError(f"deflections must be strictly increasing ({d_prev} -> {d})")
            if values[i] < values[i - 1]:
                raise DomainError(
                    f"stress-thickness must not decrease with deflection ({pts[i - 1][1]} -> {s})"
                )

    def _exact_values(self) -> list[Fraction]:
        return [Fraction(s) + Fraction(c) for (_, s), c in zip(self.points, self.corrections)]

    @property
    def deflections(self) -> list[float]:
        return [d for d, _ in self.points]

    @property
    def max_deflection(self) -> float:
        return self.points[-1][0]

    def lookup_exact(self, deflection: float) -> Fraction:
        """Interpolated stress-thickness in exact arithmetic; no extrapolation."""
        if not (0 <= deflection <= self.max_deflection):
            raise ExtrapolationError(
                f"deflection {deflection:g} outside calibrated range [0, {self.max_deflection:g}]"
            )
        xs = self.deflections
        values = self._exact_values()
        i = bisect.bisect_left(xs, deflection)
        if xs[i] == deflection:
            return values[i]
        x0, x1 = Fraction(xs[i - 1]), Fraction(xs[i])
        return values[i - 1] + (values[i] - values[i - 1]) * (Fraction(deflection) - x0) / (x1 - x0)

    def lookup(self, deflection: float) -> float:
        """Interpolated stress-thickness; exact at table nodes, no extrapolation."""
        return float(self.lookup_exact(deflection))


def reading_sign(reading: StripReading, table: CalibrationTable) -> int:
    sign = 1 if reading.bend_direction == "toward_deposit" else -1
    if table.sign_convention == "spread_means_compressive":
        sign = -sign
    return sign


def stress_from_deflection(reading: StripReading, table: CalibrationTable) -> float:
    """Signed stress in MPa; tensile positive.

    The quotient is rounded once from the exact stress-thickness, so a
    calibration reading comes back bit-exactly.
    """
    st = table.lookup_exact(reading.deflection)
    stress = float(st / Fraction(reading.deposit_thickness))
    return reading_sign(reading, table) * stress + 0.0  # normalise -0.0


def _two_product(a: float, b: float) -> tuple[float, float]:
    # a*b == hi + lo exactly, barring underflow
    hi = a * b
    return hi, float(Fraction(a) * Fraction(b) - Fraction(hi))


def calibrate(
    known: Iterable[tuple[StripReading, float]],
    sign_convention: str = "spread_means_tensile",
) -> CalibrationTable:
    """Build a table whose lookup reproduces every reference ``(reading, stress)`` pair.

    The origin is prepended when absent. Readings sharing a deflection must
    agree on stress-thickness to 1e-9 relative.
    """
    known = list(known)
    if not known:
        raise InconsistentCalibrationError("calibration needs at least one reference reading")
    probe = CalibrationTable(((0.0, 0.0), (1.0, 1.0)), sign_convention)
    by_deflection: dict[float, float] = {}
    for reading, stress in known:
        if not math.isfinite(stress):
            raise InconsistentCalibrationError(f"reference stress must be finite, got {stress!r}")
        sign = reading_sign(reading, probe)
        if stress != 0 and math.copysign(1.0, stress) != sign:
            raise InconsistentCalibrationError(
                f"stress {stress:g} MPa contradicts bend direction {reading.bend_direction!r} "
                f"under {sign_convention}"
            )
        st = _two_product(abs(stress), reading.deposit_thickness)
        d = float(reading.deflection)
        if d in by_deflection and not math.isclose(by_deflection[d][0], st[0], rel_tol=1e-9, abs_tol=1e-12):
            raise InconsistentCalibrationError(
                f"deflection {d:g} maps to both {by_deflection[d][0]:g} and {st[0]:g} MPa*um"
            )
        by_deflection.setdefault(d, st)
    if by_deflection.get(0.0, (0.0, 0.0)) != (0.0, 0.0):
        raise InconsistentCalibrationError("zero deflection must correspond to zero stress")
    by_deflection[0.0] = (0.0, 0.0)
    rows = sorted(by_deflection.items())
    points = tuple((d, hi) for d, (hi, _) in rows)
    corrections = tuple(lo for _, (_, lo) in rows)
    try:
        return CalibrationTable(points, sign_convention, corrections)
    except DomainError as exc:
        raise InconsistentCalibrationError(str(exc)) from exc


def linear_table(constant: float, max_deflection: float, sign_convention: str = "spread_means_tensile") -> CalibrationTable:
    """Two-point table for a vendor constant ``stress·thickness = constant·deflection``."""
    if not (constant > 0 and max_deflection > 0):
        raise DomainError("constant and max_deflection must be > 0")
    return CalibrationTable(((0.0, 0.0), (max_deflection, constant * max_deflection)), sign_convention)
