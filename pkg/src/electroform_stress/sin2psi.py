"""Stress from the linear dependence of lattice strain on sin²ψ.

For a biaxial surface stress state the strain measured at tilt ψ is

    ε(ψ) = ½S₂·σ_φ·sin²ψ + s₁·(σ₁ + σ₂)

so the slope of ε against sin²ψ divided by ½S₂ gives σ_φ. Stresses are in
MPa with compressive stress negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .errors import (
    DomainError,
    InsufficientDataError,
    MissingReferenceError,
    MixedAzimuthError,
    NoPairsError,
    SingularDesignError,
)
from .peakfit import PeakEstimate
from .regression import fit_line
from .xrd import ElasticConstants, Reflection, check_strain, lattice_spacing, strain_from_spacing

# information depth and irradiated area of the reference diffractometer setup
DEFAULT_PENETRATION_DEPTH_UM = 3.5
DEFAULT_MEASURED_AREA_MM2 = 0.126

REFERENCE_PSI_TOL = 0.5
PAIR_PSI_TOL = 0.5
MIN_TILTS = 3


@dataclass(frozen=True)
class TiltMeasurement:
    psi: float
    strain: float
    weight: float = 1.0
    spacing: float | None = None
    sin2psi: float = field(init=False)

    def __post_init__(self):
        if not (-90.0 <= self.psi <= 90.0):
            raise DomainError(f"psi must lie in [-90, 90] degrees, got {self.psi!r}")
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise DomainError(f"weight must be > 0, got {self.weight!r}")
        check_strain(self.strain)
        object.__setattr__(self, "sin2psi", math.sin(math.radians(self.psi)) ** 2)


@dataclass(frozen=True)
class StressFit:
    sigma_phi: float
    sigma_phi_stderr: float
    intercept: float
    intercept_stderr: float
    r_squared: float
    n_points: int
    phi: float = 0.0
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.sigma_phi_stderr >= 0:
            raise DomainError("sigma_phi_stderr must be >= 0")
        if self.n_points < MIN_TILTS:
            raise DomainError(f"a stress fit needs at least {MIN_TILTS} points")

    @property
    def dof(self) -> int:
        return self.n_points - 2

    def confidence_interval(self, level: float = 0.95) -> tuple[float, float]:
        """Two-sided interval for σ_φ from the Student-t quantile with n−2 dof."""
        if not (0.0 < level < 1.0):
            raise DomainError(f"confidence level must lie in (0, 1), got {level!r}")
        q = float(stats.t.ppf(0.5 + level / 2.0, self.dof))
        half = q * self.sigma_phi_stderr
        return self.sigma_phi - half, self.sigma_phi + half

    @classmethod
    def reported(cls, sigma_phi: float, stderr: float, *, phi: float = 0.0) -> "StressFit":
        """Wrap an externally obtained ``σ ± stderr`` value."""
        return cls(sigma_phi, stderr, 0.0, 0.0, 1.0, MIN_TILTS, phi)


@dataclass(frozen=True)
class SplitReport:
    max_branch_gap: float
    split_detected: bool
    gap_threshold: float
    n_pairs: int = 0


@dataclass(frozen=True)
class RelaxationResult:
    verdict: str
    delta: float
    tolerance: float


def build_strain_points(
    peaks: Sequence[tuple[PeakEstimate, float, float]],
    refl: Reflection,
    d0: float | None = None,
) -> list[TiltMeasurement]:
    """Convert fitted peak positions at several tilts into strain points.

    ``peaks`` holds ``(estimate, psi, phi)`` triples. With ``d0=None`` the
    strain-free spacing is taken from the ψ≈0 measurement (mean of replicates
    within 0.5°), which shifts only the intercept to first order.
    """
    peaks = list(peaks)
    if len(peaks) < MIN_TILTS:
        raise InsufficientDataError(f"need at least {MIN_TILTS} tilts, got {len(peaks)}")
    phis = {float(phi) for _, _, phi in peaks}
    if max(phis) - min(phis) > 1e-9:
        raise MixedAzimuthError(f"all tilts must share one azimuth phi, got {sorted(phis)}")

    spacings = [lattice_spacing(est.center_two_theta / 2.0, refl) for est, _, _ in peaks]
    if d0 is None:
        ref = [d for d, (_, psi, _) in zip(spacings, peaks) if abs(psi) < REFERENCE_PSI_TOL]
        if not ref:
            raise MissingReferenceError(
                "d0 policy 'psi0' needs a measurement with |psi| < 0.5 degrees"
            )
        d0 = math.fsum(ref) / len(ref)
    elif not d0 > 0:
        raise DomainError(f"d0 must be > 0 Å, got {d0!r}")

    uncertainties = [est.center_uncertainty for est, _, _ in peaks]
    use_weights = all(u > 0 for u in uncertainties)
    points = []
    for d, u, (_, psi, _) in zip(spacings, uncertainties, peaks):
        points.append(
            TiltMeasurement(
                psi=float(psi),
                strain=strain_from_spacing(d, d0),
                weight=1.0 / (u * u) if use_weights else 1.0,
                spacing=d,
            )
        )
    return points


def fit_sin2psi(
    points: Iterable[TiltMeasurement],
    xec: ElasticConstants,
    *,
    phi: float = 0.0,
    penetration_depth_um: float = DEFAULT_PENETRATION_DEPTH_UM,
    measured_area_mm2: float = DEFAULT_MEASURED_AREA_MM2,
) -> StressFit:
    """Weighted regression of strain on sin²ψ; σ_φ = slope / ½S₂."""
    points = list(points)
    if len(points) < MIN_TILTS:
        raise InsufficientDataError(f"need at least {MIN_TILTS} tilts, got {len(points)}")
    x = np.array([p.sin2psi for p in points])
    if np.all(x == x[0]):
        raise SingularDesignError("all tilts share one sin^2(psi); the slope is undefined")
    y = np.array([p.strain for p in points])
    w = np.array([p.weight for p in points])
    line = fit_line(x, y, w)
    return StressFit(
        sigma_phi=line.slope / xec.half_s2,
        sigma_phi_stderr=line.slope_stderr / xec.half_s2,
        intercept=line.intercept,
        intercept_stderr=line.intercept_stderr,
        r_squared=line.r_squared,
        n_points=line.n,
        phi=phi,
        metadata={
            "penetration_depth_um": penetration_depth_um,
            "measured_area_mm2": measured_area_mm2,
        },
    )


def strain_at_tilt(psi: float, sigma_phi: float, xec: ElasticConstants, in_plane_sum: float) -> float:
    """Forward model: strain at tilt ``psi`` for stress ``sigma_phi`` and σ₁+σ₂ = ``in_plane_sum``."""
    return xec.half_s2 * sigma_phi * math.sin(math.radians(psi)) ** 2 + xec.s1 * in_plane_sum


def detect_psi_splitting(points: Iterable[TiltMeasurement], gap_threshold: float = 1e-5) -> SplitReport:
    """Largest strain difference between matching +ψ and −ψ tilts."""
    if not gap_threshold >= 0:
        raise DomainError("gap_threshold must be >= 0")
    points = list(points)
    positive = [p for p in points if p.psi > 0]
    negative = [p for p in points if p.psi < 0]
    gaps = [
        abs(p.strain - q.strain)
        for p in positive
        for q in negative
        if abs(p.psi + q.psi) <= PAIR_PSI_TOL
    ]
    if not gaps:
        raise NoPairsError("no +psi/-psi pairs with matching |psi| within 0.5 degrees")
    gap = max(gaps)
    return SplitReport(
        max_branch_gap=gap,
        split_detected=gap > gap_threshold,
        gap_threshold=gap_threshold,
        n_pairs=len(gaps),
    )


def relaxation_check(on_mandrel: StressFit, free_standing: StressFit) -> RelaxationResult:
    """Classify the change in stress magnitude after release from the mandrel.

    The tolerance is the two standard errors combined in quadrature, with a
    1 MPa floor. ``delta`` is σ_free − σ_mandrel.
    """
    tol = max(1.0, math.hypot(on_mandrel.sigma_phi_stderr, free_standing.sigma_phi_stderr))
    before = abs(on_mandrel.sigma_phi)
    after = abs(free_standing.sigma_phi)
    if after < before - tol:
        verdict = "relaxed_toward_zero"
    elif after > before + tol:
        verdict = "anomalous"
    else:
        verdict = "unchanged"
    return RelaxationResult(
        verdict=verdict,
        delta=free_standing.sigma_phi - on_mandrel.sigma_phi,
        tolerance=tol,
    )
