"""Bragg geometry, lattice strain and X-ray elastic constants.

Angles cross this API in degrees; radians are used internally only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ImplausibleStrainError, NoDiffractionError

# 10x any realistic elastic lattice strain; larger values mean a unit or indexing mistake
STRAIN_BOUND = 0.05


@dataclass(frozen=True)
class Reflection:
    """Radiation wavelength (Å), diffraction order and a free-text {hkl} tag."""

    wavelength: float
    order: int = 1
    hkl_label: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.wavelength) and self.wavelength > 0):
            raise DomainError(f"wavelength must be > 0 Å, got {self.wavelength!r}")
        if isinstance(self.order, bool) or int(self.order) != self.order or self.order < 1:
            raise DomainError(f"diffraction order must be a positive integer, got {self.order!r}")


@dataclass(frozen=True)
class ElasticConstants:
    """X-ray elastic constants of one reflection, in MPa⁻¹.

    ``half_s2`` is ½S₂{hkl}; ``s1`` multiplies the in-plane stress sum.
    """

    half_s2: float
    s1: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.half_s2) and self.half_s2 > 0):
            raise DomainError(f"half_s2 must be > 0, got {self.half_s2!r}")
        if not math.isfinite(self.s1):
            raise DomainError(f"s1 must be finite, got {self.s1!r}")
        if self.half_s2 + 2 * self.s1 <= 0:
            raise DomainError("half_s2 + 2*s1 must be > 0 (E > 0, nu < 0.5)")


def check_strain(epsilon: float) -> float:
    if not math.isfinite(epsilon) or abs(epsilon) >= STRAIN_BOUND:
        raise ImplausibleStrainError(
            f"strain {epsilon!r} exceeds the plausibility bound |eps| < {STRAIN_BOUND}; "
            "check d0 and peak indexing"
        )
    return epsilon


def lattice_spacing(theta: float, refl: Reflection) -> float:
    """Spacing d (Å) from the Bragg angle θ in degrees (half of 2θ)."""
    if not (0.0 < theta < 90.0):
        raise DomainError(f"Bragg angle must lie in (0, 90) degrees, got {theta!r}")
    return refl.order * refl.wavelength / (2.0 * math.sin(math.radians(theta)))


def bragg_angle(d: float, refl: Reflection) -> float:
    """Bragg angle θ in degrees for spacing ``d``; inverse of :func:`lattice_spacing`."""
    if not (math.isfinite(d) and d > 0):
        raise DomainError(f"lattice spacing must be > 0, got {d!r}")
    ratio = refl.order * refl.wavelength / (2.0 * d)
    if ratio >= 1.0:
        raise NoDiffractionError(
            f"n*lambda = {refl.order * refl.wavelength:g} >= 2d = {2 * d:g}; no diffraction angle"
        )
    return math.degrees(math.asin(ratio))


def strain_from_spacing(d: float, d0: float) -> float:
    if not (d0 > 0 and d > 0):
        raise DomainError(f"spacings must be > 0, got d={d!r}, d0={d0!r}")
    return check_strain((d - d0) / d0)


def xec_from_isotropic(young_modulus: float, poisson_ratio: float) -> ElasticConstants:
    """Isotropic constants: ½S₂ = (1+ν)/E, s₁ = −ν/E."""
    if not (math.isfinite(young_modulus) and young_modulus > 0):
        raise DomainError(f"Young's modulus must be > 0 MPa, got {young_modulus!r}")
    if not (-1.0 < poisson_ratio < 0.5):
        raise DomainError(f"Poisson ratio must lie in (-1, 0.5), got {poisson_ratio!r}")
    return ElasticConstants(
        half_s2=(1.0 + poisson_ratio) / young_modulus,
        s1=-poisson_ratio / young_modulus,
    )
