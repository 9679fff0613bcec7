"""Synthetic tilt series with a known stress, for round-trip checks and demos.

Nothing here claims to reproduce measured data. Ni {311} spacing with Cu Kα1
is only a convenient, realistic geometry.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .formats import write_profile_csv
from .peakfit import DiffractionProfile, pseudo_voigt
from .sin2psi import strain_at_tilt
from .xrd import ElasticConstants, Reflection, bragg_angle, xec_from_isotropic

CU_KA1 = Reflection(1.5406, 1, "311")
NI_311_D0 = 3.524 / math.sqrt(11.0)
DEFAULT_XEC = xec_from_isotropic(200000.0, 0.31)
DEFAULT_PSIS = (0.0, 15.0, -15.0, 25.0, -25.0, 35.0, -35.0, 45.0, -45.0)


def tilt_strains(
    sigma_phi: float,
    psis: Sequence[float] = DEFAULT_PSIS,
    xec: ElasticConstants = DEFAULT_XEC,
    in_plane_sum: float | None = None,
    shear_amplitude: float = 0.0,
) -> list[float]:
    """Strains at each tilt for an equibiaxial state (σ₁+σ₂ = 2σ_φ unless given).

    ``shear_amplitude`` adds ``a·sin(2ψ)``, which opens a gap between the
    +ψ and −ψ branches.
    """
    total = 2.0 * sigma_phi if in_plane_sum is None else in_plane_sum
    return [
        strain_at_tilt(psi, sigma_phi, xec, total) + shear_amplitude * math.sin(math.radians(2 * psi))
        for psi in psis
    ]


def peak_two_theta(strain: float, d0: float = NI_311_D0, refl: Reflection = CU_KA1) -> float:
    return 2.0 * bragg_angle(d0 * (1.0 + strain), refl)


def scan_grid(center: float, span: float = 4.0, step: float = 0.02) -> np.ndarray:
    start = round(center - span / 2.0, 2)
    n = int(round(span / step)) + 1
    return np.round(start + step * np.arange(n), 6)


def synthetic_profile(
    two_theta_center: float,
    psi: float,
    grid: np.ndarray,
    *,
    phi: float = 0.0,
    fwhm: float = 0.4,
    height: float = 1000.0,
    eta: float = 0.3,
    background: float = 50.0,
    noise: float = 0.0,
    rng: np.random.Generator | None = None,
    decimals: int = 3,
) -> DiffractionProfile:
    counts = pseudo_voigt(grid, two_theta_center, fwhm, height, eta, background)
    if noise:
        rng = rng or np.random.default_rng(0)
        counts = counts + rng.normal(0.0, noise, counts.shape)
    counts = np.round(np.clip(counts, 0.0, None), decimals)
    return DiffractionProfile(grid, counts, psi=psi, phi=phi)


def _psi_name(psi: float) -> str:
    return f"psi_{'p' if psi >= 0 else 'm'}{abs(psi):04.1f}.csv"


def write_session(
    directory: str | Path,
    sigma_phi: float = -120.0,
    *,
    sample_id: str = "St57-synthetic",
    psis: Sequence[float] = DEFAULT_PSIS,
    xec: ElasticConstants = DEFAULT_XEC,
    refl: Reflection = CU_KA1,
    d0: float = NI_311_D0,
    peak_method: str = "pseudo_voigt",
    shear_amplitude: float = 0.0,
) -> Path:
    """Write profile CSVs and a commented session file; return the session path."""
    directory = Path(directory)
    (directory / "profiles").mkdir(parents=True, exist_ok=True)
    grid = scan_grid(round(peak_two_theta(0.0, d0, refl), 2))
    strains = tilt_strains(sigma_phi, psis, xec, shear_amplitude=shear_amplitude)
    lines = [
        f"# Synthetic sin^2(psi) session: sigma_phi = {sigma_phi:g} MPa, equibiaxial.",
        "# Profiles are pseudo-Voigt peaks generated by electroform_stress.synthetic.",
        "# Keys before the first [tilt] section are global; one [tilt] per profile.",
        f"sample_id = {sample_id}",
        "",
        "# radiation and reflection",
        f"wavelength_angstrom = {refl.wavelength!r}",
        f"order = {refl.order}",
        f"hkl = {refl.hkl_label}",
        "",
        "# X-ray elastic constants in 1/MPa (or: young_modulus_mpa + poisson_ratio)",
        f"half_s2_per_mpa = {xec.half_s2!r}",
        f"s1_per_mpa = {xec.s1!r}",
        "",
        "# strain-free spacing taken from the psi = 0 tilt (or: d0_angstrom = ...)",
        "d0_policy = psi0",
        f"peak_method = {peak_method}",
        "",
    ]
    for psi, strain in zip(psis, strains):
        profile = synthetic_profile(peak_two_theta(strain, d0, refl), psi, grid)
        rel = f"profiles/{_psi_name(psi)}"
        (directory / rel).write_bytes(write_profile_csv(profile))
        lines += ["[tilt]", f"profile = {rel}", ""]
    session = directory / "session.txt"
    session.write_text("\n".join(lines), encoding="utf-8")
    return session
