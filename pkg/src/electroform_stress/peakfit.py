"""Locate the diffraction peak position 2θ in one measured profile."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConvergenceError, DomainError, EdgePeakError, NoPeakError

MIN_SAMPLES = 8
PEAK_METHODS = ("centroid", "parabolic", "pseudo_voigt")

_FOUR_LN2 = 4.0 * math.log(2.0)


@dataclass(frozen=True)
class DiffractionProfile:
    """Intensity versus 2θ (degrees) recorded at tilt ``psi`` and azimuth ``phi``."""

    two_theta: np.ndarray
    intensity: np.ndarray
    psi: float
    phi: float = 0.0

    def __post_init__(self):
        tt = np.array(self.two_theta, dtype=float)
        counts = np.array(self.intensity, dtype=float)
        if tt.ndim != 1 or tt.shape != counts.shape:
            raise DomainError("two_theta and intensity must be 1-D and of equal length")
        if tt.size < MIN_SAMPLES:
            raise DomainError(f"profile needs at least {MIN_SAMPLES} samples, got {tt.size}")
        if not np.all(np.isfinite(tt)):
            raise DomainError("two_theta values must be finite")
        if np.any(np.diff(tt) <= 0):
            raise DomainError("two_theta must be strictly increasing")
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise DomainError("intensities must be finite and >= 0")
        if not (math.isfinite(self.psi) and math.isfinite(self.phi)):
            raise DomainError("psi and phi must be finite")
        tt.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "two_theta", tt)
        object.__setattr__(self, "intensity", counts)

    def __len__(self) -> int:
        return self.two_theta.size

    def with_intensity(self, intensity) -> "DiffractionProfile":
        return replace(self, intensity=np.asarray(intensity, dtype=float))


@dataclass(frozen=True)
class PeakEstimate:
    center_two_theta: float
    center_uncertainty: float
    height: float
    fwhm: float = 0.0
    method_tag: str = "centroid"
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method_tag not in PEAK_METHODS:
            raise DomainError(f"unknown peak method {self.method_tag!r}")
        if not (self.center_uncertainty >= 0) or not (self.fwhm >= 0):
            raise DomainError("center_uncertainty and fwhm must be >= 0")


def _edge_count(n: int, edge_fraction: float) -> int:
    return max(1, int(math.floor(edge_fraction * n + 1e-9)))


def subtract_background(profile: DiffractionProfile, edge_fraction: float = 0.1) -> DiffractionProfile:
    """Remove a straight background fitted through both ends of the scan.

    The line is a least-squares fit to the first and last ``edge_fraction``
    of the samples. Negative results are clamped to zero.
    """
    if not (0.0 < edge_fraction <= 0.4):
        raise DomainError(f"edge_fraction must lie in (0, 0.4], got {edge_fraction!r}")
    x, y = profile.two_theta, profile.intensity
    k = _edge_count(len(profile), edge_fraction)
    xs = np.concatenate([x[:k], x[-k:]])
    ys = np.concatenate([y[:k], y[-k:]])
    # centred abscissa keeps the 2x2 system well conditioned at 2θ ~ 100°
    x_ref = 0.5 * (x[0] + x[-1])
    design = np.column_stack([np.ones_like(xs), xs - x_ref])
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    background = coef[0] + coef[1] * (x - x_ref)
    return profile.with_intensity(np.clip(y - background, 0.0, None))


def fit_peak_centroid(profile: DiffractionProfile, threshold_fraction: float = 0.1) -> PeakEstimate:
    """Intensity-weighted mean 2θ over samples at or above ``threshold_fraction`` of the maximum.

    Run :func:`subtract_background` first; the centroid is biased by any
    pedestal left under the peak.
    """
    if not (0.0 < threshold_fraction < 1.0):
        raise DomainError(f"threshold_fraction must lie in (0, 1), got {threshold_fraction!r}")
    x, y = profile.two_theta, profile.intensity
    peak = float(y.max())
    if peak <= 0:
        raise NoPeakError("profile has no positive intensity")
    mask = y >= threshold_fraction * peak
    count = int(mask.sum())
    if count < 3:
        raise NoPeakError(f"only {count} samples above threshold; need at least 3")
    xs, ws = x[mask], y[mask]
    wsum = math.fsum(ws)
    center = math.fsum(ws * xs) / wsum
    spread = math.sqrt(math.fsum(ws * (xs - center) ** 2) / wsum)
    return PeakEstimate(
        center_two_theta=center,
        center_uncertainty=spread / math.sqrt(count),
        height=peak,
        fwhm=0.0,
        method_tag="centroid",
    )


def fit_peak_parabolic(profile: DiffractionProfile, window: int = 7) -> PeakEstimate:
    """Vertex of a least-squares parabola through ``window`` samples around the maximum."""
    n = len(profile)
    if isinstance(window, bool) or int(window) != window or window < 3 or window % 2 == 0:
        raise DomainError(f"window must be an odd integer >= 3, got {window!r}")
    if window > n:
        raise DomainError(f"window {window} exceeds the {n} available samples")
    x, y = profile.two_theta, profile.intensity
    # argmax returns the first maximum, i.e. the smallest 2θ on ties
    imax = int(np.argmax(y))
    half = window // 2
    if imax == 0 or imax == n - 1:
        raise EdgePeakError(f"maximum intensity sits at the scan edge (2theta={x[imax]:g})")
    if imax - half < 0 or imax + half > n - 1:
        raise EdgePeakError(f"a {window}-point window around 2theta={x[imax]:g} runs off the scan")

    xs = x[imax - half : imax + half + 1] - x[imax]
    ys = y[imax - half : imax + half + 1]
    design = np.column_stack([xs * xs, xs, np.ones_like(xs)])
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    a, b, c = (float(v) for v in coef)
    if not a < 0:
        raise NoPeakError("fitted parabola opens upward; no maximum in the window")
    offset = -b / (2.0 * a)
    center = float(x[imax]) + offset
    if not (x[0] <= center <= x[-1]):
        raise NoPeakError(f"parabola vertex {center:g} lies outside the scan")

    uncertainty = 0.0
    dof = window - 3
    if dof > 0:
        resid = ys - design @ coef
        s2 = float(resid @ resid) / dof
        cov = s2 * np.linalg.pinv(design.T @ design)
        grad = np.array([b / (2.0 * a * a), -1.0 / (2.0 * a), 0.0])
        uncertainty = math.sqrt(max(0.0, float(grad @ cov @ grad)))
    return PeakEstimate(
        center_two_theta=center,
        center_uncertainty=uncertainty,
        height=c - b * b / (4.0 * a),
        fwhm=0.0,
        method_tag="parabolic",
    )


def pseudo_voigt(x, center, fwhm, height, eta, background=0.0):
    """Unit-height Lorentzian/Gaussian mix sharing center and FWHM, plus a constant."""
    u = (np.asarray(x, dtype=float) - center) / fwhm
    gauss = np.exp(-_FOUR_LN2 * u * u)
    lorentz = 1.0 / (1.0 + 4.0 * u * u)
    return height * (eta * lorentz + (1.0 - eta) * gauss) + background


def _eta(t):
    # smooth clamp of the mixing parameter onto [0, 1]
    return 0.5 * (1.0 + math.sin(t))


def _model_and_jacobian(x, p):
    c, w, h, t, b = p
    eta = _eta(t)
    u = (x - c) / w
    gauss = np.exp(-_FOUR_LN2 * u * u)
    lorentz = 1.0 / (1.0 + 4.0 * u * u)
    shape = eta * lorentz + (1.0 - eta) * gauss
    model = h * shape + b

    d_gauss_du = -2.0 * _FOUR_LN2 * u * gauss
    d_lorentz_du = -8.0 * u * lorentz * lorentz
    d_shape_du = eta * d_lorentz_du + (1.0 - eta) * d_gauss_du
    jac = np.empty((x.size, 5))
    jac[:, 0] = h * d_shape_du * (-1.0 / w)
    jac[:, 1] = h * d_shape_du * (-u / w)
    jac[:, 2] = shape
    jac[:, 3] = h * (lorentz - gauss) * 0.5 * math.cos(t)
    jac[:, 4] = 1.0
    return model, jac


def _initial_fwhm(x, y, center, height, floor):
    above = x[y >= floor + 0.5 * height]
    if above.size >= 2:
        return float(above[-1] - above[0]) + float(np.median(np.diff(x)))
    return max(float(np.median(np.diff(x))) * 4.0, 1e-3)


def fit_peak_pseudo_voigt(
    profile: DiffractionProfile,
    init: PeakEstimate,
    *,
    poisson_weights: bool = False,
    max_iter: int = 200,
    tol: float = 1e-10,
) -> PeakEstimate:
    """Pseudo-Voigt fit by damped Gauss-Newton (Levenberg-Marquardt).

    Model: ``h*(eta*L + (1-eta)*G) + b`` where Lorentzian and Gaussian share
    center and FWHM. The damping starts at 1e-3, grows x10 on a rejected step
    and shrinks x10 on an accepted one. Iteration stops when the step norm
    relative to the parameter norm drops below ``tol``.
    """
    x, y = profile.two_theta, profile.intensity
    if not (x[0] <= init.center_two_theta <= x[-1]):
        raise DomainError(
            f"initial center {init.center_two_theta:g} outside scan [{x[0]:g}, {x[-1]:g}]"
        )
    floor = float(y.min())
    height = init.height if init.height > 0 else float(y.max()) - floor
    if height <= 0:
        raise NoPeakError("profile is flat; nothing to fit")
    width = init.fwhm if init.fwhm > 0 else _initial_fwhm(x, y, init.center_two_theta, height, floor)
    params = np.array([init.center_two_theta, width, height, 0.0, floor])

    sw = np.sqrt(1.0 / np.maximum(y, 1.0)) if poisson_weights else np.ones_like(y)

    def residuals(p):
        model, jac = _model_and_jacobian(x, p)
        return sw * (y - model), sw[:, None] * jac

    r, jac = residuals(params)
    cost = float(r @ r)
    damping = 1e-3
    step_norm = math.inf
    converged = cost == 0.0
    iteration = 0
    while not converged and iteration < max_iter:
        iteration += 1
        jtj = jac.T @ jac
        g = jac.T @ r
        diag = np.maximum(np.diag(jtj), 1e-12 * max(1.0, float(np.max(np.diag(jtj)))))
        try:
            step = np.linalg.solve(jtj + damping * np.diag(diag), g)
        except np.linalg.LinAlgError:
            damping *= 10.0
            continue
        step_norm = float(np.linalg.norm(step)) / (float(np.linalg.norm(params)) + 1e-300)
        trial = params + step
        trial_r, trial_jac = residuals(trial)
        trial_cost = float(trial_r @ trial_r)
        if np.isfinite(trial_cost) and trial_cost <= cost:
            params, r, jac, cost = trial, trial_r, trial_jac, trial_cost
            damping = max(damping / 10.0, 1e-15)
        else:
            damping *= 10.0
        if step_norm < tol or cost == 0.0:
            converged = True

    center, width, height, t, background = params
    best = {
        "center": float(center),
        "fwhm": abs(float(width)),
        "height": float(height),
        "eta": _eta(t),
        "background": float(background),
    }
    if not converged:
        raise ConvergenceError(
            f"pseudo-Voigt fit did not converge in {max_iter} iterations "
            f"(relative step {step_norm:.3g})",
            params=best,
            step_norm=step_norm,
            iterations=iteration,
        )
    if not (x[0] <= center <= x[-1]):
        raise NoPeakError(f"fitted center {center:g} drifted outside the scan")

    dof = x.size - params.size
    s2 = cost / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.pinv(jac.T @ jac)
    uncertainty = math.sqrt(max(0.0, float(cov[0, 0])))
    return PeakEstimate(
        center_two_theta=float(center),
        center_uncertainty=uncertainty,
        height=float(height),
        fwhm=abs(float(width)),
        method_tag="pseudo_voigt",
        extra={"eta": best["eta"], "background": best["background"], "iterations": iteration},
    )


def fit_peak(
    profile: DiffractionProfile,
    method: str,
    *,
    edge_fraction: float = 0.1,
    threshold_fraction: float = 0.1,
    window: int = 7,
    poisson_weights: bool = False,
) -> PeakEstimate:
    """Run one estimator with the preprocessing it expects.

    Centroid and parabolic estimators see the background-subtracted profile.
    The pseudo-Voigt model carries its own constant background, so it fits the
    raw counts, seeded from a parabolic estimate.
    """
    if method == "centroid":
        return fit_peak_centroid(subtract_background(profile, edge_fraction), threshold_fraction)
    if method == "parabolic":
        return fit_peak_parabolic(subtract_background(profile, edge_fraction), window)
    if method == "pseudo_voigt":
        seed = fit_peak_parabolic(profile, window)
        seed = replace(seed, height=seed.height - float(profile.intensity.min()))
        return fit_peak_pseudo_voigt(profile, seed, poisson_weights=poisson_weights)
    raise DomainError(f"unknown peak method {method!r}; expected one of {PEAK_METHODS}")
