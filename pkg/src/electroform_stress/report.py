"""Session orchestration and canonical text reports.

A report body is a function of its inputs only. The generation timestamp is
its single non-deterministic line, and it can be suppressed.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import FormatError, NoPairsError, StressToolkitError
from .formats import SessionDescriptor, parse_profile_csv, parse_session
from .peakfit import DiffractionProfile, PeakEstimate, fit_peak
from .sin2psi import (
    RelaxationResult,
    SplitReport,
    StressFit,
    TiltMeasurement,
    build_strain_points,
    detect_psi_splitting,
    fit_sin2psi,
)
from .strip import StripReading

REPORT_METHODS = ("xrd_sin2psi", "strip_analyzer")


def utc_now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


def digest_inputs(named_blobs) -> str:
    """SHA-256 over ``(name, bytes)`` pairs in the order given."""
    h = hashlib.sha256()
    for name, blob in named_blobs:
        h.update(name.encode("utf-8") + b"\0")
        h.update(len(blob).to_bytes(8, "big"))
        h.update(blob)
    return "sha256:" + h.hexdigest()


@dataclass
class SessionReport:
    sample_id: str
    method: str
    inputs_digest: str
    toolkit_version: str = __version__
    created_utc: str | None = None
    stress_fit: StressFit | None = None
    points: list[TiltMeasurement] = field(default_factory=list)
    peaks: list[PeakEstimate] = field(default_factory=list)
    split: SplitReport | None = None
    strip_reading: StripReading | None = None
    strip_stress: float | None = None
    settings: dict[str, str] = field(default_factory=dict)
    metadata: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in REPORT_METHODS:
            raise ValueError(f"unknown report method {self.method!r}")


# -- number formatting ---------------------------------------------------------


def fmt_stress(value: float) -> str:
    text = f"{value:.1f}"
    return "0.0" if text == "-0.0" else text


def fmt_strain(value: float) -> str:
    text = f"{value:.3e}"
    return "0.000e+00" if text.startswith("-0.000e") else text


def fmt_fixed(value: float, digits: int) -> str:
    text = f"{value:.{digits}f}"
    return text[1:] if text.startswith("-") and float(text) == 0 else text


def fmt_general(value: float) -> str:
    return f"{value:.6g}"


def _section(name: str, items: dict[str, str]) -> list[str]:
    return [f"[{name}]"] + [f"{key} = {items[key]}" for key in sorted(items)] + [""]


def _fit_items(fit: StressFit) -> dict[str, str]:
    low, high = fit.confidence_interval(0.95)
    return {
        "sigma_phi_mpa": fmt_stress(fit.sigma_phi),
        "sigma_phi_stderr_mpa": fmt_stress(fit.sigma_phi_stderr),
        "sigma_phi_ci95_mpa": f"{fmt_stress(low)} .. {fmt_stress(high)}",
        "intercept_strain": fmt_strain(fit.intercept),
        "intercept_stderr_strain": fmt_strain(fit.intercept_stderr),
        "r_squared": fmt_fixed(fit.r_squared, 6),
        "n_points": str(fit.n_points),
        "dof": str(fit.dof),
        "phi_deg": fmt_fixed(fit.phi, 3),
    }


def emit_report(report: SessionReport) -> bytes:
    """Canonical text: sorted keys per section, fixed number formats."""
    head = {
        "sample_id": report.sample_id,
        "method": report.method,
        "inputs_digest": report.inputs_digest,
        "toolkit_version": report.toolkit_version,
    }
    if report.created_utc is not None:
        head["created_utc"] = report.created_utc
    lines = ["# electroform-stress session report", ""]
    lines += _section("report", head)
    if report.settings:
        lines += _section("settings", report.settings)
    if report.method == "xrd_sin2psi" and report.stress_fit is not None:
        lines += _section("result", _fit_items(report.stress_fit))
    if report.method == "strip_analyzer" and report.strip_stress is not None:
        reading = report.strip_reading
        items = {"stress_mpa": fmt_stress(report.strip_stress)}
        if reading is not None:
            items.update(
                deflection_increments=fmt_general(reading.deflection),
                deposit_thickness_um=fmt_general(reading.deposit_thickness),
                bend_direction=reading.bend_direction,
            )
        lines += _section("result", items)
    if report.metadata:
        lines += _section("metadata", {k: fmt_general(v) for k, v in report.metadata.items()})
    if report.split is not None:
        lines += _section(
            "psi_splitting",
            {
                "max_branch_gap_strain": fmt_strain(report.split.max_branch_gap),
                "gap_threshold_strain": fmt_strain(report.split.gap_threshold),
                "split_detected": str(report.split.split_detected).lower(),
                "n_pairs": str(report.split.n_pairs),
            },
        )
    if report.points:
        lines.append("[tilts]")
        lines.append("psi_deg,sin2psi,two_theta_deg,two_theta_unc_deg,d_angstrom,strain,weight")
        for point, peak in zip(report.points, report.peaks):
            lines.append(
                ",".join(
                    [
                        fmt_fixed(point.psi, 3),
                        fmt_fixed(point.sin2psi, 6),
                        fmt_fixed(peak.center_two_theta, 5),
                        f"{peak.center_uncertainty:.2e}",
                        fmt_fixed(point.spacing, 6) if point.spacing is not None else "",
                        fmt_strain(point.strain),
                        f"{point.weight:.4e}",
                    ]
                )
            )
        lines.append("")
    return "\n".join(lines).encode("utf-8")


def emit_comparison(mandrel: SessionReport, free: SessionReport, result: RelaxationResult) -> bytes:
    """Two session reports followed by the release-relaxation verdict."""
    lines = ["# electroform-stress relaxation report", ""]
    lines += _section(
        "relaxation",
        {
            "verdict": result.verdict,
            "delta_mpa": fmt_stress(result.delta),
            "tolerance_mpa": fmt_stress(result.tolerance),
            "on_mandrel_sample_id": mandrel.sample_id,
            "on_mandrel_sigma_phi_mpa": fmt_stress(mandrel.stress_fit.sigma_phi),
            "free_standing_sample_id": free.sample_id,
            "free_standing_sigma_phi_mpa": fmt_stress(free.stress_fit.sigma_phi),
        },
    )
    text = "\n".join(lines)
    text += "\n# --- on mandrel ---\n" + emit_report(mandrel).decode("utf-8")
    text += "\n# --- free standing ---\n" + emit_report(free).decode("utf-8")
    return text.encode("utf-8")


# -- running a session ---------------------------------------------------------


def _load_profile(spec, session_source: str) -> tuple[bytes, DiffractionProfile]:
    try:
        blob = spec.path.read_bytes()
    except OSError as exc:
        raise FormatError(
            f"cannot read profile {spec.profile!r}: {exc.strerror}", line=spec.line, source=session_source
        ) from None
    profile = parse_profile_csv(blob, source=str(spec.path))
    if spec.psi_deg is not None:
        profile = DiffractionProfile(profile.two_theta, profile.intensity, spec.psi_deg, profile.phi)
    return blob, profile


def run_xrd_session(
    session: SessionDescriptor,
    session_bytes: bytes = b"",
    *,
    jobs: int = 1,
    timestamp: bool = True,
) -> SessionReport:
    """Fit every tilt profile, regress strain on sin²ψ and assemble the report.

    With ``jobs > 1`` the peak fits run on a thread pool; results are
    collected in session order, so the report does not depend on ``jobs``.
    """
    loaded = [_load_profile(spec, session.source) for spec in session.tilts]
    profiles = [profile for _, profile in loaded]

    def fit_one(profile: DiffractionProfile) -> PeakEstimate:
        return fit_peak(
            profile,
            session.peak_method,
            edge_fraction=session.edge_fraction,
            threshold_fraction=session.threshold_fraction,
            window=session.window,
            poisson_weights=session.poisson_weights,
        )

    def fit_checked(args):
        spec, profile = args
        try:
            return fit_one(profile)
        except FormatError:
            raise
        except StressToolkitError as exc:
            raise StressToolkitError(f"{spec.path}: {exc}") from exc

    pairs = list(zip(session.tilts, profiles))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            peaks = list(pool.map(fit_checked, pairs))
    else:
        peaks = [fit_checked(p) for p in pairs]

    xec = session.elastic_constants()
    points = build_strain_points(
        [(peak, prof.psi, prof.phi) for peak, prof in zip(peaks, profiles)],
        session.reflection,
        d0=session.d0 if session.d0_policy == "explicit" else None,
    )
    fit = fit_sin2psi(
        points,
        xec,
        phi=profiles[0].phi,
        penetration_depth_um=session.penetration_depth_um,
        measured_area_mm2=session.measured_area_mm2,
    )
    try:
        split = detect_psi_splitting(points, session.split_threshold)
    except NoPairsError:
        split = None

    d0_used = session.d0
    if session.d0_policy == "psi0":
        ref = [p.spacing for p in points if abs(p.psi) < 0.5]
        d0_used = sum(ref) / len(ref)
    settings = {
        "wavelength_angstrom": fmt_general(session.reflection.wavelength),
        "order": str(session.reflection.order),
        "hkl": session.reflection.hkl_label or "-",
        "half_s2_per_mpa": f"{xec.half_s2:.6e}",
        "s1_per_mpa": f"{xec.s1:.6e}",
        "d0_policy": session.d0_policy,
        "d0_angstrom": fmt_fixed(d0_used, 6),
        "peak_method": session.peak_method,
    }
    blobs = [("session", session_bytes)] + [
        (spec.profile, blob) for spec, (blob, _) in zip(session.tilts, loaded)
    ]
    return SessionReport(
        sample_id=session.sample_id,
        method="xrd_sin2psi",
        inputs_digest=digest_inputs(blobs),
        created_utc=utc_now() if timestamp else None,
        stress_fit=fit,
        points=points,
        peaks=peaks,
        split=split,
        settings=settings,
        metadata=dict(fit.metadata),
    )


def load_session_file(path: str | Path) -> tuple[SessionDescriptor, bytes]:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read session file: {exc.strerror}", source=str(path)) from None
    return parse_session(data, source=str(path), base_dir=path.parent), data
