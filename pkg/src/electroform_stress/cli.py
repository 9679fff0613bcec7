"""Command-line entry point: ``efstress <subcommand> ...``.

Exit codes: 0 success, 1 internal error, 2 usage or input validation error.
Results go to stdout (or ``--out`` files); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from pathlib import Path

from . import __version__
from .errors import FormatError, StressToolkitError
from .formats import parse_calibration_csv, parse_dose_csv, parse_profile_csv, parse_stretch_csv
from .peakfit import PEAK_METHODS, fit_peak
from .plots import emit_svg_scatter
from .report import (
    SessionReport,
    digest_inputs,
    emit_comparison,
    emit_report,
    fmt_general,
    fmt_stress,
    load_session_file,
    run_xrd_session,
    utc_now,
)
from .sin2psi import relaxation_check
from .stretch import additive_trend, fit_stress_stretch, predict_stretch
from .strip import BEND_DIRECTIONS, StripReading, stress_from_deflection


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read file: {exc.strerror}", source=path) from None


def _deliver(data: bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(data)
        print(out)
    else:
        sys.stdout.write(data.decode("utf-8"))


def _kv(items: dict[str, str]) -> bytes:
    return "".join(f"{k} = {items[k]}\n" for k in sorted(items)).encode("utf-8")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


# -- subcommands ---------------------------------------------------------------


def cmd_fit_peak(args) -> int:
    profile = parse_profile_csv(_read(args.profile), source=args.profile)
    est = fit_peak(
        profile,
        args.method,
        edge_fraction=args.edge_fraction,
        threshold_fraction=args.threshold,
        window=args.window,
        poisson_weights=args.poisson_weights,
    )
    items = {
        "method": est.method_tag,
        "psi_deg": fmt_general(profile.psi),
        "phi_deg": fmt_general(profile.phi),
        "center_two_theta_deg": f"{est.center_two_theta:.5f}",
        "center_uncertainty_deg": f"{est.center_uncertainty:.2e}",
        "height_counts": f"{est.height:.1f}",
    }
    if est.fwhm > 0:
        items["fwhm_deg"] = f"{est.fwhm:.5f}"
    if "eta" in est.extra:
        items["eta"] = f"{est.extra['eta']:.4f}"
    _deliver(_kv(items), args.out)
    return 0


def cmd_sin2psi(args) -> int:
    session, raw = load_session_file(args.session)
    report = run_xrd_session(session, raw, jobs=args.jobs, timestamp=not args.no_timestamp)
    _deliver(emit_report(report), args.out)
    if args.plot:
        fit = report.stress_fit
        half_s2 = float(report.settings["half_s2_per_mpa"])
        svg = emit_svg_scatter(
            [(p.sin2psi, p.strain) for p in report.points],
            line=(fit.sigma_phi * half_s2, fit.intercept),
            x_label="sin²ψ",
            y_label="lattice strain ε",
            title=f"{report.sample_id}: σφ = {fmt_stress(fit.sigma_phi)} MPa",
        )
        Path(args.plot).write_bytes(svg)
        print(args.plot)
    return 0


def cmd_strip(args) -> int:
    raw = _read(args.calibration)
    table = parse_calibration_csv(raw, source=args.calibration)
    reading = StripReading(args.deflection, args.thickness, args.bend)
    stress = stress_from_deflection(reading, table)
    report = SessionReport(
        sample_id=args.sample_id,
        method="strip_analyzer",
        inputs_digest=digest_inputs([("calibration", raw)]),
        created_utc=None if args.no_timestamp else utc_now(),
        strip_reading=reading,
        strip_stress=stress,
        settings={"sign_convention": table.sign_convention},
    )
    _deliver(emit_report(report), args.out)
    return 0


def cmd_stretch_fit(args) -> int:
    pairs = parse_stretch_csv(_read(args.pairs), source=args.pairs)
    model = fit_stress_stretch(pairs)
    items = {
        "slope_ppm_per_mpa": f"{model.slope:.6g}",
        "intercept_ppm": f"{model.intercept:.6g}",
        "r_squared": f"{model.r_squared:.4f}",
        "n": str(model.n),
        "expected_slope_sign": "negative",
    }
    for i, stress in enumerate(args.predict or []):
        items[f"predict_{i}"] = f"{fmt_stress(stress)} MPa -> {predict_stretch(model, stress):.1f} ppm"
    _deliver(_kv(items), args.out)
    if args.plot:
        svg = emit_svg_scatter(
            [(p.stress, p.stretch) for p in pairs],
            line=(model.slope, model.intercept),
            x_label="internal stress (MPa)",
            y_label="stretch (ppm)",
            title=f"R² = {model.r_squared:.4f}",
        )
        Path(args.plot).write_bytes(svg)
        print(args.plot)
    return 0


def cmd_trend(args) -> int:
    series = parse_dose_csv(_read(args.series), source=args.series, additive_name=args.additive)
    trend = additive_trend(series, threshold=args.threshold)
    items = {
        "additive": trend.additive_name or "-",
        "direction": trend.direction,
        "spearman_rho": f"{trend.spearman_rho:.4f}",
        "slope_sign": str(trend.slope_sign),
        "threshold": f"{trend.threshold:g}",
        "n": str(trend.n),
    }
    _deliver(_kv(items), args.out)
    return 0


def cmd_report(args) -> int:
    timestamp = not args.no_timestamp
    s_mandrel, raw_mandrel = load_session_file(args.mandrel)
    s_free, raw_free = load_session_file(args.free)
    mandrel = run_xrd_session(s_mandrel, raw_mandrel, jobs=args.jobs, timestamp=timestamp)
    free = run_xrd_session(s_free, raw_free, jobs=args.jobs, timestamp=timestamp)
    result = relaxation_check(mandrel.stress_fit, free.stress_fit)
    _deliver(emit_comparison(mandrel, free, result), args.out)
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="efstress",
        description="Residual stress of electroformed deposits: sin²ψ XRD, strip analyzer, stretch and additive trends.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("fit-peak", help="locate the 2θ peak of one profile CSV")
    p.add_argument("profile")
    p.add_argument("--method", choices=PEAK_METHODS, default="pseudo_voigt")
    p.add_argument("--edge-fraction", type=float, default=0.1)
    p.add_argument("--threshold", type=float, default=0.1, help="centroid threshold fraction")
    p.add_argument("--window", type=int, default=7, help="parabolic window (odd)")
    p.add_argument("--poisson-weights", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit_peak)

    p = sub.add_parser("sin2psi", help="evaluate a tilt-series session")
    p.add_argument("--session", required=True)
    p.add_argument("--out")
    p.add_argument("--plot", help="write strain vs sin²ψ SVG here")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_sin2psi)

    p = sub.add_parser("strip", help="stress from a deposit stress analyzer reading")
    p.add_argument("--deflection", type=float, required=True)
    p.add_argument("--thickness", type=float, required=True, help="deposit thickness in µm")
    p.add_argument("--calibration", required=True)
    p.add_argument("--bend", choices=BEND_DIRECTIONS, default="toward_deposit")
    p.add_argument("--sample-id", default="strip")
    p.add_argument("--out")
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_strip)

    p = sub.add_parser("stretch-fit", help="linear fit of stretch (ppm) on stress (MPa)")
    p.add_argument("pairs")
    p.add_argument("--predict", type=float, action="append", metavar="STRESS")
    p.add_argument("--plot")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stretch_fit)

    p = sub.add_parser("trend", help="rank trend of stress over additive dose steps")
    p.add_argument("series")
    p.add_argument("--additive")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_trend)

    p = sub.add_parser("report", help="compare on-mandrel and free-standing sessions")
    p.add_argument("--mandrel", required=True)
    p.add_argument("--free", required=True)
    p.add_argument("--out")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except StressToolkitError as exc:
        print(f"efstress {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"efstress {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc(file=sys.stderr)
        print(f"efstress {args.command}: internal error", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
