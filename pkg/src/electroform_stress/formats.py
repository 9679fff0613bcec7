"""Readers and writers for the toolkit's plain-text input files.

All CSV formats share the same rules:

* ``#`` lines are comments. ``# key=value`` comments carry metadata.
* the first non-comment line must be the exact header of the format.
* numbers use ``.`` as the decimal separator whatever the process locale is.

Errors are raised as :class:`FormatError` naming the source and line.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DomainError, FormatError, MissingMetadataError, StressToolkitError
from .peakfit import PEAK_METHODS, DiffractionProfile
from .stretch import DoseSeries, StressStretchPair
from .strip import CalibrationTable
from .xrd import ElasticConstants, Reflection, xec_from_isotropic

PROFILE_HEADER = ("two_theta_deg", "intensity_counts")
CALIBRATION_HEADER = ("deflection_increments", "stress_thickness_mpa_um")
STRETCH_HEADER = ("stress_mpa", "stretch_ppm", "source")
DOSE_HEADER = ("dose_step", "stress_mpa")

_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_INTEGER = re.compile(r"[+-]?\d+")


def _decode(data: bytes | str, source: str) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"not valid UTF-8 ({exc.reason})", line=None, source=source) from None


def parse_number(text: str, line: int | None = None, source: str | None = None, what: str = "value") -> float:
    token = text.strip()
    if not _NUMBER.fullmatch(token):
        raise FormatError(f"{what} {text.strip()!r} is not a number", line=line, source=source)
    return float(token)


def format_number(value: float) -> str:
    """Shortest text that parses back to the same float."""
    value = float(value)
    if value == 0:
        return "0.0"
    return repr(value)


@dataclass
class _Table:
    rows: list[tuple[int, list[str]]]
    meta: dict[str, tuple[int, str]]
    header_line: int


def _read_table(data, source: str, header: tuple[str, ...]) -> _Table:
    text = _decode(data, source)
    if not text.strip():
        raise FormatError(f"empty file; expected header {','.join(header)!r}", line=1, source=source)
    meta: dict[str, tuple[int, str]] = {}
    rows: list[tuple[int, list[str]]] = []
    header_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = (lineno, value.strip())
            continue
        fields = next(csv.reader([line]))
        fields = [f.strip() for f in fields]
        if header_line is None:
            if tuple(fields) != header:
                raise FormatError(
                    f"expected header {','.join(header)!r}, got {line!r}", line=lineno, source=source
                )
            header_line = lineno
            continue
        if len(fields) != len(header):
            raise FormatError(
                f"expected {len(header)} fields, got {len(fields)}", line=lineno, source=source
            )
        rows.append((lineno, fields))
    if header_line is None:
        raise FormatError(f"missing header {','.join(header)!r}", line=1, source=source)
    return _Table(rows, meta, header_line)


def _meta_number(table: _Table, key: str, source: str) -> float | None:
    if key not in table.meta:
        return None
    lineno, value = table.meta[key]
    return parse_number(value, lineno, source, what=key)


# -- diffraction profiles -------------------------------------------------------


def parse_profile_csv(data: bytes | str, source: str = "<profile>") -> DiffractionProfile:
    table = _read_table(data, source, PROFILE_HEADER)
    psi = _meta_number(table, "psi_deg", source)
    if psi is None:
        raise MissingMetadataError("missing '# psi_deg=' metadata comment", line=1, source=source)
    phi = _meta_number(table, "phi_deg", source) or 0.0
    two_theta, counts = [], []
    for lineno, (tt_text, count_text) in table.rows:
        tt = parse_number(tt_text, lineno, source, "two_theta_deg")
        count = parse_number(count_text, lineno, source, "intensity_counts")
        if count < 0:
            raise FormatError(f"negative intensity {count:g}", line=lineno, source=source)
        if two_theta and tt <= two_theta[-1]:
            raise FormatError(
                f"two_theta {tt:g} does not increase (previous {two_theta[-1]:g})",
                line=lineno,
                source=source,
            )
        two_theta.append(tt)
        counts.append(count)
    last = table.rows[-1][0] if table.rows else table.header_line
    try:
        return DiffractionProfile(two_theta, counts, psi=psi, phi=phi)
    except DomainError as exc:
        raise FormatError(str(exc), line=last, source=source) from None


def write_profile_csv(profile: DiffractionProfile) -> bytes:
    out = [
        f"# psi_deg={format_number(profile.psi)}",
        f"# phi_deg={format_number(profile.phi)}",
        ",".join(PROFILE_HEADER),
    ]
    out += [
        f"{format_number(tt)},{format_number(c)}"
        for tt, c in zip(profile.two_theta, profile.intensity)
    ]
    return ("\n".join(out) + "\n").encode("utf-8")


# -- calibration tables ---------------------------------------------------------


def parse_calibration_csv(data: bytes | str, source: str = "<calibration>") -> CalibrationTable:
    table = _read_table(data, source, CALIBRATION_HEADER)
    convention = table.meta.get("sign_convention", (None, "spread_means_tensile"))[1]
    points = []
    for lineno, (d_text, st_text) in table.rows:
        d = parse_number(d_text, lineno, source, "deflection_increments")
        st = parse_number(st_text, lineno, source, "stress_thickness_mpa_um")
        if points and d <= points[-1][0]:
            raise FormatError(f"deflection {d:g} does not increase", line=lineno, source=source)
        points.append((d, st))
    try:
        return CalibrationTable(tuple(points), convention)
    except DomainError as exc:
        line = table.rows[0][0] if table.rows else table.header_line
        raise FormatError(str(exc), line=line, source=source) from None


def write_calibration_csv(table: CalibrationTable) -> bytes:
    out = [f"# sign_convention={table.sign_convention}", ",".join(CALIBRATION_HEADER)]
    out += [f"{format_number(d)},{format_number(st)}" for d, st in table.points]
    return ("\n".join(out) + "\n").encode("utf-8")


# -- stress/stretch pairs and dose series --------------------------------------


def parse_stretch_csv(data: bytes | str, source: str = "<stretch>") -> list[StressStretchPair]:
    table = _read_table(data, source, STRETCH_HEADER)
    pairs = []
    for lineno, (stress, stretch, origin) in table.rows:
        pairs.append(
            StressStretchPair(
                parse_number(stress, lineno, source, "stress_mpa"),
                parse_number(stretch, lineno, source, "stretch_ppm"),
                origin,
            )
        )
    return pairs


def write_stretch_csv(pairs) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(STRETCH_HEADER)
    for p in pairs:
        writer.writerow([format_number(p.stress), format_number(p.stretch), p.source])
    return buf.getvalue().encode("utf-8")


def parse_dose_csv(data: bytes | str, source: str = "<dose>", additive_name: str | None = None) -> DoseSeries:
    table = _read_table(data, source, DOSE_HEADER)
    name = additive_name or table.meta.get("additive", (None, ""))[1]
    obs = []
    for lineno, (step_text, stress_text) in table.rows:
        if not _INTEGER.fullmatch(step_text):
            raise FormatError(f"dose_step {step_text!r} is not an integer", line=lineno, source=source)
        step = int(step_text)
        if step < 1 or (obs and step <= obs[-1][0]):
            raise FormatError(
                f"dose_step {step} must be >= 1 and strictly increasing", line=lineno, source=source
            )
        obs.append((step, parse_number(stress_text, lineno, source, "stress_mpa")))
    return DoseSeries(name, tuple(obs))


def write_dose_csv(series: DoseSeries) -> bytes:
    out = [f"# additive={series.additive_name}", ",".join(DOSE_HEADER)]
    out += [f"{step},{format_number(stress)}" for step, stress in series.observations]
    return ("\n".join(out) + "\n").encode("utf-8")


# -- session descriptors -------------------------------------------------------

_SESSION_KEYS = {
    "sample_id": str,
    "wavelength_angstrom": float,
    "order": int,
    "hkl": str,
    "half_s2_per_mpa": float,
    "s1_per_mpa": float,
    "young_modulus_mpa": float,
    "poisson_ratio": float,
    "d0_policy": str,
    "d0_angstrom": float,
    "peak_method": str,
    "edge_fraction": float,
    "threshold_fraction": float,
    "window": int,
    "poisson_weights": bool,
    "split_threshold": float,
    "penetration_depth_um": float,
    "measured_area_mm2": float,
}
_TILT_KEYS = {"profile": str, "psi_deg": float}
_REQUIRED = ("sample_id", "wavelength_angstrom")


@dataclass(frozen=True)
class TiltSpec:
    profile: str
    path: Path
    psi_deg: float | None = None
    line: int = 0


@dataclass(frozen=True)
class SessionDescriptor:
    """A validated session file: tilts, reflection, elastic constants and fit options."""

    sample_id: str
    reflection: Reflection
    tilts: tuple[TiltSpec, ...]
    half_s2: float | None = None
    s1: float = 0.0
    young_modulus: float | None = None
    poisson_ratio: float | None = None
    d0_policy: str = "psi0"
    d0: float | None = None
    peak_method: str = "pseudo_voigt"
    edge_fraction: float = 0.1
    threshold_fraction: float = 0.1
    window: int = 7
    poisson_weights: bool = False
    split_threshold: float = 1e-5
    penetration_depth_um: float = 3.5
    measured_area_mm2: float = 0.126
    base_dir: Path = field(default_factory=Path)
    source: str = "<session>"

    def elastic_constants(self) -> ElasticConstants:
        if self.half_s2 is not None:
            return ElasticConstants(self.half_s2, self.s1)
        return xec_from_isotropic(self.young_modulus, self.poisson_ratio)


def _convert(kind, text: str, key: str, lineno: int, source: str):
    if kind is float:
        value = parse_number(text, lineno, source, key)
        if not math.isfinite(value):
            raise FormatError(f"{key} must be finite", line=lineno, source=source)
        return value
    if kind is int:
        if not _INTEGER.fullmatch(text):
            raise FormatError(f"{key} {text!r} is not an integer", line=lineno, source=source)
        return int(text)
    if kind is bool:
        lowered = text.lower()
        if lowered not in ("true", "false", "yes", "no", "1", "0"):
            raise FormatError(f"{key} {text!r} is not a boolean", line=lineno, source=source)
        return lowered in ("true", "yes", "1")
    if not text:
        raise FormatError(f"{key} must not be empty", line=lineno, source=source)
    return text


def parse_session(
    data: bytes | str,
    source: str = "<session>",
    base_dir: str | Path | None = None,
) -> SessionDescriptor:
    """Parse a sectioned ``key = value`` session file.

    Global keys come first. Each ``[tilt]`` section names one profile CSV.
    Relative profile paths resolve against ``base_dir``, which is normally
    the session file's directory.
    """
    text = _decode(data, source)
    base = Path(base_dir) if base_dir is not None else Path(".")
    values: dict[str, tuple[int, object]] = {}
    tilts: list[dict[str, tuple[int, object]]] = []
    current = values
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line != "[tilt]":
                raise FormatError(f"unknown section {line!r}; only [tilt] is allowed", line=lineno, source=source)
            current = {"__line__": (lineno, lineno)}
            tilts.append(current)
            continue
        if "=" not in line:
            raise FormatError(f"expected 'key = value', got {line!r}", line=lineno, source=source)
        key, _, value = (part.strip() for part in line.partition("="))
        allowed = _SESSION_KEYS if current is values else _TILT_KEYS
        if key not in allowed:
            where = "global" if current is values else "[tilt]"
            raise FormatError(f"unknown {where} key {key!r}", line=lineno, source=source)
        if key in current:
            raise FormatError(f"duplicate key {key!r}", line=lineno, source=source)
        current[key] = (lineno, _convert(allowed[key], value, key, lineno, source))

    for key in _REQUIRED:
        if key not in values:
            raise FormatError(f"missing required key {key!r}", line=None, source=source)

    def get(key, default=None):
        return values[key][1] if key in values else default

    def line_of(key):
        return values[key][0] if key in values else None

    has_xec = "half_s2_per_mpa" in values
    has_iso = "young_modulus_mpa" in values or "poisson_ratio" in values
    if has_xec == has_iso:
        raise FormatError(
            "give either half_s2_per_mpa (and optionally s1_per_mpa) or "
            "young_modulus_mpa + poisson_ratio",
            line=None,
            source=source,
        )
    if has_iso and not ("young_modulus_mpa" in values and "poisson_ratio" in values):
        raise FormatError("young_modulus_mpa and poisson_ratio must be given together", source=source)
    if "s1_per_mpa" in values and not has_xec:
        raise FormatError("s1_per_mpa requires half_s2_per_mpa", line=line_of("s1_per_mpa"), source=source)

    policy = get("d0_policy", "explicit" if "d0_angstrom" in values else "psi0")
    if policy not in ("psi0", "explicit"):
        raise FormatError(f"d0_policy must be 'psi0' or 'explicit', got {policy!r}", line=line_of("d0_policy"), source=source)
    if policy == "explicit" and "d0_angstrom" not in values:
        raise FormatError("d0_policy 'explicit' requires d0_angstrom", line=line_of("d0_policy"), source=source)
    if policy == "psi0" and "d0_angstrom" in values:
        raise FormatError("d0_angstrom conflicts with d0_policy 'psi0'", line=line_of("d0_angstrom"), source=source)
    method = get("peak_method", "pseudo_voigt")
    if method not in PEAK_METHODS:
        raise FormatError(f"peak_method must be one of {PEAK_METHODS}, got {method!r}", line=line_of("peak_method"), source=source)
    if not tilts:
        raise FormatError("session lists no [tilt] sections", line=None, source=source)

    specs = []
    for tilt in tilts:
        section_line = tilt["__line__"][0]
        if "profile" not in tilt:
            raise FormatError("[tilt] section without a 'profile' key", line=section_line, source=source)
        rel = tilt["profile"][1]
        psi = tilt["psi_deg"][1] if "psi_deg" in tilt else None
        specs.append(TiltSpec(profile=rel, path=base / rel, psi_deg=psi, line=section_line))

    try:
        reflection = Reflection(get("wavelength_angstrom"), get("order", 1), get("hkl", ""))
        descriptor = SessionDescriptor(
            sample_id=get("sample_id"),
            reflection=reflection,
            tilts=tuple(specs),
            half_s2=get("half_s2_per_mpa"),
            s1=get("s1_per_mpa", 0.0),
            young_modulus=get("young_modulus_mpa"),
            poisson_ratio=get("poisson_ratio"),
            d0_policy=policy,
            d0=get("d0_angstrom"),
            peak_method=method,
            edge_fraction=get("edge_fraction", 0.1),
            threshold_fraction=get("threshold_fraction", 0.1),
            window=get("window", 7),
            poisson_weights=get("poisson_weights", False),
            split_threshold=get("split_threshold", 1e-5),
            penetration_depth_um=get("penetration_depth_um", 3.5),
            measured_area_mm2=get("measured_area_mm2", 0.126),
            base_dir=base,
            source=source,
        )
        descriptor.elastic_constants()
    except StressToolkitError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(exc), line=None, source=source) from None
    return descriptor
