"""Residual stress toolkit for electroformed nickel.

Covers sin²ψ X-ray stress evaluation, deposit stress analyzer strips,
stress/stretch correlation and additive dosing trends.
"""

__version__ = "0.1.0"

from .errors import StressToolkitError
from .xrd import (
    ElasticConstants,
    Reflection,
    bragg_angle,
    lattice_spacing,
    strain_from_spacing,
    xec_from_isotropic,
)
from .peakfit import (
    DiffractionProfile,
    PeakEstimate,
    fit_peak,
    fit_peak_centroid,
    fit_peak_parabolic,
    fit_peak_pseudo_voigt,
    subtract_background,
)
from .sin2psi import (
    RelaxationResult,
    SplitReport,
    StressFit,
    TiltMeasurement,
    build_strain_points,
    detect_psi_splitting,
    fit_sin2psi,
    relaxation_check,
)
from .strip import (
    CalibrationTable,
    StripReading,
    calibrate,
    stress_from_deflection,
)
from .stretch import (
    DoseSeries,
    LinearModel,
    StressStretchPair,
    TrendReport,
    additive_trend,
    fit_stress_stretch,
    predict_stretch,
)
from .formats import (
    parse_calibration_csv,
    parse_dose_csv,
    parse_profile_csv,
    parse_session,
    parse_stretch_csv,
)
from .report import emit_comparison, emit_report, load_session_file, run_xrd_session
from .plots import emit_svg_scatter

__all__ = [
    "__version__",
    "StressToolkitError",
    "ElasticConstants",
    "Reflection",
    "bragg_angle",
    "lattice_spacing",
    "strain_from_spacing",
    "xec_from_isotropic",
    "DiffractionProfile",
    "PeakEstimate",
    "fit_peak",
    "fit_peak_centroid",
    "fit_peak_parabolic",
    "fit_peak_pseudo_voigt",
    "subtract_background",
    "RelaxationResult",
    "SplitReport",
    "StressFit",
    "TiltMeasurement",
    "build_strain_points",
    "detect_psi_splitting",
    "fit_sin2psi",
    "relaxation_check",
    "CalibrationTable",
    "StripReading",
    "calibrate",
    "stress_from_deflection",
    "DoseSeries",
    "LinearModel",
    "StressStretchPair",
    "TrendReport",
    "additive_trend",
    "fit_stress_stretch",
    "predict_stretch",
    "parse_calibration_csv",
    "parse_dose_csv",
    "parse_profile_csv",
    "parse_session",
    "parse_stretch_csv",
    "emit_comparison",
    "emit_report",
    "load_session_file",
    "run_xrd_session",
    "emit_svg_scatter",
]
