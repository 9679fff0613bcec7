"""Regenerate the synthetic files under sample_data/.

    python scripts/make_sample_data.py [outdir]

Every value here is synthetic. The stress targets are chosen to look like
typical electroformed nickel but are not measured data.
"""

import sys
from pathlib import Path

from electroform_stress.formats import write_calibration_csv, write_dose_csv, write_stretch_csv
from electroform_stress.stretch import DoseSeries, StressStretchPair
from electroform_stress.strip import CalibrationTable
from electroform_stress.synthetic import write_session


def main(outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    write_session(outdir / "st57_on_mandrel", -120.0, sample_id="St57-on-mandrel-synthetic")
    write_session(outdir / "st57_free_standing", -21.0, sample_id="St57-free-standing-synthetic")

    table = CalibrationTable(((0.0, 0.0), (10.0, 2000.0), (20.0, 4100.0), (40.0, 8400.0)))
    (outdir / "calibration_synthetic.csv").write_bytes(write_calibration_csv(table))

    pairs = [
        StressStretchPair(-40.0, 95.0, "strip"),
        StressStretchPair(-30.0, 70.0, "strip"),
        StressStretchPair(-21.0, 52.0, "strip"),
        StressStretchPair(-12.0, 20.0, "strip"),
        StressStretchPair(-5.0, 18.0, "strip"),
        StressStretchPair(1.0, -4.0, "strip"),
    ]
    (outdir / "stress_stretch_synthetic.csv").write_bytes(write_stretch_csv(pairs))

    hardener = DoseSeries("hardener", tuple(zip(range(1, 8), (-5.0, -9.0, -14.0, -18.0, -25.0, -31.0, -36.0))))
    chloride = DoseSeries("nickel_chloride", tuple(zip(range(8, 13), (-36.0, -30.0, -22.0, -17.0, -10.0))))
    (outdir / "dose_hardener_synthetic.csv").write_bytes(write_dose_csv(hardener))
    (outdir / "dose_chloride_synthetic.csv").write_bytes(write_dose_csv(chloride))


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "sample_data")
