#!/usr/bin/env python3
"""Forward-simulate synthetic observations, invert, and score the round trip.

With no arguments this runs all three reconstruction pipelines from the
sample configs: drive recovery from a point trace, amplitude recovery from a
final-time snapshot, and the combined problem with a re-simulation check.
"""

import argparse
import pathlib
import sys

from oscinv.config import load_config
from oscinv.harness import emit_report, run_roundtrip

HERE = pathlib.Path(__file__).resolve().parent
CONFIGS = {
    1: HERE.parent / "configs" / "roundtrip_drive.json",
    2: HERE.parent / "configs" / "roundtrip_amplitude.json",
    3: HERE.parent / "configs" / "roundtrip_combined.json",
}


def run_one(which, config_path):
    cfg = load_config(config_path)
    report = run_roundtrip(cfg, which)
    print(f"== round trip {which} ({pathlib.Path(config_path).name}) ==")
    for crit in report.criteria:
        status = "PASS" if crit.passed else "FAIL"
        print(f"  {status} {crit.name}: {crit.value:.6g} "
              f"(threshold {crit.threshold:.6g}, {crit.op})")
    adm = report.meta.get("admissibility")
    if adm is not None:
        print(f"  admissibility passed={adm['passed']}")
    if report.meta.get("phi0_consistency") is not None:
        print(f"  phi0 consistency {report.meta['phi0_consistency']:.3e}")
    out = pathlib.Path(cfg.output.dir)
    path = emit_report(report, out / f"{cfg.output.prefix}_roundtrip{which}.json")
    print(f"  wrote {path}")
    return report.passed


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--which", type=int, choices=(1, 2, 3),
                    help="run a single pipeline instead of all three")
    ap.add_argument("--config", help="override the sample config")
    args = ap.parse_args(argv)

    targets = [args.which] if args.which else [1, 2, 3]
    ok = True
    for which in targets:
        path = args.config if args.config else CONFIGS[which]
        ok = run_one(which, path) and ok
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
