#!/usr/bin/env python3
"""Frequency sweep: measure how fast the two-scale expansion error decays.

Runs the direct solver against the order-0 and order-2 expansions over the
omega list in the config, prints the residual table with fitted log-log
slopes, and writes the report next to the config's output settings.
"""

import argparse
import pathlib
import sys

from oscinv.config import load_config
from oscinv.harness import emit_report, run_order_study

HERE = pathlib.Path(__file__).resolve().parent
DEFAULT_CONFIG = HERE.parent / "configs" / "order_study.json"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(DEFAULT_CONFIG))
    args = ap.parse_args(argv)

    cfg = load_config(args.config)
    report = run_order_study(cfg)

    print(f"{'omega':>8}  {'residual order 0':>18}  {'residual order 2':>18}")
    for w, r0n, r2n, *_ in report.rows:
        print(f"{w:8g}  {r0n:18.6e}  {r2n:18.6e}")
    if report.rows:
        _, _, _, s0, s2 = report.rows[0]
        print(f"fitted slopes: order 0 {s0:.3f}, order 2 {s2:.3f}")
    for crit in report.criteria:
        status = "PASS" if crit.passed else "FAIL"
        print(f"{status} {crit.name}: {crit.value:.6g} "
              f"(threshold {crit.threshold:.6g}, {crit.op})")

    out = pathlib.Path(cfg.output.dir)
    emit_report(report, out / f"{cfg.output.prefix}_order_study.csv")
    emit_report(report, out / f"{cfg.output.prefix}_order_study.json")
    print(f"wrote {cfg.output.prefix}_order_study.{{csv,json}} in {out}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
