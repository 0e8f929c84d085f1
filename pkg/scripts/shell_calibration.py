#!/usr/bin/env python3
"""Calibrate the frequency-shell and four-norm bounds.

Decomposes disorder ground states and random low-energy fields into
geometric frequency shells, checks the per-shell sup bounds and the
annulus kinetic-energy bound, and compares four-norm ratios against the
two explicit trial families.
"""

import argparse

from gplattice import ExperimentPlan, run_plan, write_outputs


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int, default=50)
    parser.add_argument("--l-grid", default="128,512")
    parser.add_argument("--eps-grid", default="0.5,0.1,0.02")
    parser.add_argument("--workers", type=int, default=8)
    parser.add_argument("--out", default="runs/shell_calibration.jsonl")
    args = parser.parse_args()

    plan = ExperimentPlan(
        experiment="shells",
        seed=args.seed,
        dim=1,
        l_grid=tuple(int(tok) for tok in args.l_grid.split(",")),
        schedule=(0.0,),
        samples=args.samples,
        eps_grid=tuple(float(tok) for tok in args.eps_grid.split(",")),
        workers=args.workers,
        out=args.out,
    )
    result = run_plan(plan)
    print(result.summary.table())
    for path in write_outputs(result):
        print(f"wrote {path}")
    return 1 if result.invariant_violations else 0


if __name__ == "__main__":
    raise SystemExit(main())
