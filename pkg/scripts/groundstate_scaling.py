#!/usr/bin/env python3
"""Ground-state energy scaling with system size.

Collects the non-interacting ground energy over a grid of half-sides and
checks that the medians, normalized by (log L)^(2/d), stay in a flat band.
"""

import argparse

from gplattice import ExperimentPlan, run_plan, write_outputs


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dim", type=int, default=1)
    parser.add_argument("--samples", type=int, default=200)
    parser.add_argument("--l-grid", default="32,64,128,256,512")
    parser.add_argument("--workers", type=int, default=8)
    parser.add_argument("--out", default="runs/groundstate_scaling.jsonl")
    args = parser.parse_args()

    plan = ExperimentPlan(
        experiment="scaling",
        seed=args.seed,
        dim=args.dim,
        l_grid=tuple(int(tok) for tok in args.l_grid.split(",")),
        schedule=(0.0,),
        samples=args.samples,
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
