"""Command line front end.

One subcommand per experiment kind.  Options come from an optional key=value
config file plus flags; flags win.  A master seed is mandatory so no run is
ever silently irreproducible.

Outputs, when --out is given: the records file itself (one JSON object per
line), a plain-text summary next to it, and one whitespace-delimited .dat
file per summary series, all sharing the records file's stem.

Exit status is 0 only when every record satisfied the built-in invariants.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .disorder import DISTRIBUTIONS
from .ensemble import (
    EXPERIMENTS,
    ExperimentResult,
    parse_config_text,
    plan_from_options,
    run_plan,
)
from .records import write_records

_EXPERIMENT_HELP = {
    "condense": "ground state, interacting minimizer, and certificate per sample",
    "spectrum": "low-lying eigenvalues, gaps, and localization centers",
    "scaling": "ground-state energy against L, normalized by (log L)^(2/d)",
    "estimates": "Wegner / Minami / Lifshitz / gap-law Monte Carlo estimators",
    "shells": "frequency-shell bounds and four-norm calibration",
}

# plan fields that can be set from the command line; values are kept as
# strings and merged with the config file before typed parsing
_FLAG_KEYS = (
    "seed",
    "dim",
    "l_grid",
    "schedule",
    "c",
    "samples",
    "out",
    "tol_eig",
    "tol_gp",
    "distribution",
    "v_max",
    "p",
    "levels",
    "workers",
    "eig_count",
)


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config", help="key=value file; command line flags override its entries"
    )
    parser.add_argument(
        "--seed", type=int, help="master seed (required here or in the config)"
    )
    parser.add_argument("--dim", type=int, help="lattice dimension (1, 2, or 3)")
    parser.add_argument(
        "--l-grid",
        dest="l_grid",
        help="comma separated half-sides, e.g. 64,128,256,512",
    )
    parser.add_argument(
        "--schedule",
        help="'theorem' for the built-in coupling schedule, or comma "
        "separated couplings (one value, or one per L)",
    )
    parser.add_argument(
        "--c", type=float, help="prefactor of the built-in coupling schedule"
    )
    parser.add_argument("--samples", type=int, help="disorder samples per L")
    parser.add_argument(
        "--out", help="records file (JSON lines); sidecar files share its stem"
    )
    parser.add_argument("--tol-eig", dest="tol_eig", type=float)
    parser.add_argument("--tol-gp", dest="tol_gp", type=float)
    parser.add_argument("--distribution", choices=DISTRIBUTIONS)
    parser.add_argument("--v-max", dest="v_max", type=float)
    parser.add_argument("--p", type=float, help="bernoulli on-probability")
    parser.add_argument("--levels", help="comma separated level values")
    parser.add_argument("--workers", type=int, help="worker processes (default 1)")
    parser.add_argument("--eig-count", dest="eig_count", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gplattice",
        description="ensemble experiments for a discrete random Schroedinger "
        "operator with a weak on-site interaction",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        child = sub.add_parser(name, help=_EXPERIMENT_HELP[name])
        _add_common_options(child)
    return parser


def _merge_options(args: argparse.Namespace) -> dict[str, str]:
    options: dict[str, str] = {}
    if args.config:
        options.update(parse_config_text(Path(args.config).read_text()))
    for key in _FLAG_KEYS:
        value = getattr(args, key)
        if value is not None:
            options[key] = str(value)
    options["experiment"] = args.experiment
    return options


def _write_series(path: Path, header: list[str], rows: list[list[float]]) -> None:
    lines = ["# " + " ".join(header)]
    for row in rows:
        lines.append(" ".join(f"{float(v):.17g}" for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_outputs(result: ExperimentResult) -> list[Path]:
    """Write records, summary text, and series files; returns written paths."""
    out = result.plan.out
    if out is None:
        return []
    records_path = Path(out)
    records_path.parent.mkdir(parents=True, exist_ok=True)
    write_records(records_path, result.records)
    written = [records_path]
    stem = records_path.with_suffix("") if records_path.suffix else records_path
    summary_path = Path(f"{stem}.summary.txt")
    summary_path.write_text(result.summary.table() + "\n")
    written.append(summary_path)
    for name, (header, rows) in result.summary.series().items():
        series_path = Path(f"{stem}.{name}.dat")
        _write_series(series_path, header, rows)
        written.append(series_path)
    return written


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        plan = plan_from_options(_merge_options(args))
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result = run_plan(plan)
    print(result.summary.table())
    for path in write_outputs(result):
        print(f"wrote {path}")
    if result.invariant_violations:
        for message in result.invariant_violations:
            print(f"invariant violation: {message}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
