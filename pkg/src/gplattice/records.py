"""Line-oriented run records.

One record per sample, one JSON object per line, floats serialized with
shortest-round-trip precision so reading a stream back reproduces every
numeric field exactly.  ``wall_time`` is bookkeeping, not payload: record
content comparisons (and the determinism guarantees) exclude it.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from typing import NamedTuple


@dataclass(frozen=True)
class RunRecord:
    """Everything one sample produced, keyed by its provenance triple.

    Experiments that skip the interacting minimization leave the GP and
    certificate fields as NaN/False; ``error`` is set (and the numeric fields
    are NaN) when a sample failed, so failures stay visible in the stream
    without polluting summaries.
    """

    master_seed: int
    l_index: int
    sample_index: int
    dim: int
    half_side: int
    coupling: float
    e0: float = math.nan
    e1: float = math.nan
    e_gp: float = math.nan
    overlap: float = math.nan
    gap: float = math.nan
    ipr: float = math.nan
    kinetic: float = math.nan
    cert_valid: bool = False
    cert_margin: float = math.nan
    pi0_norm: float = math.nan
    orth_norm: float = math.nan
    center0: tuple[int, ...] = ()
    center1: tuple[int, ...] = ()
    center_dist: int = -1
    gp_iterations: int = 0
    gp_converged: bool = False
    error: str | None = None
    wall_time: float = 0.0

    def content_dict(self) -> dict:
        """All payload fields; excludes wall time."""
        data = asdict(self)
        data.pop("wall_time")
        return data

    def content_key(self) -> tuple:
        """Hashable payload for multiset comparisons across runs."""
        data = self.content_dict()
        return tuple(
            (name, _hashable(data[name])) for name in sorted(data)
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        data = json.loads(line)
        known = {f.name for f in fields(cls)}
        missing = known - data.keys()
        if missing:
            raise ValueError(f"record is missing fields {sorted(missing)}")
        extra = data.keys() - known
        if extra:
            raise ValueError(f"record has unknown fields {sorted(extra)}")
        data["center0"] = tuple(int(c) for c in data["center0"])
        data["center1"] = tuple(int(c) for c in data["center1"])
        return cls(**data)


def _hashable(value):
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return value


class ReadResult(NamedTuple):
    records: list[RunRecord]
    bad_lines: list[tuple[int, str]]


def write_records(path, records, *, append: bool = False) -> None:
    """Write records one JSON object per line."""
    mode = "a" if append else "w"
    with open(path, mode, encoding="utf-8") as handle:
        for record in records:
            handle.write(record.to_json())
            handle.write("\n")


def read_records(path) -> ReadResult:
    """Read a record stream; malformed lines are reported, not fatal."""
    records: list[RunRecord] = []
    bad: list[tuple[int, str]] = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                records.append(RunRecord.from_json(stripped))
            except (json.JSONDecodeError, ValueError, TypeError) as exc:
                bad.append((lineno, str(exc)))
    return ReadResult(records=records, bad_lines=bad)
