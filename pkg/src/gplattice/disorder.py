"""Random on-site potentials and sub-box restrictions of the Hamiltonian.

Sampling is counter-based: every (master seed, L index, sample index, channel)
tuple keys its own Philox stream, so realizations are reproducible bit for bit
and independent of worker scheduling.  Channels separate the independent
random inputs of one sample (potential, eigensolver start block, ...).

Box partitions cut each axis into intervals with side lengths between l/2 and
2l, which is what makes Dirichlet/Neumann bracketing of the periodic ground
state energy work: dropping the couplings that leave a region can only lower
the quadratic form on the Neumann side, while zero-extending a region ground
state gives the Dirichlet upper bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .lattice import LatticeGeometry
from .spectral import HamiltonianOperator

DISTRIBUTIONS = ("uniform", "bernoulli", "levels")
BOUNDARY_CONDITIONS = ("periodic", "dirichlet", "neumann")

# channel ids for the per-sample random streams
POTENTIAL_CHANNEL = 0
EIG_CHANNEL = 1
GP_CHANNEL = 2
FIELD_CHANNEL = 3
BOX_CHANNEL = 4


def provenance_stream(
    master_seed: int, l_index: int, sample_index: int, channel: int
) -> np.random.Generator:
    """Philox generator keyed by the full provenance tuple."""
    if master_seed < 0:
        raise ValueError("master_seed must be non-negative")
    seq = np.random.SeedSequence(
        master_seed, spawn_key=(l_index, sample_index, channel)
    )
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class DisorderSpec:
    """Distribution of the iid on-site potential.

    ``uniform`` draws from [0, v_max], ``bernoulli`` puts mass p on v_max and
    1-p on 0, ``levels`` picks uniformly from an explicit list of values in
    [0, v_max].
    """

    distribution: str = "uniform"
    v_max: float = 1.0
    p: float = 0.5
    levels: tuple[float, ...] | None = None
    master_seed: int = 0

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(
                f"distribution must be one of {DISTRIBUTIONS}, got {self.distribution!r}"
            )
        if not self.v_max > 0:
            raise ValueError(f"v_max must be positive, got {self.v_max}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.distribution == "levels":
            if not self.levels:
                raise ValueError("levels distribution needs a non-empty level list")
            if any(v < 0 or v > self.v_max for v in self.levels):
                raise ValueError("levels must lie in [0, v_max]")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")

    def to_config(self) -> dict[str, str]:
        cfg = {
            "distribution": self.distribution,
            "v_max": repr(self.v_max),
            "seed": str(self.master_seed),
        }
        if self.distribution == "bernoulli":
            cfg["p"] = repr(self.p)
        if self.distribution == "levels":
            cfg["levels"] = ",".join(repr(v) for v in self.levels)
        return cfg

    @classmethod
    def from_config(cls, cfg: dict[str, str]) -> "DisorderSpec":
        levels = None
        if "levels" in cfg and cfg["levels"]:
            levels = tuple(float(tok) for tok in cfg["levels"].split(","))
        return cls(
            distribution=cfg.get("distribution", "uniform"),
            v_max=float(cfg.get("v_max", "1.0")),
            p=float(cfg.get("p", "0.5")),
            levels=levels,
            master_seed=int(cfg.get("seed", "0")),
        )


@dataclass(frozen=True)
class DisorderRealization:
    """One sampled potential with full provenance."""

    geom: LatticeGeometry
    potential: np.ndarray
    spec: DisorderSpec
    l_index: int
    sample_index: int


def sample_potential(
    spec: DisorderSpec,
    geom: LatticeGeometry,
    l_index: int = 0,
    sample_index: int = 0,
    channel: int = POTENTIAL_CHANNEL,
) -> DisorderRealization:
    """Draw the iid potential for one (L index, sample index) slot."""
    rng = provenance_stream(spec.master_seed, l_index, sample_index, channel)
    n = geom.n_sites
    if spec.distribution == "uniform":
        values = spec.v_max * rng.random(n)
    elif spec.distribution == "bernoulli":
        values = spec.v_max * (rng.random(n) < spec.p).astype(float)
    else:
        table = np.asarray(spec.levels, dtype=float)
        values = table[rng.integers(0, table.size, n)]
    return DisorderRealization(
        geom=geom,
        potential=values,
        spec=spec,
        l_index=l_index,
        sample_index=sample_index,
    )


@dataclass(frozen=True)
class Region:
    """Axis-aligned box: per-axis (start coordinate, length) plus boundary tag."""

    intervals: tuple[tuple[int, int], ...]
    bc: str = "dirichlet"

    def __post_init__(self):
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ValueError(f"bc must be one of {BOUNDARY_CONDITIONS}, got {self.bc!r}")
        if not self.intervals:
            raise ValueError("region needs at least one axis interval")
        for start, length in self.intervals:
            if length < 1:
                raise ValueError(f"interval length must be >= 1, got {length}")

    @property
    def dim(self) -> int:
        return len(self.intervals)

    def side_lengths(self) -> tuple[int, ...]:
        return tuple(length for _, length in self.intervals)

    def n_sites(self) -> int:
        out = 1
        for length in self.side_lengths():
            out *= length
        return out

    def with_bc(self, bc: str) -> "Region":
        return replace(self, bc=bc)

    def wraps(self, geom: LatticeGeometry) -> bool:
        """True when some axis interval runs past coordinate +L."""
        return any(
            start + length - 1 > geom.half_side for start, length in self.intervals
        )

    def site_indices(self, geom: LatticeGeometry) -> np.ndarray:
        """Flat torus indices of the region's sites, in coordinate order."""
        if self.dim != geom.dim:
            raise ValueError(f"region is {self.dim}-dimensional, lattice is {geom.dim}")
        positions = []
        for start, length in self.intervals:
            if start < -geom.half_side or start > geom.half_side:
                raise ValueError(f"interval start {start} outside the torus")
            coords = np.arange(start, start + length)
            positions.append(np.mod(coords + geom.half_side, geom.side))
        mesh = np.meshgrid(*positions, indexing="ij")
        return np.ravel_multi_index(tuple(mesh), geom.shape).ravel()


def whole_torus(geom: LatticeGeometry, bc: str = "periodic") -> Region:
    return Region(
        intervals=tuple((-geom.half_side, geom.side) for _ in range(geom.dim)),
        bc=bc,
    )


def _split_axis(side: int, half: int, box_side: int) -> list[tuple[int, int]]:
    """Cut one axis of length 2L+1 into intervals with sides in [l/2, 2l]."""
    if not 1 <= box_side <= side:
        raise ValueError(f"box side must lie in [1, {side}], got {box_side}")
    if box_side == side:
        return [(-half, side)]
    pieces_hi = max(1, (2 * half) // box_side)
    pieces_lo = -(-side // (2 * box_side))  # ceil
    pieces = min(max(round(side / box_side), pieces_lo), pieces_hi)
    pieces = max(pieces, 1)
    base, extra = divmod(side, pieces)
    lengths = [base + 1] * extra + [base] * (pieces - extra)
    out = []
    start = -half
    for length in lengths:
        out.append((start, length))
        start += length
    return out


def partition_into_boxes(
    geom: LatticeGeometry, box_side: int, bc: str = "dirichlet"
) -> list[Region]:
    """Disjoint cover of the torus by boxes with sides between l/2 and 2l."""
    axis_cuts = _split_axis(geom.side, geom.half_side, box_side)
    for _, length in axis_cuts:
        if not (box_side / 2 <= length <= 2 * box_side) and box_side != geom.side:
            raise AssertionError(
                f"axis cut of length {length} escapes [{box_side / 2}, {2 * box_side}]"
            )
    return [
        Region(intervals=combo, bc=bc)
        for combo in itertools.product(axis_cuts, repeat=geom.dim)
    ]


def restrict_hamiltonian(
    realization: DisorderRealization, region: Region
) -> HamiltonianOperator:
    """Restrict -Delta + V to a region under the region's boundary condition.

    Both restrictions drop the couplings that leave the region; Dirichlet
    keeps the diagonal 2d + V while Neumann reduces it to the in-region
    degree + V.  A periodic "restriction" must cover the whole torus.
    """
    geom = realization.geom
    if region.bc == "periodic":
        if region.n_sites() != geom.n_sites:
            raise ValueError("periodic boundary requires the whole torus")
    elif region.wraps(geom):
        raise ValueError("Dirichlet/Neumann regions must not wrap around the torus")

    sites = region.site_indices(geom)
    n = sites.size
    local = np.full(geom.n_sites, -1, dtype=np.int64)
    local[sites] = np.arange(n)

    hop = local[geom.neighbors[sites]]
    outside = hop < 0
    hop = np.where(outside, n, hop)

    if region.bc == "neumann":
        kinetic = 2.0 * geom.dim - outside.sum(axis=1)
    else:
        kinetic = np.full(n, 2.0 * geom.dim)
    pot = realization.potential[sites]

    return HamiltonianOperator(
        geom=geom,
        sites=sites,
        diag=kinetic + pot,
        hop=hop,
        potential=pot,
        bc=region.bc,
        region=region,
    )


def periodic_hamiltonian(realization: DisorderRealization) -> HamiltonianOperator:
    """-Delta + V on the full torus."""
    return restrict_hamiltonian(realization, whole_torus(realization.geom))
