"""Gross-Pitaevskii energy on the unit sphere and its minimizer.

The functional is E[phi] = <H phi, phi> + U sum_x phi(x)^4 with U >= 0,
minimized over real unit vectors.  Minimization is projected gradient
descent on the sphere with Armijo backtracking on the ambient energy; each
trial iterate is replaced by its entrywise modulus (which never raises the
energy) and renormalized, so iterates stay nonnegative and the energy trace
is monotone.  The default initial point is the single-particle ground state,
which makes the zero-coupling problem converge immediately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import EigenSolution, HamiltonianOperator, lowest_eigenpairs

GAP_TIE_TOL = 1e-12


@dataclass(frozen=True)
class GPProblem:
    """Periodic lattice Hamiltonian plus a repulsive on-site coupling U >= 0."""

    hamiltonian: HamiltonianOperator
    coupling: float

    def __post_init__(self):
        if self.coupling < 0:
            raise ValueError(f"coupling must be >= 0, got {self.coupling}")
        if self.hamiltonian.bc != "periodic":
            raise ValueError("the interacting problem is posed on the periodic torus")


def gp_energy(problem: GPProblem, phi: np.ndarray) -> float:
    """Ambient energy <H phi, phi> + U ||phi||_4^4."""
    phi = np.asarray(phi, dtype=float)
    hphi = problem.hamiltonian.apply(phi)
    return float(phi @ hphi + problem.coupling * np.sum(phi**4))


def gp_gradient(problem: GPProblem, phi: np.ndarray) -> np.ndarray:
    """Ambient gradient 2 H phi + 4 U phi^3."""
    phi = np.asarray(phi, dtype=float)
    return 2.0 * problem.hamiltonian.apply(phi) + 4.0 * problem.coupling * phi**3


@dataclass
class GPResult:
    """Minimizer, final energy, and the monotone energy trace."""

    phi: np.ndarray
    energy: float
    trace: np.ndarray
    grad_norm: float
    iterations: int
    converged: bool


def minimize_gp(
    problem: GPProblem,
    init: np.ndarray | None = None,
    *,
    g_tol: float = 1e-9,
    e_tol: float = 1e-12,
    max_iter: int = 200_000,
    eig_tol: float = 1e-10,
    seed=0,
) -> GPResult:
    """Minimize the energy over the unit sphere by projected gradient descent.

    Convergence requires the sphere-projected gradient norm to fall below
    ``g_tol`` with the relative energy decrease below ``e_tol``.
    """
    h = problem.hamiltonian
    coupling = problem.coupling
    if init is None:
        init = lowest_eigenpairs(h, 1, tol=eig_tol, seed=seed).vectors[:, 0]
    phi = np.abs(np.asarray(init, dtype=float))
    norm = np.linalg.norm(phi)
    if norm == 0:
        raise ValueError("initial field must be nonzero")
    phi = phi / norm

    energy = gp_energy(problem, phi)
    trace = [energy]
    vmax = float(h.potential.max(initial=0.0))
    step = 1.0 / (
        2.0 * (4.0 * h.geom.dim + vmax) + 12.0 * coupling * float(np.max(phi**2))
    )
    # largest step that is stable for any unit iterate (||phi||_inf <= 1);
    # near the floor, energy differences drop below one ulp and the Armijo
    # test turns into noise, so sub-noise moves at this step are accepted
    step_safe = 1.0 / (2.0 * (4.0 * h.geom.dim + vmax) + 12.0 * coupling)
    noise_floor = 8.0 * np.finfo(float).eps

    grad_norm = np.inf
    iterations = 0
    converged = False
    last_drop = np.inf

    for iterations in range(max_iter + 1):
        grad = gp_gradient(problem, phi)
        tangent = grad - (grad @ phi) * phi
        grad_norm = float(np.linalg.norm(tangent))
        if grad_norm <= g_tol and (iterations == 0 or last_drop <= e_tol):
            converged = True
            break

        trial = step
        accepted = False
        for _ in range(70):
            cand = np.abs(phi - trial * tangent)
            cnorm = np.linalg.norm(cand)
            if cnorm > 0:
                cand = cand / cnorm
                cand_energy = gp_energy(problem, cand)
                if cand_energy <= energy - 1e-4 * trial * grad_norm**2:
                    accepted = True
                    break
                if trial <= step_safe and cand_energy <= energy + noise_floor * max(
                    abs(energy), 1.0
                ):
                    cand_energy = min(cand_energy, energy)
                    accepted = True
                    break
            trial *= 0.5
        if not accepted:
            # descent has hit machine precision
            converged = grad_norm <= g_tol
            break

        last_drop = (energy - cand_energy) / max(abs(energy), 1e-300)
        phi, energy = cand, cand_energy
        trace.append(energy)
        step = min(max(trial * 2.0, step_safe), 1e6)

    return GPResult(
        phi=phi,
        energy=energy,
        trace=np.asarray(trace),
        grad_norm=grad_norm,
        iterations=iterations,
        converged=converged,
    )


@dataclass(frozen=True)
class CondensationCertificate:
    """Spectral-projection check that the minimizer sits on the ground state.

    With pi0 the rank-one projector onto the ground state, a valid
    certificate asserts (e1 - e_gp) * ||(1-pi0) phi|| <= (e_gp - e0) * ||pi0 phi||;
    ``margin`` is right side minus left side.  The flag is False when the GP
    energy reaches e1 or the spectral gap is below resolution, in which case
    the inequality says nothing.
    """

    e0: float
    e1: float
    e_gp: float
    pi0_norm: float
    orth_norm: float
    overlap: float
    valid: bool
    margin: float


def certificate(
    problem: GPProblem, eig: EigenSolution, gp: GPResult
) -> CondensationCertificate:
    """Evaluate the ground-state projection bound for a finished minimization."""
    if eig.values.size < 2:
        raise ValueError("certificate needs the two lowest eigenpairs")
    phi0 = eig.vectors[:, 0]
    e0 = float(eig.values[0])
    e1 = float(eig.values[1])
    e_gp = float(gp.energy)

    coeff = float(phi0 @ gp.phi)
    ortho = gp.phi - coeff * phi0
    pi0_norm = abs(coeff)
    orth_norm = float(np.linalg.norm(ortho))

    valid = e1 > e_gp and (e1 - e0) >= GAP_TIE_TOL
    margin = (e_gp - e0) * pi0_norm - (e1 - e_gp) * orth_norm
    return CondensationCertificate(
        e0=e0,
        e1=e1,
        e_gp=e_gp,
        pi0_norm=pi0_norm,
        orth_norm=orth_norm,
        overlap=pi0_norm,
        valid=valid,
        margin=margin,
    )
