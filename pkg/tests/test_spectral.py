import numpy as np
import pytest

from gplattice import (
    DENSE_LIMIT,
    DisorderSpec,
    EigenConvergenceError,
    OversizeError,
    Region,
    build_lattice,
    count_eigenvalues_in,
    dense_matrix,
    dense_oracle,
    laplace_symbol,
    lowest_eigenpairs,
    periodic_hamiltonian,
    restrict_hamiltonian,
    sample_potential,
)

SPEC = DisorderSpec(distribution="uniform", v_max=1.0, master_seed=101)


def make_ham(dim, half, sample=0):
    geom = build_lattice(dim, half)
    return periodic_hamiltonian(sample_potential(SPEC, geom, 0, sample))


def test_dense_matrix_is_symmetric_with_expected_row():
    ham = make_ham(2, 3)
    mat = dense_matrix(ham)
    np.testing.assert_allclose(mat, mat.T, atol=0.0)
    i = ham.geom.site_index((0, 0))
    assert mat[i, i] == pytest.approx(4.0 + ham.potential[i])
    assert sorted(mat[i, ham.geom.neighbors[i]]) == [-1.0] * 4


def test_apply_matches_dense():
    for dim, half in [(1, 10), (2, 3), (3, 1)]:
        ham = make_ham(dim, half)
        mat = dense_matrix(ham)
        rng = np.random.default_rng(dim)
        u = rng.normal(size=ham.n_sites)
        np.testing.assert_allclose(ham.apply(u), mat @ u, atol=1e-12)
        block = rng.normal(size=(ham.n_sites, 3))
        np.testing.assert_allclose(ham.apply(block), mat @ block, atol=1e-12)


def test_iterative_matches_dense_oracle():
    for dim, half, count in [(1, 20, 4), (2, 5, 4), (3, 2, 6), (1, 64, 2)]:
        ham = make_ham(dim, half)
        ref = dense_oracle(ham)
        sol = lowest_eigenpairs(ham, count, tol=1e-10, seed=5)
        assert sol.converged
        np.testing.assert_allclose(sol.values, ref.values[:count], atol=1e-9)
        # eigenvectors agree up to sign; both solvers fix sum > 0
        for k in range(count):
            overlap = abs(sol.vectors[:, k] @ ref.vectors[:, k])
            gap_ok = (
                k + 1 < ham.n_sites
                and ref.values[k + 1] - ref.values[k] > 1e-6
            )
            if gap_ok:
                assert overlap > 1.0 - 1e-7


def test_contract_residuals_are_fresh():
    ham = make_ham(1, 50)
    sol = lowest_eigenpairs(ham, 3, tol=1e-10, seed=2)
    for k in range(3):
        res = np.linalg.norm(
            ham.apply(sol.vectors[:, k]) - sol.values[k] * sol.vectors[:, k]
        )
        assert res <= 1e-10
        assert abs(res - sol.residuals[k]) < 1e-12


def test_orthonormal_output():
    ham = make_ham(2, 4)
    sol = lowest_eigenpairs(ham, 5, tol=1e-10, seed=7)
    gram = sol.vectors.T @ sol.vectors
    np.testing.assert_allclose(gram, np.eye(5), atol=1e-10)


def test_degenerate_flat_potential_spectrum():
    # V = 0: eigenvalues are the symbol values, most of them doubly degenerate
    geom = build_lattice(1, 16)
    spec = DisorderSpec(distribution="levels", v_max=1.0, levels=(0.0,), master_seed=0)
    ham = periodic_hamiltonian(sample_potential(spec, geom, 0, 0))
    assert float(np.abs(ham.potential).max()) == 0.0
    symbol = np.sort(laplace_symbol(geom))
    sol = lowest_eigenpairs(ham, 5, tol=1e-10, seed=3)
    np.testing.assert_allclose(sol.values, symbol[:5], atol=1e-10)
    full = np.linalg.eigvalsh(dense_matrix(ham))
    np.testing.assert_allclose(full, symbol, atol=1e-10)


def test_sign_convention_nonnegative_sum():
    ham = make_ham(1, 30)
    sol = lowest_eigenpairs(ham, 4, tol=1e-10, seed=9)
    assert (sol.vectors.sum(axis=0) >= 0).all()
    ref = dense_oracle(ham)
    assert (ref.vectors.sum(axis=0) >= 0).all()


def test_budget_exhaustion_carries_best():
    ham = make_ham(2, 10)
    with pytest.raises(EigenConvergenceError) as info:
        lowest_eigenpairs(ham, 4, tol=1e-14, max_applies=40, seed=1)
    best = info.value.best
    assert best is not None
    assert not best.converged
    assert best.values.shape == (4,)
    assert np.all(np.diff(best.values) >= -1e-12)


def test_invalid_arguments():
    ham = make_ham(1, 5)
    with pytest.raises(ValueError):
        lowest_eigenpairs(ham, 0)
    with pytest.raises(ValueError):
        lowest_eigenpairs(ham, ham.n_sites + 1)
    with pytest.raises(ValueError):
        lowest_eigenpairs(ham, 2, tol=0.0)


def test_count_dense_route_closed_interval():
    ham = make_ham(1, 12)
    w = np.linalg.eigvalsh(dense_matrix(ham))
    assert count_eigenvalues_in(ham, w[2], w[5]) == 4  # endpoints included
    assert count_eigenvalues_in(ham, -10.0, w[-1]) == ham.n_sites
    assert count_eigenvalues_in(ham, w[-1] + 1e-9, 100.0) == 0


def test_count_chain_route_matches_dense():
    geom = build_lattice(1, 40)
    real = sample_potential(SPEC, geom, 0, 3)
    for bc in ("dirichlet", "neumann"):
        op = restrict_hamiltonian(real, Region(intervals=((-35, 70),), bc=bc))
        w = np.linalg.eigvalsh(dense_matrix(op))
        for lo, hi in [(0.0, 1.0), (w[0], w[0]), (w[10], w[20]), (5.0, 9.0)]:
            expect = int(((w >= lo) & (w <= hi)).sum())
            assert count_eigenvalues_in(op, lo, hi) == expect


def test_count_large_chain_uses_sturm():
    # far over the dense limit, but countable through the LDL recursion
    geom = build_lattice(1, 3000)
    real = sample_potential(SPEC, geom, 0, 4)
    op = restrict_hamiltonian(real, Region(intervals=((-2999, 5999),), bc="dirichlet"))
    assert op.n_sites > DENSE_LIMIT
    n_low = count_eigenvalues_in(op, -1.0, 0.5)
    n_all = count_eigenvalues_in(op, -1.0, 10.0)
    assert 0 < n_low < n_all == op.n_sites


def test_count_oversize_periodic_rejected():
    geom = build_lattice(1, 3000)
    ham = periodic_hamiltonian(sample_potential(SPEC, geom, 0, 5))
    with pytest.raises(OversizeError):
        count_eigenvalues_in(ham, 0.0, 1.0)


def test_dense_oracle_rejects_oversize():
    geom = build_lattice(1, 3000)
    ham = periodic_hamiltonian(sample_potential(SPEC, geom, 0, 6))
    with pytest.raises(OversizeError):
        dense_oracle(ham)


def test_spectral_bound_dominates():
    ham = make_ham(3, 1)
    w = np.linalg.eigvalsh(dense_matrix(ham))
    assert w[-1] <= ham.spectral_bound() + 1e-12
