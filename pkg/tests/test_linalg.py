import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meshfree_options import Grid, ModelParams, assemble_lbie
from meshfree_options.linalg import (
    EIG_DIMENSION_CAP,
    BandedMatrix,
    ConvergenceError,
    SingularMatrixError,
    SolverConfig,
    bicgstab,
    dense_lu_solve,
    eigenvalues_dense,
)

HILBERT4_INVERSE = np.array(
    [[16, -120, 240, -140], [-120, 1200, -2700, 1680], [240, -2700, 6480, -4200], [-140, 1680, -4200, 2800]],
    dtype=float,
)


def random_banded(rng, n, p, dominance=0.0):
    a = np.zeros((n, n))
    for o in range(-p, p + 1):
        a += np.diag(rng.normal(size=n - abs(o)), o)
    a += np.diag(dominance + np.abs(a).sum(axis=1) * (dominance > 0))
    return a


def test_identity_matvec():
    v = np.arange(7.0)
    np.testing.assert_array_equal(BandedMatrix.identity(7) @ v, v)


def test_laplacian_annihilates_constants():
    n = 9
    data = np.tile([1.0, -2.0, 1.0], (n, 1))
    lap = BandedMatrix(data)
    out = lap @ np.ones(n)
    assert np.all(out[1:-1] == 0.0)
    assert out[0] == -1.0 and out[-1] == -1.0


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 30), p=st.integers(0, 4), seed=st.integers(0, 10**6))
def test_matvec_matches_dense(n, p, seed):
    rng = np.random.default_rng(seed)
    a = random_banded(rng, n, min(p, n - 1))
    band = BandedMatrix.from_dense(a, p)
    v = rng.normal(size=n)
    np.testing.assert_allclose(band @ v, a @ v, rtol=0, atol=1e-13 * max(1.0, np.abs(a).sum()))
    np.testing.assert_array_equal(band.to_dense(), a)


def test_matvec_is_linear():
    rng = np.random.default_rng(0)
    band = BandedMatrix.from_dense(random_banded(rng, 12, 2), 2)
    u, v = rng.normal(size=12), rng.normal(size=12)
    np.testing.assert_allclose(band @ (2 * u - 3 * v), 2 * (band @ u) - 3 * (band @ v), atol=1e-13)


def test_matvec_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        BandedMatrix.identity(4) @ np.ones(5)


def test_from_dense_rejects_out_of_band_entries():
    a = np.eye(5)
    a[0, 4] = 1.0
    with pytest.raises(ValueError):
        BandedMatrix.from_dense(a, 2)


def test_band_views_and_padding():
    band = BandedMatrix(np.ones((4, 3)))
    assert band.data[0, 0] == 0.0 and band.data[-1, -1] == 0.0
    assert band.bands.shape == (3, 4)
    assert band.shape == (4, 4)


def test_solve_direct_matches_dense():
    rng = np.random.default_rng(5)
    a = random_banded(rng, 15, 2, dominance=1.0)
    b = rng.normal(size=15)
    np.testing.assert_allclose(BandedMatrix.from_dense(a, 2).solve_direct(b), np.linalg.solve(a, b), atol=1e-12)


def test_bicgstab_identity_one_iteration():
    b = np.linspace(1, 2, 10)
    res = bicgstab(BandedMatrix.identity(10), b)
    assert res.iterations <= 1
    np.testing.assert_allclose(res.x, b, atol=1e-14)


def test_bicgstab_zero_rhs():
    res = bicgstab(BandedMatrix.identity(3), np.zeros(3))
    assert res.iterations == 0 and not res.x.any()


@pytest.mark.parametrize("seed", range(30))
def test_bicgstab_matches_dense_lu(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 60))
    a = random_banded(rng, n, 2, dominance=0.5)
    b = rng.normal(size=n)
    res = bicgstab(BandedMatrix.from_dense(a, 2), b, SolverConfig(tolerance=1e-12))
    exact = dense_lu_solve(a, b)
    np.testing.assert_allclose(res.x, exact, rtol=0, atol=1e-8 * max(1.0, np.abs(exact).max()))


def test_reported_residual_and_determinism():
    rng = np.random.default_rng(11)
    a = BandedMatrix.from_dense(random_banded(rng, 40, 2, dominance=0.5), 2)
    b = rng.normal(size=40)
    first = bicgstab(a, b)
    second = bicgstab(a, b)
    assert abs(first.residual - np.linalg.norm(b - a @ first.x)) <= 1e-12
    assert first.residual <= 1e-10 * np.linalg.norm(b)
    np.testing.assert_array_equal(first.x, second.x)
    assert first.iterations == second.iterations


def test_bicgstab_raises_when_iterations_exhausted():
    rng = np.random.default_rng(3)
    a = BandedMatrix.from_dense(random_banded(rng, 50, 2, dominance=0.1), 2)
    with pytest.raises(ConvergenceError) as info:
        bicgstab(a, rng.normal(size=50), SolverConfig(max_iterations=1))
    assert info.value.iterations == 1
    assert "residual" in str(info.value)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_iterations=0)


def test_bicgstab_on_collocation_system_from_zero():
    g = Grid(64)
    p = ModelParams.test_case_1()
    sys_ = assemble_lbie(g, p, 0.5 / 64)
    b = sys_.right @ np.linspace(1.0, 0.0, g.n_nodes) + sys_.boundary_vector(9.9)
    res = bicgstab(sys_.left, b, SolverConfig(tolerance=1e-13))
    np.testing.assert_allclose(res.x, dense_lu_solve(sys_.left.to_dense(), b), atol=1e-8)


def test_dense_lu_scalar():
    np.testing.assert_allclose(dense_lu_solve([[4.0]], [2.0]), [0.5])


def test_dense_lu_hilbert():
    hilbert = 1.0 / (np.arange(4)[:, None] + np.arange(4)[None, :] + 1.0)
    x = dense_lu_solve(hilbert, np.ones(4))
    np.testing.assert_allclose(x, HILBERT4_INVERSE.sum(axis=1), rtol=1e-10)
    np.testing.assert_allclose(x, [-4, 60, -180, 140], rtol=1e-10)


def test_dense_lu_needs_pivoting():
    perm = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    np.testing.assert_allclose(dense_lu_solve(perm, [1.0, 2.0, 3.0]), [3.0, 1.0, 2.0])


def test_dense_lu_singular():
    with pytest.raises(SingularMatrixError):
        dense_lu_solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0])


def test_eigenvalues_diagonal():
    np.testing.assert_allclose(np.sort(eigenvalues_dense(np.diag([3.0, -1.0, 2.0])).real), [-1, 2, 3])


def test_eigenvalues_rotation():
    eigs = eigenvalues_dense([[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_allclose(sorted(eigs, key=lambda z: z.imag), [-1j, 1j], atol=1e-14)


def test_eigenvalues_companion():
    # (x - 1)(x - 2)(x - 3) = x^3 - 6x^2 + 11x - 6
    companion = np.array([[6.0, -11.0, 6.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    eigs = np.sort(eigenvalues_dense(companion).real)
    np.testing.assert_allclose(eigs, [1.0, 2.0, 3.0], atol=1e-10)
    np.testing.assert_allclose(eigs, np.sort(np.roots([1, -6, 11, -6]).real), atol=1e-10)


def test_eigenvalues_dimension_cap():
    with pytest.raises(ValueError, match="cap"):
        eigenvalues_dense(np.eye(EIG_DIMENSION_CAP + 1))
