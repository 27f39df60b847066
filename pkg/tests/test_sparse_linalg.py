import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from hypothesis import given, settings
from hypothesis import strategies as st

from mhfem import get_example
from mhfem.solver import build_mode_system
from mhfem.sparse_linalg import (
    BlockSystem,
    NotSPDError,
    Preconditioner,
    dense_solve,
    inner_solve,
    is_symmetric,
    minres_solve,
    spmv,
)


def _mode_system(mesh, mats, k, lam=0.1):
    ex = get_example(1)
    spec = ex.spec(8)
    if lam != spec.lam:
        from mhfem import ProblemSpec
        spec = ProblemSpec(ex.desired_state, lam, ex.T, 8)
    system = build_mode_system(spec, mats, k, spec.desired_state.load(mesh, k))
    pc = Preconditioner.for_mode(mats.M, mats.M_sigma, mats.K_nu, lam, k, spec.omega)
    return system, pc


def test_spmv_basics(rng):
    x = rng.standard_normal(10)
    assert np.array_equal(spmv(sp.identity(10, format="csr"), x), x)
    assert np.array_equal(spmv(sp.csr_matrix((10, 10)), x), np.zeros(10))
    A = rng.standard_normal((10, 10))
    y = spmv(sp.csr_matrix(A), x)
    assert np.linalg.norm(y - A @ x) <= 1e-14 * np.linalg.norm(A @ x)
    with pytest.raises(ValueError):
        spmv(sp.identity(3, format="csr"), x)


def test_identity_system_one_iteration(rng):
    b = rng.standard_normal(7)
    res = minres_solve((sp.identity(7, format="csr"), b), tol=1e-12)
    assert res.iterations == 1
    assert np.allclose(res.x, b)


@pytest.mark.parametrize("k", [0, 1, 2, 3, 4])
def test_minres_matches_dense_oracle(mesh4, mats4, k):
    system, pc = _mode_system(mesh4, mats4, k)
    res = minres_solve(system, pc, tol=1e-12)
    ref = dense_solve(system)
    assert res.converged
    assert np.linalg.norm(res.x - ref) <= 1e-8 * np.linalg.norm(ref)


def test_minres_agrees_with_scipy(mesh4, mats4):
    system, pc = _mode_system(mesh4, mats4, 2)
    ours = minres_solve(system, pc, tol=1e-12).x
    P = spla.LinearOperator(system.matrix.shape, matvec=pc.apply)
    theirs, info = spla.minres(system.matrix, system.rhs, M=P, rtol=1e-13, maxiter=500)
    assert info == 0
    assert np.linalg.norm(ours - theirs) <= 1e-8 * np.linalg.norm(theirs)


@pytest.mark.parametrize("k", [0, 1, 5])
def test_block_system_symmetric_indefinite(mesh4, mats4, rng, k):
    system, _ = _mode_system(mesh4, mats4, k)
    A = system.matrix
    assert system.n_blocks == (2 if k == 0 else 4)
    x, y = rng.standard_normal((2, A.shape[0]))
    assert abs(y @ (A @ x) - x @ (A @ y)) <= 1e-12 * np.linalg.norm(A @ x) * np.linalg.norm(y)
    ev = np.linalg.eigvalsh(A.toarray())
    assert ev.min() < 0 < ev.max()


def test_residual_history_nonincreasing(mesh8):
    from mhfem.assembly import assemble
    mats = assemble(mesh8)
    for k in (0, 3):
        system, pc = _mode_system(mesh8, mats, k, lam=0.01)
        hist = minres_solve(system, pc, tol=1e-12).residual_history
        assert np.all(np.diff(hist) <= 1e-14)


@settings(max_examples=20, deadline=None)
@given(k=st.integers(0, 8), lam=st.sampled_from([0.01, 0.1, 1.0, 10.0]))
def test_preconditioner_blocks_spd(k, lam):
    from mhfem import build_uniform_mesh
    from mhfem.assembly import assemble
    mats = assemble(build_uniform_mesh(4))
    pc = Preconditioner.for_mode(mats.M, mats.M_sigma, mats.K_nu, lam, k, 1.0)
    x = np.random.default_rng(k).standard_normal(mats.n)
    assert x @ (pc.D @ x) > 0
    assert is_symmetric(pc.D)


def test_inner_solve_identity_and_dense(rng):
    r = rng.standard_normal(10)
    pc = Preconditioner(sp.identity(5), 1.0, 2)
    assert np.allclose(inner_solve(pc, r), r)
    B = rng.standard_normal((5, 5))
    D = B @ B.T + 5 * np.eye(5)
    pc = Preconditioner(sp.csr_matrix(D), 0.3, 2)
    Dinv = np.linalg.inv(D)
    expect = np.concatenate([Dinv @ r[:5], 0.3 * Dinv @ r[5:]])
    out = inner_solve(pc, r)
    assert np.linalg.norm(out - expect) <= 1e-12 * np.linalg.norm(expect)


def test_adjoint_block_scaling(mats4, rng):
    lam = 0.1
    pc = Preconditioner.for_mode(mats4.M, mats4.M_sigma, mats4.K_nu, lam, 0, 1.0)
    n = mats4.n
    r = np.concatenate([np.zeros(n), rng.standard_normal(n)])
    a = pc.apply(r)
    b = pc.apply(lam * r)
    assert np.allclose(b[n:], lam * a[n:], rtol=1e-13)
    # the adjoint block equals λ (M + √λ K)⁻¹
    D = (mats4.M + np.sqrt(lam) * mats4.K_nu).toarray()
    assert np.allclose(a[n:], lam * np.linalg.solve(D, r[n:]), rtol=1e-12)


def test_not_spd_detected():
    with pytest.raises(NotSPDError):
        Preconditioner(sp.csr_matrix(np.diag([1.0, -1.0])), 1.0, 2)
    with pytest.raises(NotSPDError):
        Preconditioner(sp.csr_matrix(np.array([[1.0, 2.0], [0.0, 1.0]])), 1.0, 2)
    with pytest.raises(NotSPDError):
        minres_solve((sp.identity(2, format="csr"), np.ones(2)), precond=lambda v: -v)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        minres_solve((sp.identity(2, format="csr"), np.ones(2)), tol=0.0)
    with pytest.raises(ValueError):
        BlockSystem(((sp.identity(2),),), np.ones(3), 0)
    with pytest.raises(ValueError):
        dense_solve((sp.identity(5000, format="csr"), np.ones(5000)))
