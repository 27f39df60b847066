"""Block saddle-point systems, block-diagonal preconditioners and MINRES.

Sparse storage is :class:`scipy.sparse.csr_matrix`. The inner blocks of the
preconditioner are factorized exactly with SuperLU in symmetric mode; the
positivity of the pivots doubles as the SPD check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "BlockSystem",
    "Preconditioner",
    "MinresResult",
    "NotSPDError",
    "spmv",
    "is_symmetric",
    "minres_solve",
    "inner_solve",
    "dense_solve",
]

DENSE_LIMIT = 4000


class NotSPDError(ValueError):
    """A matrix that must be symmetric positive definite is not."""


def spmv(A: sp.spmatrix, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    if A.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: matrix {A.shape} times vector of length {x.shape[0]}")
    return A @ x


def is_symmetric(A: sp.spmatrix, tol: float = 1e-13) -> bool:
    D = (A - A.T).tocoo()
    if D.nnz == 0:
        return True
    scale = max(abs(A).max(), 1.0)
    return float(np.abs(D.data).max()) <= tol * scale


@dataclass(frozen=True, eq=False)
class BlockSystem:
    """Block layout of one mode; ``blocks[i][j]`` may be ``None`` for zero."""

    blocks: tuple
    rhs: np.ndarray
    k: int
    matrix: sp.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "matrix", sp.bmat([list(r) for r in self.blocks], format="csr"))
        if self.matrix.shape[0] != self.rhs.shape[0]:
            raise ValueError("right-hand side does not match the block operator")

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def block_size(self) -> int:
        return self.matrix.shape[0] // self.n_blocks


class Preconditioner:
    """Block-diagonal ``diag(D, .., D, λ⁻¹D, .., λ⁻¹D)``.

    ``D = √λ K + kω√λ M_σ + M`` for ``k ≥ 1`` (four blocks) and
    ``D = M + √λ K`` for ``k = 0`` (two blocks). Applying the preconditioner
    means applying its inverse.
    """

    def __init__(self, D: sp.spmatrix, lam: float, n_blocks: int, k: int = 0):
        if n_blocks not in (2, 4):
            raise ValueError("the preconditioner has 2 or 4 diagonal blocks")
        if lam <= 0:
            raise ValueError("lambda must be positive")
        self.k = k
        self.lam = float(lam)
        self.n_blocks = n_blocks
        self.D = sp.csc_matrix(D)
        self.size = self.D.shape[0]
        self._lu = _spd_factor(self.D)

    @classmethod
    def for_mode(cls, M, M_sigma, K_nu, lam: float, k: int, omega: float) -> "Preconditioner":
        s = math.sqrt(lam)
        if k == 0:
            return cls(M + s * K_nu, lam, 2, 0)
        return cls(s * K_nu + k * omega * s * M_sigma + M, lam, 4, k)

    def solve_block(self, r: np.ndarray) -> np.ndarray:
        return self._lu.solve(np.asarray(r, dtype=float))

    def apply(self, r: np.ndarray) -> np.ndarray:
        return inner_solve(self, r)

    __call__ = apply


def _spd_factor(D: sp.csc_matrix):
    n = D.shape[0]
    if n == 0:
        raise NotSPDError("empty preconditioner block")
    if not is_symmetric(D, 1e-12):
        raise NotSPDError("preconditioner block is not symmetric")
    try:
        lu = spla.splu(
            D,
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as exc:  # exactly singular
        raise NotSPDError(f"preconditioner block is singular: {exc}") from exc
    pivots = lu.U.diagonal()
    if not np.array_equal(lu.perm_r, lu.perm_c) or np.any(pivots <= 0.0):
        raise NotSPDError("preconditioner block is not positive definite")
    return lu


def inner_solve(precond: Preconditioner, r: np.ndarray) -> np.ndarray:
    """Apply ``P⁻¹`` blockwise: ``D⁻¹`` on state blocks, ``λ D⁻¹`` on adjoint blocks."""
    r = np.asarray(r, dtype=float)
    m = precond.size
    if r.shape[0] != m * precond.n_blocks:
        raise ValueError("residual length does not match the preconditioner")
    half = precond.n_blocks // 2
    out = np.empty_like(r)
    for b in range(precond.n_blocks):
        sl = slice(b * m, (b + 1) * m)
        z = precond.solve_block(r[sl])
        out[sl] = z if b < half else precond.lam * z
    return out


@dataclass
class MinresResult:
    x: np.ndarray
    iterations: int
    converged: bool
    breakdown: bool
    residual_history: list

    @property
    def relative_residual(self) -> float:
        return self.residual_history[-1]


def minres_solve(system, precond=None, tol: float = 1e-10, max_iter: int = 1000) -> MinresResult:
    """Preconditioned MINRES (Paige-Saunders recurrences).

    Stops once ``‖r‖_{P⁻¹} / ‖b‖_{P⁻¹} <= tol``. ``system`` is a
    :class:`BlockSystem` or a pair ``(A, b)``; ``precond`` is anything callable
    that applies ``P⁻¹`` and defaults to the identity. ``residual_history``
    holds the preconditioned relative residual after each iteration, starting
    with ``1.0`` for the zero initial guess.
    """
    if isinstance(system, BlockSystem):
        A, b = system.matrix, system.rhs
    else:
        A, b = system
    b = np.asarray(b, dtype=float)
    if not 0.0 < tol < 1.0:
        raise ValueError("tol must lie in (0, 1)")
    apply_p = precond if precond is not None else (lambda v: v)
    eps = np.finfo(float).eps

    n = b.shape[0]
    x = np.zeros(n)
    r1 = b.copy()
    y = apply_p(r1)
    beta1 = float(r1 @ y)
    if beta1 < 0.0:
        raise NotSPDError("preconditioner is not positive definite")
    beta1 = math.sqrt(beta1)
    if beta1 == 0.0:
        return MinresResult(x, 0, True, False, [0.0])

    oldb = 0.0
    beta = beta1
    dbar = 0.0
    epsln = 0.0
    phibar = beta1
    cs, sn = -1.0, 0.0
    w = np.zeros(n)
    w2 = np.zeros(n)
    r2 = r1
    history = [1.0]
    converged = breakdown = False
    itn = 0

    while itn < max_iter:
        itn += 1
        v = y / beta
        y = A @ v
        if itn >= 2:
            y = y - (beta / oldb) * r1
        alfa = float(v @ y)
        y = y - (alfa / beta) * r2
        r1, r2 = r2, y
        y = apply_p(r2)
        oldb = beta
        beta2 = float(r2 @ y)
        if beta2 < -eps * oldb * oldb:
            raise NotSPDError("preconditioner is not positive definite")
        beta = math.sqrt(max(beta2, 0.0))

        oldeps = epsln
        delta = cs * dbar + sn * alfa
        gbar = sn * dbar - cs * alfa
        epsln = sn * beta
        dbar = -cs * beta
        gamma = math.hypot(gbar, beta)
        if gamma == 0.0:
            breakdown = True
            break
        cs = gbar / gamma
        sn = beta / gamma
        phi = cs * phibar
        phibar = sn * phibar

        w1, w2 = w2, w
        w = (v - oldeps * w1 - delta * w2) / gamma
        x = x + phi * w
        history.append(phibar / beta1)
        if phibar / beta1 <= tol or beta == 0.0:
            converged = True
            break

    return MinresResult(x, itn, converged, breakdown, history)


def dense_solve(system) -> np.ndarray:
    """Direct LU solve of the assembled operator (test oracle)."""
    if isinstance(system, BlockSystem):
        A, b = system.matrix, system.rhs
    else:
        A, b = system
    A = A.toarray() if sp.issparse(A) else np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if A.shape[0] > DENSE_LIMIT:
        raise ValueError(f"dense oracle limited to {DENSE_LIMIT} unknowns, got {A.shape[0]}")
    try:
        x = la.solve(A, b)
    except la.LinAlgError as exc:
        raise la.LinAlgError(f"singular system: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise la.LinAlgError("singular system")
    return x
