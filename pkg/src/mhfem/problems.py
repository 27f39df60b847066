"""The three benchmark problems and their desired states.

Examples 1 and 2 are manufactured: the state ``y = g(t) sin(πx₁) sin(πx₂)``
is prescribed and the desired state follows from both optimality equations.
Since the spatial profile is a Dirichlet eigenfunction of ``-Δ``, every
exact Fourier mode is that profile times four scalars solving a 4×4 system.
Example 3 has a discontinuous desired state and no closed-form solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .assembly import load_vector
from .fourier import manufactured_modal_coefficients
from .mesh import Mesh
from .quadrature import TriangleRule, midedge_rule, physical_points
from .solver import MhSolution, ProblemSpec, solve_all_modes

__all__ = [
    "SineProfile",
    "IndicatorProfile",
    "SeparableDesiredState",
    "ExactSolution",
    "ExampleDefinition",
    "get_example",
    "example_desired_state",
    "example_exact_state",
    "reference_solution",
    "prolongate",
    "BudgetError",
]

PI = math.pi


class SineProfile:
    """``sin(πx₁) sin(πx₂)``; ``-Δ`` eigenvalue ``2π²``."""

    norm_sq = 0.25
    grad_norm_sq = 0.5 * PI**2
    eigenvalue = 2.0 * PI**2

    def __call__(self, x, y):
        return np.sin(PI * x) * np.sin(PI * y)

    def gradient(self, x, y):
        return PI * np.stack(
            [np.cos(PI * x) * np.sin(PI * y), np.sin(PI * x) * np.cos(PI * y)], axis=-1
        )

    def quad_values(self, mesh: Mesh, rule: TriangleRule) -> np.ndarray:
        pts = physical_points(mesh, rule)
        return self(pts[..., 0], pts[..., 1])


class IndicatorProfile:
    """Characteristic function of ``[½, 1]²``.

    Values are taken per triangle from its centroid, which is exact on
    meshes whose edges align with the jump (an even number of cells).
    """

    norm_sq = 0.25

    def __call__(self, x, y):
        return ((np.asarray(x) >= 0.5) & (np.asarray(y) >= 0.5)).astype(float)

    def quad_values(self, mesh: Mesh, rule: TriangleRule) -> np.ndarray:
        if mesh.n_cells_per_side % 2:
            raise ValueError("the indicator desired state needs an even number of cells per side")
        c = mesh.centroids
        return np.repeat(self(c[:, 0], c[:, 1])[:, None], rule.n_points, axis=1)


@dataclass(eq=False)
class SeparableDesiredState:
    """``y_d(x, t) = profile(x) · g(t)`` with per-mode time coefficients.

    Either ``coefficients(k) -> (c_k, s_k)`` in closed form or a scalar
    ``signal(t)`` whose coefficients are computed by quadrature is given;
    ``time_energy`` is ``∫₀ᵀ g² dt``.
    """

    profile: object
    T: float
    signal: Optional[Callable[[float], float]] = None
    coefficients: Optional[Callable[[int], tuple]] = None
    time_energy: Optional[float] = None
    _coef: dict = field(default_factory=dict, repr=False)
    _loads: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.signal is None and self.coefficients is None:
            raise ValueError("need a time signal or closed-form coefficients")
        if self.time_energy is None:
            if self.signal is None:
                raise ValueError("closed-form coefficients need the time energy")
            self.time_energy = integrate.quad(
                lambda t: self.signal(t) ** 2, 0.0, self.T, epsabs=0.0, epsrel=1e-13, limit=500
            )[0]

    def mode(self, k: int) -> tuple:
        """Time coefficients ``(c_k, s_k)``; ``s_0 = 0``."""
        if k < 0:
            raise ValueError("mode index must be nonnegative")
        if self.coefficients is not None:
            c, s = self.coefficients(k)
            return float(c), 0.0 if k == 0 else float(s)
        if k not in self._coef:
            K = max(k, 2 * max(self._coef, default=0), 64)
            c, s = manufactured_modal_coefficients(self.signal, K, self.T, method="gauss")
            self._coef.update({j: (float(c[j]), float(s[j])) for j in range(K + 1)})
        return self._coef[k]

    def norm_sq(self, k: int) -> float:
        """``‖y_d,k‖²_Ω`` summed over the cosine and sine parts."""
        c, s = self.mode(k)
        return self.profile.norm_sq * (c * c + s * s)

    def remainder(self, N: int) -> float:
        """``(T/2) sum_{k>N} ‖y_d,k‖²_Ω`` as the Parseval complement of modes ``0..N``."""
        head = self.T * self.norm_sq(0) + 0.5 * self.T * sum(self.norm_sq(k) for k in range(1, N + 1))
        return max(self.profile.norm_sq * self.time_energy - head, 0.0)

    def remainder_by_tail(self, N: int, max_modes: int = 2048) -> float:
        """The same remainder summed mode by mode up to ``max_modes``.

        The unsummed rest is estimated from the algebraic decay of the last
        octave of terms, so this is an independent check of :meth:`remainder`.
        """
        ks = range(N + 1, max(max_modes, 4 * (N + 1)) + 1)
        inc = np.array([0.5 * self.T * self.norm_sq(k) for k in ks])
        if self.coefficients is not None:
            # closed-form data may vanish on every other mode; fit the decay on the nonzero ones
            inc_fit = inc[inc > 0.0]
        else:
            inc_fit = inc
        return float(inc.sum()) + _power_tail(inc_fit)

    def quad_values(self, mesh: Mesh, rule: TriangleRule, k: int) -> tuple:
        base = self.profile.quad_values(mesh, rule)
        c, s = self.mode(k)
        return c * base, s * base

    def load(self, mesh: Mesh, k: int) -> tuple:
        """Interior load vectors of the cosine and sine parts (mid-edge rule)."""
        # uniform meshes are determined by their resolution
        key = mesh.n_cells_per_side
        if key not in self._loads:
            rule = midedge_rule()
            self._loads[key] = load_vector(mesh, self.profile.quad_values(mesh, rule), rule)[
                mesh.interior_nodes
            ]
        base = self._loads[key]
        c, s = self.mode(k)
        return c * base, s * base


@dataclass(frozen=True)
class ExactSolution:
    """Manufactured ``y = g(t) φ(x)``, ``u = (σ g' + νμ g) φ``, ``p = -λ u``."""

    g: Callable
    dg: Callable
    d2g: Callable
    lam: float
    profile: object = field(default_factory=SineProfile)
    sigma: float = 1.0
    nu: float = 1.0

    def y(self, x, y, t):
        return self.g(t) * self.profile(x, y)

    def u(self, x, y, t):
        mu = self.nu * self.profile.eigenvalue
        return (self.sigma * self.dg(t) + mu * self.g(t)) * self.profile(x, y)

    def p(self, x, y, t):
        return -self.lam * self.u(x, y, t)

    def desired_state(self, x, y, t):
        """``y_d = y + σ∂ₜp + div(ν∇p)`` from the adjoint equation."""
        mu = self.nu * self.profile.eigenvalue
        lam, s = self.lam, self.sigma
        dp = -lam * (s * self.d2g(t) + mu * self.dg(t))
        p = -lam * (s * self.dg(t) + mu * self.g(t))
        return (self.g(t) + s * dp - mu * p) * self.profile(x, y)


@dataclass(eq=False)
class ExampleDefinition:
    """One benchmark: data, truncation default and exact or reference route."""

    identifier: int
    lam: float
    T: float
    desired_state: SeparableDesiredState
    default_N: int
    exact: Optional[ExactSolution] = None
    reference_factor: int = 2

    @property
    def omega(self) -> float:
        return 2.0 * PI / self.T

    def spec(self, N: Optional[int] = None) -> ProblemSpec:
        return ProblemSpec(self.desired_state, self.lam, self.T, self.default_N if N is None else N)

    @property
    def has_exact_solution(self) -> bool:
        return self.exact is not None

    def exact_modes(self, ks) -> np.ndarray:
        """Scalars ``(y^c, y^s, p^c, p^s)`` of the exact modes, shape (len(ks), 4).

        Each exact mode is the profile times these scalars; they solve the
        continuous mode equations with the desired-state coefficients.
        """
        if self.exact is None:
            raise ValueError(f"example {self.identifier} has no closed-form solution")
        ks = np.atleast_1d(np.asarray(ks, dtype=int))
        mu = self.exact.nu * self.exact.profile.eigenvalue
        il = 1.0 / self.lam
        kw = ks * self.omega * self.exact.sigma
        A = np.zeros((ks.size, 4, 4))
        A[:, 0, 0] = A[:, 1, 1] = 1.0
        A[:, 2, 2] = A[:, 3, 3] = -il
        A[:, 0, 2] = A[:, 2, 0] = A[:, 1, 3] = A[:, 3, 1] = -mu
        A[:, 0, 3] = A[:, 3, 0] = kw
        A[:, 1, 2] = A[:, 2, 1] = -kw
        rhs = np.zeros((ks.size, 4))
        rhs[:, :2] = [self.desired_state.mode(int(k)) for k in ks]
        # k = 0 has no sine equations; its decoupled copy is harmless since s_0 = 0
        return np.linalg.solve(A, rhs[..., None])[..., 0]

    def exact_mode_cost(self, k: int) -> float:
        """``J_k`` of the exact optimal pair."""
        yc, ys, pc, ps = self.exact_modes([k])[0]
        c, d = self.desired_state.mode(k)
        nsq = self.exact.profile.norm_sq
        return 0.5 * nsq * ((yc - c) ** 2 + (ys - d) ** 2) + 0.5 / self.lam * nsq * (pc * pc + ps * ps)

    def exact_cost(self, max_modes: int = 1024) -> float:
        """Optimal ``J = T J_0 + (T/2) sum_{k>=1} J_k``.

        Written as ``½‖y_d‖²_{L²(Q_T)} + Σ_k w_k (J_k - ½‖y_d,k‖²)``: the data
        energy is known exactly and the corrections decay fast.
        """
        ds = self.desired_state
        ks = np.arange(max_modes + 1)
        corr = np.array([self.exact_mode_cost(k) - 0.5 * ds.norm_sq(k) for k in ks])
        w = np.where(ks == 0, self.T, 0.5 * self.T)
        head = 0.5 * ds.profile.norm_sq * ds.time_energy + float(w @ corr)
        return head + _power_tail(corr * w)

    def exact_seminorm_tail_sq(self, N: int, max_modes: int = 1024) -> float:
        """``(T/2) sum_{k>N} (kω‖(y_k,p_k)‖² + ‖∇(y_k,p_k)‖²)`` of the exact solution."""
        prof = self.exact.profile if self.exact is not None else None
        return self._exact_tail(N, lambda k: k * self.omega * prof.norm_sq + prof.grad_norm_sq, max_modes)

    def exact_l2_tail_sq(self, N: int, max_modes: int = 1024) -> float:
        """``(T/2) sum_{k>N} ‖(y_k,p_k)‖²`` of the exact solution."""
        prof = self.exact.profile if self.exact is not None else None
        return self._exact_tail(N, lambda k: prof.norm_sq + 0.0 * k, max_modes)

    def _exact_tail(self, N: int, factor, max_modes: int) -> float:
        if self.exact is None:
            raise ValueError(f"example {self.identifier} has no closed-form solution")
        ks = np.arange(N + 1, max(max_modes, 4 * (N + 1)) + 1)
        v = self.exact_modes(ks)
        inc = 0.5 * self.T * np.einsum("ij,ij->i", v, v) * factor(ks)
        return float(inc.sum()) + _power_tail(inc)


def _power_tail(inc: np.ndarray) -> float:
    """Estimate ``Σ_{j>K} a_j`` beyond the last term of an algebraically decaying series.

    Fits ``a_j ~ C j^{-p}`` to the last octave and integrates the power law.
    The terms are indexed by their position; only the shape of the decay matters.
    """
    K = inc.size
    a, b = abs(inc[K // 2 - 1]), abs(inc[-1])
    if K < 8 or b == 0.0 or a <= b:
        return 0.0
    # positions j = K/2 and K on the mode axis (offsets cancel asymptotically)
    p = math.log(a / b) / math.log(K / (K // 2))
    if p <= 1.0:
        raise ArithmeticError("exact-solution series decays too slowly to sum")
    return float(np.sign(inc[-1]) * b * K / (p - 1.0))


def _ex1_signal(t):
    return np.exp(t) * np.sin(t) / 10.0 * (
        (12.0 + 4.0 * PI**4) * np.sin(t) ** 2 - 6.0 * np.cos(t) ** 2 - 6.0 * np.sin(t) * np.cos(t)
    )


def _ex2_signal(t):
    return np.exp(t) / 10.0 * (-2.0 * np.cos(t) + (10.0 + 4.0 * PI**4) * np.sin(t))


def _ex3_coefficients(k: int) -> tuple:
    if k == 0:
        return 0.5, 0.0
    c = (-math.sin(k * PI / 2.0) + math.sin(3.0 * k * PI / 2.0)) / (k * PI)
    # even modes vanish; round away the sin() round-off
    return (0.0 if k % 2 == 0 else c), 0.0


def _build(identifier: int) -> ExampleDefinition:
    if identifier == 1:
        exact = ExactSolution(
            g=lambda t: np.exp(t) * np.sin(t) ** 3,
            dg=lambda t: np.exp(t) * (np.sin(t) ** 3 + 3.0 * np.sin(t) ** 2 * np.cos(t)),
            d2g=lambda t: np.exp(t)
            * (-2.0 * np.sin(t) ** 3 + 6.0 * np.sin(t) ** 2 * np.cos(t) + 6.0 * np.sin(t) * np.cos(t) ** 2),
            lam=0.1,
        )
        yd = SeparableDesiredState(SineProfile(), 2.0 * PI, signal=_ex1_signal)
        return ExampleDefinition(1, 0.1, 2.0 * PI, yd, 8, exact)
    if identifier == 2:
        exact = ExactSolution(
            g=lambda t: np.exp(t) * np.sin(t),
            dg=lambda t: np.exp(t) * (np.sin(t) + np.cos(t)),
            d2g=lambda t: 2.0 * np.exp(t) * np.cos(t),
            lam=0.1,
        )
        yd = SeparableDesiredState(SineProfile(), 2.0 * PI, signal=_ex2_signal)
        return ExampleDefinition(2, 0.1, 2.0 * PI, yd, 10, exact)
    if identifier == 3:
        # χ_[1/4, 3/4](t): ∫₀¹ g² dt = 1/2
        yd = SeparableDesiredState(IndicatorProfile(), 1.0, coefficients=_ex3_coefficients, time_energy=0.5)
        return ExampleDefinition(3, 0.01, 1.0, yd, 23, None)
    raise ValueError(f"unknown example {identifier!r}; choose 1, 2 or 3")


_EXAMPLES: dict = {}


def get_example(identifier: int) -> ExampleDefinition:
    """Shared, lazily built example definitions (quadrature results are cached)."""
    if identifier not in _EXAMPLES:
        _EXAMPLES[identifier] = _build(identifier)
    return _EXAMPLES[identifier]


def example_desired_state(identifier: int, k: int) -> tuple:
    """Spatial coefficient functions ``(y_d,k^c, y_d,k^s)`` of mode ``k``."""
    ex = get_example(identifier)
    c, s = ex.desired_state.mode(k)
    prof = ex.desired_state.profile

    def cos_part(x, y):
        return c * prof(x, y)

    def sin_part(x, y):
        return s * prof(x, y)

    return cos_part, sin_part


def example_exact_state(identifier: int) -> ExactSolution:
    ex = get_example(identifier)
    if ex.exact is None:
        raise ValueError(f"example {identifier} has no closed-form state; use reference_solution")
    return ex.exact


class BudgetError(MemoryError):
    pass


def prolongate(coarse: Mesh, fine: Mesh, values: np.ndarray) -> np.ndarray:
    """Interpolate a coarse nodal P1 field onto nested fine-mesh nodes."""
    from .mesh import evaluate_p1

    if fine.n_cells_per_side % coarse.n_cells_per_side:
        raise ValueError("meshes are not nested")
    return evaluate_p1(coarse, values, fine.nodes)


def reference_solution(identifier: int, mesh: Mesh, fine_factor: int = 2, tol: float = 1e-10,
                       N: Optional[int] = None, modes=None, workers: int = 1,
                       max_cells: int = 1024) -> MhSolution:
    """MhFE solution on a ``fine_factor``-times refined mesh, the error surrogate of Example 3."""
    from .mesh import build_uniform_mesh

    n_fine = mesh.n_cells_per_side * fine_factor
    if n_fine > max_cells:
        raise BudgetError(
            f"a {n_fine}x{n_fine} reference mesh exceeds the budget of {max_cells}; use a smaller grid"
        )
    ex = get_example(identifier)
    return solve_all_modes(ex.spec(N), build_uniform_mesh(n_fine), tol=tol, modes=modes, workers=workers)
