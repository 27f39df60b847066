"""Fourier-in-time bookkeeping for multiharmonic fields.

A time-periodic field is written as

    v(x, t) = v_0^c(x) + sum_k ( v_k^c(x) cos(kωt) + v_k^s(x) sin(kωt) ),

with ``ω = 2π / T``. Space-time integrals reduce to modal sums with weight
``T`` for ``k = 0`` and ``T / 2`` for ``k >= 1``. Squared quantities are
stored throughout; square roots are taken only when reporting.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

__all__ = [
    "ModalField",
    "SpectralNorms",
    "mode_weight",
    "perp",
    "modal_l2_norms",
    "synthesize",
    "manufactured_modal_coefficients",
    "remainder_term",
    "QuadratureError",
]


class QuadratureError(RuntimeError):
    pass


def mode_weight(k: int, T: float) -> float:
    """Space-time weight of mode ``k``: ``T`` for the mean, ``T/2`` otherwise."""
    return T if k == 0 else 0.5 * T


@dataclass(frozen=True, eq=False)
class ModalField:
    """Cosine and sine coefficient vectors of one mode (no sine part for k = 0)."""

    k: int
    cos: np.ndarray
    sin: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("mode index must be nonnegative")
        cos = np.asarray(self.cos, dtype=float)
        object.__setattr__(self, "cos", cos)
        if self.k == 0:
            if self.sin is not None and np.any(np.asarray(self.sin) != 0.0):
                raise ValueError("the k = 0 mode has no sine part")
            object.__setattr__(self, "sin", np.zeros_like(cos))
        else:
            sin = np.zeros_like(cos) if self.sin is None else np.asarray(self.sin, dtype=float)
            if sin.shape != cos.shape:
                raise ValueError("cosine and sine parts must have equal shape")
            object.__setattr__(self, "sin", sin)

    @property
    def parts(self) -> tuple:
        return (self.cos,) if self.k == 0 else (self.cos, self.sin)

    def __neg__(self) -> "ModalField":
        return ModalField(self.k, -self.cos, -self.sin)

    def __add__(self, other: "ModalField") -> "ModalField":
        if other.k != self.k:
            raise ValueError("cannot add different modes")
        return ModalField(self.k, self.cos + other.cos, self.sin + other.sin)

    def __sub__(self, other: "ModalField") -> "ModalField":
        return self + (-other)

    def scale(self, s: float) -> "ModalField":
        return ModalField(self.k, s * self.cos, s * self.sin)

    __rmul__ = scale

    def at_time(self, t, omega: float) -> np.ndarray:
        """Values ``v_k^c cos(kωt) + v_k^s sin(kωt)``, shape (..., n) for array ``t``."""
        t = np.asarray(t, dtype=float)[..., None]
        return self.cos * np.cos(self.k * omega * t) + self.sin * np.sin(self.k * omega * t)


@dataclass(frozen=True)
class SpectralNorms:
    """Weighted squared contributions of one mode to the space-time norms."""

    l2_sq: float
    grad_sq: Optional[float]
    half_time_sq: float


def perp(f: ModalField) -> ModalField:
    """Coefficients of the rotated field ``f^⊥``: ``(c, s) -> (s, -c)``.

    The time derivative of mode ``k`` is ``kω perp(f)``.
    """
    if f.k == 0:
        raise ValueError("the rotation is undefined for the k = 0 mode")
    return ModalField(f.k, f.sin.copy(), -f.cos)


def modal_l2_norms(f: ModalField, mass, T: float, stiffness=None) -> SpectralNorms:
    """T-weighted ``L²``, gradient and half time-derivative contributions of a mode."""
    if mass.shape[0] != f.cos.shape[0]:
        raise ValueError("mass matrix and field live on different dof sets")
    w = mode_weight(f.k, T)
    omega = 2.0 * math.pi / T
    sq = sum(float(v @ (mass @ v)) for v in f.parts)
    grad = None
    if stiffness is not None:
        if stiffness.shape[0] != f.cos.shape[0]:
            raise ValueError("stiffness matrix and field live on different dof sets")
        grad = w * sum(float(v @ (stiffness @ v)) for v in f.parts)
    return SpectralNorms(w * sq, grad, w * f.k * omega * sq)


def synthesize(fields, t, omega: float) -> np.ndarray:
    """Sum the modal fields at times ``t``; result has shape (len(t), n)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = None
    for f in fields:
        v = f.at_time(t, omega)
        out = v if out is None else out + v
    return out


def manufactured_modal_coefficients(
    signal: Callable[[float], float], K: int, T: float, tol: float = 1e-10, method: str = "quad"
) -> tuple:
    """Fourier coefficients ``(c, s)``, arrays of length ``K + 1``, of a scalar time signal.

    ``method="quad"`` runs adaptive oscillatory quadrature per mode;
    ``method="gauss"`` evaluates all modes at once with a Gauss-Legendre
    rule, fine for smooth signals and many modes, and estimates its error by
    repeating with twice the points. Both raise :class:`QuadratureError` when
    the error estimate exceeds ``tol`` (absolute for O(1) values, relative
    beyond).
    """
    if method == "gauss":
        return _gauss_coefficients(signal, K, T, tol)
    if method != "quad":
        raise ValueError("method must be 'quad' or 'gauss'")
    omega = 2.0 * math.pi / T
    c = np.zeros(K + 1)
    s = np.zeros(K + 1)

    def run(weight=None, wvar=None):
        kw = {} if weight is None else {"weight": weight, "wvar": wvar}
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(signal, 0.0, T, epsabs=0.0, epsrel=1e-13, limit=500, **kw)
        if not err <= tol * max(1.0, abs(val)):
            raise QuadratureError(f"quadrature error estimate {err:.3g} above tolerance")
        return val

    c[0] = run() / T
    for k in range(1, K + 1):
        c[k] = 2.0 / T * run("cos", k * omega)
        s[k] = 2.0 / T * run("sin", k * omega)
    return c, s


def _gauss_once(signal, K: int, T: float, n_panels: int, order: int = 24, block: int = 16) -> tuple:
    """Composite Gauss-Legendre rule with ``n_panels`` equal panels."""
    x, w = np.polynomial.legendre.leggauss(order)
    h = T / n_panels
    left = h * np.arange(n_panels)
    t = (left[:, None] + 0.5 * h * (x + 1.0)).ravel()
    gw = np.asarray(signal(t), dtype=float) * np.tile(w, n_panels) * (0.5 * h)
    omega = 2.0 * math.pi / T
    c = np.empty(K + 1)
    s = np.empty(K + 1)
    for lo in range(0, K + 1, block):
        ks = np.arange(lo, min(lo + block, K + 1))
        e = np.exp(1j * np.outer(ks * omega, t)) @ gw
        c[ks] = e.real
        s[ks] = e.imag
    c *= 2.0 / T
    s *= 2.0 / T
    c[0] *= 0.5
    s[0] = 0.0
    return c, s


def _gauss_coefficients(signal, K: int, T: float, tol: float) -> tuple:
    # about one panel per period of the highest mode
    n = K // 2 + 16
    c1, s1 = _gauss_once(signal, K, T, n)
    c2, s2 = _gauss_once(signal, K, T, 2 * n)
    # round-off grows with the number of points, so measure against the largest coefficient
    scale = max(1.0, float(np.abs(c2).max()), float(np.abs(s2).max()))
    err = np.maximum(np.abs(c1 - c2), np.abs(s1 - s2)) / scale
    if not np.all(err <= tol):
        raise QuadratureError(f"Gauss-Legendre error estimate {err.max():.3g} above tolerance")
    return c2, s2


def remainder_term(desired_state, N: int) -> float:
    """Truncation remainder ``E_N = (T/2) sum_{k>N} ‖y_d,k‖²_Ω`` of a desired state."""
    if N < 0:
        raise ValueError("truncation index must be nonnegative")
    return desired_state.remainder(N)
