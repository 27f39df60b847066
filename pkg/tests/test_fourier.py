import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mhfem import ModalField, modal_l2_norms, perp, remainder_term
from mhfem.fourier import manufactured_modal_coefficients, mode_weight, synthesize

vec = arrays(np.float64, 6, elements=st.floats(-10, 10))


@settings(max_examples=50, deadline=None)
@given(c=vec, s=vec, k=st.integers(1, 20))
def test_perp_involution_and_orthogonality(c, s, k):
    f = ModalField(k, c, s)
    g = perp(perp(f))
    assert np.array_equal(g.cos, -f.cos) and np.array_equal(g.sin, -f.sin)
    p = perp(f)
    # (v, v^⊥) vanishes modally for any symmetric inner product
    assert abs(f.cos @ p.cos + f.sin @ p.sin) <= 1e-12 * (1 + f.cos @ f.cos + f.sin @ f.sin)


@settings(max_examples=30, deadline=None)
@given(c=vec, s=vec, k=st.integers(1, 6), t=st.floats(0, 2 * math.pi))
def test_time_derivative_is_scaled_perp(c, s, k, t):
    omega = 1.3
    f = ModalField(k, c, s)
    h = 1e-6
    fd = (f.at_time(t + h, omega) - f.at_time(t - h, omega)) / (2 * h)
    exact = k * omega * perp(f).at_time(t, omega)
    assert np.allclose(fd, exact, atol=1e-5 * (1 + np.abs(exact).max()))


def test_perp_undefined_for_mean():
    with pytest.raises(ValueError):
        perp(ModalField(0, np.ones(3)))
    with pytest.raises(ValueError):
        ModalField(0, np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        ModalField(1, np.ones(3), np.ones(2))


@settings(max_examples=25, deadline=None)
@given(
    coefs=arrays(np.float64, (4, 2, 5), elements=st.floats(-3, 3)),
    T=st.floats(0.5, 7.0),
)
def test_parseval_against_time_quadrature(coefs, T):
    rng = np.random.default_rng(0)
    B = rng.standard_normal((5, 5))
    M = B @ B.T + np.eye(5)
    fields = [ModalField(0, coefs[0, 0])] + [ModalField(k, coefs[k, 0], coefs[k, 1]) for k in (1, 2, 3)]
    omega = 2 * math.pi / T
    # the trapezoid rule with 64 points is exact for trigonometric degree < 32
    t = np.linspace(0.0, T, 64, endpoint=False)
    v = synthesize(fields, t, omega)
    direct = T * np.mean(np.einsum("ti,ij,tj->t", v, M, v))
    modal = sum(modal_l2_norms(f, M, T).l2_sq for f in fields)
    assert abs(direct - modal) <= 1e-8 * max(1.0, direct)


def test_modal_norm_weights():
    M = np.eye(2)
    f = ModalField(3, np.array([1.0, 0.0]), np.array([0.0, 2.0]))
    n = modal_l2_norms(f, M, 2.0, stiffness=2 * M)
    assert n.l2_sq == pytest.approx(5.0)
    assert n.grad_sq == pytest.approx(10.0)
    assert n.half_time_sq == pytest.approx(3 * math.pi * 5.0)
    assert mode_weight(0, 4.0) == 4.0 and mode_weight(2, 4.0) == 2.0
    with pytest.raises(ValueError):
        modal_l2_norms(f, np.eye(3), 1.0)


@pytest.mark.parametrize("method", ["quad", "gauss"])
def test_coefficients_of_trigonometric_polynomial(method):
    T = 3.0
    w = 2 * math.pi / T
    signal = lambda t: 1.5 + 2.0 * np.cos(w * t) - 3.0 * np.sin(2 * w * t) + 0.25 * np.cos(5 * w * t)
    c, s = manufactured_modal_coefficients(signal, 6, T, method=method)
    assert np.allclose(c, [1.5, 2.0, 0, 0, 0, 0.25, 0], atol=1e-11)
    assert np.allclose(s, [0, 0, -3.0, 0, 0, 0, 0], atol=1e-11)


def test_gauss_and_quad_agree_on_smooth_signal():
    signal = lambda t: np.exp(np.sin(t)) * (1 + t)
    a = manufactured_modal_coefficients(signal, 20, 2 * math.pi, method="quad")
    b = manufactured_modal_coefficients(signal, 20, 2 * math.pi, method="gauss")
    assert np.allclose(a[0], b[0], atol=1e-10)
    assert np.allclose(a[1], b[1], atol=1e-10)
    with pytest.raises(ValueError):
        manufactured_modal_coefficients(signal, 2, 1.0, method="simpson")


def test_remainder_term_validation():
    class Dummy:
        def remainder(self, N):
            return 2.0 * N

    assert remainder_term(Dummy(), 3) == 6.0
    with pytest.raises(ValueError):
        remainder_term(Dummy(), -1)


@settings(max_examples=25, deadline=None)
@given(c=arrays(np.float64, (4, 5), elements=st.floats(-3, 3)), k=st.integers(1, 6), T=st.floats(0.5, 5.0))
def test_half_derivative_identity(c, k, T):
    """Modal ⟨∂ₜ^½y, ∂ₜ^½v⟩ equals ⟨∂ₜy, v^⊥⟩ computed by time quadrature."""
    rng = np.random.default_rng(k)
    B = rng.standard_normal((5, 5))
    M = B @ B.T + np.eye(5)
    omega = 2 * math.pi / T
    y, v = ModalField(k, c[0], c[1]), ModalField(k, c[2], c[3])
    modal = 0.5 * T * k * omega * (y.cos @ M @ v.cos + y.sin @ M @ v.sin)
    t = np.linspace(0.0, T, 64, endpoint=False)
    dy = k * omega * perp(y).at_time(t, omega)
    vp = perp(v).at_time(t, omega)
    direct = T * np.mean(np.einsum("ti,ij,tj->t", dy, M, vp))
    assert abs(direct - modal) <= 1e-8 * max(1.0, abs(modal))
