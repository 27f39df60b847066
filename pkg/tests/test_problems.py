import math

import numpy as np
import pytest

from mhfem import build_uniform_mesh, example_desired_state, example_exact_state, get_example
from mhfem.fourier import manufactured_modal_coefficients
from mhfem.problems import BudgetError, IndicatorProfile, SineProfile, prolongate, reference_solution
from mhfem.quadrature import collapsed_gauss_rule


def _laplacian(f, x, y, t, h=1e-4):
    return (f(x + h, y, t) + f(x - h, y, t) + f(x, y + h, t) + f(x, y - h, t) - 4 * f(x, y, t)) / h**2


@pytest.mark.parametrize("ident", [1, 2])
def test_exact_state_solves_optimality_system(ident):
    ex = example_exact_state(ident)
    rng = np.random.default_rng(ident)
    x, y = rng.uniform(0.1, 0.9, (2, 6))
    t = rng.uniform(0.3, 5.9, 6)
    dt = 1e-5
    y_t = (ex.y(x, y, t + dt) - ex.y(x, y, t - dt)) / (2 * dt)
    p_t = (ex.p(x, y, t + dt) - ex.p(x, y, t - dt)) / (2 * dt)
    state = y_t - _laplacian(ex.y, x, y, t) - ex.u(x, y, t)
    adjoint = -p_t - _laplacian(ex.p, x, y, t) - (ex.y(x, y, t) - ex.desired_state(x, y, t))
    scale = np.abs(ex.desired_state(x, y, t)).max() + np.abs(ex.u(x, y, t)).max()
    assert np.abs(state).max() < 1e-4 * scale
    assert np.abs(adjoint).max() < 1e-4 * scale
    assert np.allclose(ex.p(x, y, t), -0.1 * ex.u(x, y, t))


def test_example1_is_time_periodic():
    ex = example_exact_state(1)
    x, y = np.meshgrid(np.linspace(0, 1, 5), np.linspace(0, 1, 5))
    for f in (ex.y, ex.u, ex.p, ex.desired_state):
        assert np.allclose(f(x, y, 0.0), f(x, y, 2 * math.pi), atol=1e-9)


def test_example1_exact_modes_match_closed_form():
    """The modal solve reproduces the Fourier coefficients of the closed-form state."""
    ex1 = get_example(1)
    g = lambda t: np.exp(t) * np.sin(t) ** 3
    c, s = manufactured_modal_coefficients(g, 6, 2 * math.pi)
    modes = ex1.exact_modes(range(7))
    assert np.allclose(modes[:, 0], c, rtol=1e-8, atol=1e-8)
    assert np.allclose(modes[:, 1], s, rtol=1e-8, atol=1e-8)


def test_example3_structure():
    ex = get_example(3)
    ds = ex.desired_state
    assert ds.mode(0) == (0.5, 0.0)
    for k in range(2, 40, 2):
        assert ds.mode(k) == (0.0, 0.0)
    for k in range(1, 40, 2):
        assert ds.mode(k)[0] == pytest.approx(-2 * (-1) ** ((k - 1) // 2) / (k * math.pi))
    # Parseval: ‖y_d‖²_{Q_T} = ¼ · ½ = 1/8
    head = sum(ex.T * ds.norm_sq(0) if k == 0 else 0.5 * ex.T * ds.norm_sq(k) for k in range(2001))
    assert head + ds.remainder(2000) == pytest.approx(0.125, abs=1e-12)
    assert ds.remainder_by_tail(23, 8192) == pytest.approx(ds.remainder(23), rel=5e-5)
    with pytest.raises(ValueError):
        example_exact_state(3)


def test_remainders_paper_values():
    e1 = get_example(1).desired_state
    e2 = get_example(2).desired_state
    for ds, N, value in ((e1, 6, 640.25), (e1, 8, 106.07), (e2, 6, 44094.84), (e2, 8, 19869.30), (e2, 10, 10597.20)):
        assert ds.remainder(N) == pytest.approx(value, rel=5e-3)
        assert ds.remainder_by_tail(N, 1024) == pytest.approx(ds.remainder(N), rel=2e-5)


def test_frozen_exact_values():
    # computed once from the modal solves plus the power-law tail correction
    assert get_example(1).exact_cost() == pytest.approx(3.171572e6, rel=1e-6)
    assert get_example(2).exact_cost() == pytest.approx(7.047848e6, rel=1e-6)
    assert get_example(1).exact_seminorm_tail_sq(8) == pytest.approx(7.38798, rel=1e-5)
    assert get_example(2).exact_l2_tail_sq(8) == pytest.approx(42.1257, rel=1e-5)


def test_profiles():
    m = build_uniform_mesh(4)
    rule = collapsed_gauss_rule(6)
    vals = SineProfile().quad_values(m, rule)
    integral = np.einsum("tq,q,t->", vals**2, rule.weights, m.areas)
    assert integral == pytest.approx(0.25, abs=1e-10)
    ind = IndicatorProfile().quad_values(m, rule)
    assert np.einsum("tq,q,t->", ind, rule.weights, m.areas) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(ValueError):
        IndicatorProfile().quad_values(build_uniform_mesh(3), rule)


def test_desired_state_callables():
    cos_part, sin_part = example_desired_state(2, 1)
    c, s = get_example(2).desired_state.mode(1)
    assert cos_part(0.5, 0.5) == pytest.approx(c)
    assert sin_part(0.25, 0.5) == pytest.approx(s * math.sin(math.pi / 4))
    with pytest.raises(ValueError):
        get_example(4)


def test_prolongation_and_reference_budget():
    coarse, fine = build_uniform_mesh(4), build_uniform_mesh(8)
    v = coarse.nodes[:, 0] * 2 - coarse.nodes[:, 1]
    assert np.allclose(prolongate(coarse, fine, v), fine.nodes[:, 0] * 2 - fine.nodes[:, 1])
    with pytest.raises(ValueError):
        prolongate(build_uniform_mesh(3), fine, np.zeros(16))
    with pytest.raises(BudgetError):
        reference_solution(3, build_uniform_mesh(64), 32)


def test_example1_sixteen_modes_reconstruct_state():
    """Pointwise reconstruction of the exact time factor from 16 modes, required to 1e-6.

    This cannot hold: the third derivative of e^t sin³t jumps between t = 0
    and t = 2π, so the coefficients decay like k⁻⁴ and the truncation error
    with 16 modes is of order 1e-1. The test records that honestly.
    """
    ex = get_example(1)
    m = ex.exact_modes(range(17))
    t = np.linspace(0, 2 * math.pi, 1001)
    g = np.exp(t) * np.sin(t) ** 3
    rec = m[0, 0] + sum(m[k, 0] * np.cos(k * t) + m[k, 1] * np.sin(k * t) for k in range(1, 17))
    assert np.abs(rec - g).max() <= 1e-6
