import math

import numpy as np
import pytest

from mhfem import build_uniform_mesh, get_example, solve_all_modes
from mhfem.fourier import mode_weight
from mhfem.verification import (
    ModeError,
    error_denominator,
    exact_mode_error,
    overall_exact_error_sq,
    reference_mode_error,
)


def test_denominators():
    e = ModeError(2, 9.0, 1.0)
    assert e.denominator(0.5) == 3.0
    assert error_denominator(e, 0.5, "weighted") == pytest.approx(math.sqrt(10.0))
    with pytest.raises(ValueError):
        e.denominator(1.0, "l2")


def test_reference_error_of_itself_vanishes(ex1_small):
    e = reference_mode_error(ex1_small, ex1_small, 1)
    assert e.grad_sq == pytest.approx(0.0, abs=1e-20) and e.l2_sq == pytest.approx(0.0, abs=1e-20)


def test_reference_error_approximates_exact_error():
    ex = get_example(1)
    coarse = solve_all_modes(ex.spec(1), build_uniform_mesh(8))
    fine = solve_all_modes(ex.spec(1), build_uniform_mesh(64))
    for k in (0, 1):
        exact = exact_mode_error(ex, coarse, k).denominator(ex.omega)
        ref = reference_mode_error(coarse, fine, k).denominator(ex.omega)
        # the reference carries the fine error, roughly exact/8, in quadrature
        assert ref == pytest.approx(exact, rel=0.05)


def test_overall_error_adds_exact_tail(ex1_small):
    ex = get_example(1)
    head = sum(
        mode_weight(k, ex.T) * (e.grad_sq + k * ex.omega * e.l2_sq)
        for k in ex1_small.modes
        for e in [exact_mode_error(ex, ex1_small, k)]
    )
    total = overall_exact_error_sq(ex, ex1_small)
    assert total == pytest.approx(head + ex.exact_seminorm_tail_sq(ex1_small.N), rel=1e-14)
    assert overall_exact_error_sq(ex, ex1_small, full=True) > total


def test_exact_error_of_interpolant_is_first_order():
    ex = get_example(2)
    prof = ex.exact.profile
    errs = []
    for n in (8, 16, 32):
        sol = solve_all_modes(ex.spec(0), build_uniform_mesh(n))
        yc = ex.exact_modes([0])[0, 0]
        nodes = sol.mesh.nodes
        sol.modes[0].y.cos[:] = yc * prof(nodes[:, 0], nodes[:, 1])
        errs.append(math.sqrt(exact_mode_error(ex, sol, 0).grad_sq))
    assert np.all(np.abs(np.log2(np.array(errs[:-1]) / errs[1:]) - 1.0) < 0.1)
