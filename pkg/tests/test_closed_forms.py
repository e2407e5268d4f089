"""Ground-truth checks for the closed-form profiles and constants."""

import math

import numpy as np
import pytest

from gelfand_atlas.closed_forms import (
    ConformalPower,
    Jet,
    closed_form,
    closed_form_eval,
    closed_form_residual,
    cylinder_log_cosh,
    fourth_order_hemisphere,
    gelfand_constants,
    lambda_zero_parabola,
    second_order_hemisphere,
)
from gelfand_atlas.errors import DomainError


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

def test_constants_n5():
    c = gelfand_constants(5)
    assert c.Q_rhs == pytest.approx(105 / 16)
    assert c.a1 == pytest.approx(-1.75)
    assert c.a2 == pytest.approx(-0.75)
    assert c.lambda_conj_4th == pytest.approx(125 / 16)
    assert c.lambda_star_2nd == pytest.approx(3.75)
    assert c.Q0 == pytest.approx(105 / 8)
    assert c.barrier_coeffs == (1.25, 0.25)


def test_constants_n4():
    c = gelfand_constants(4)
    assert c.Q_rhs == 6.0
    assert c.lambda_conj_4th == 8.0
    assert c.lambda_star_2nd == 2.0
    assert c.Q0 == pytest.approx(6.0)
    assert c.a1 is None and c.a2 is None


def test_constants_n2_n3():
    c2 = gelfand_constants(2)
    assert c2.lambda_star_2nd == 1.0
    assert c2.Q_rhs is None and c2.Q0 is None and c2.lambda_conj_4th is None
    c3 = gelfand_constants(3)
    assert c3.lambda_star_2nd == pytest.approx(0.75)
    assert c3.Q0 == pytest.approx(15 / 8)
    assert c3.Q_rhs is None and c3.lambda_conj_4th is None


@pytest.mark.parametrize("n", range(5, 13))
def test_constants_internal_relations(n):
    c = gelfand_constants(n)
    # Q_rhs = (n-4)/2 * Q0 and a1 < a2 for n >= 5
    assert c.Q_rhs == pytest.approx((n - 4) / 2 * c.Q0, rel=1e-15)
    assert c.a1 < c.a2 < 0


@pytest.mark.parametrize("bad", [1, 0, -3])
def test_constants_rejects_small_n(bad):
    with pytest.raises(ValueError):
        gelfand_constants(bad)


# ---------------------------------------------------------------------------
# evaluator spot values
# ---------------------------------------------------------------------------

def test_fourth_order_n5_spot_values():
    us = fourth_order_hemisphere(5)
    j0 = closed_form_eval(us, 0.0)
    assert j0.value == pytest.approx(math.sqrt(2), abs=1e-14)
    assert j0.d1 == 0.0
    j1 = closed_form_eval(us, 1.0)
    assert j1.value == pytest.approx(1.0, abs=1e-14)
    assert j1.d1 == pytest.approx(-0.5, abs=1e-14)
    # boundary Laplacian equals a1
    assert us.laplacian(1.0) == pytest.approx(gelfand_constants(5).a1, abs=1e-13)


@pytest.mark.parametrize("n", [5, 6, 7, 9])
def test_fourth_order_boundary_rows(n):
    us = fourth_order_hemisphere(n)
    j = us.eval4(1.0)
    assert j.value == pytest.approx(1.0, abs=1e-13)
    assert j.d1 == pytest.approx(-(n - 4) / 2, abs=1e-13)
    assert us.laplacian(1.0) == pytest.approx(-(n - 4) * (n + 2) / 4, abs=1e-12)


def test_fourth_order_n4_boundary():
    us = fourth_order_hemisphere(4)
    j = us.eval4(1.0)
    assert j.value == pytest.approx(0.0, abs=1e-15)
    assert j.d1 == pytest.approx(-1.0, abs=1e-15)
    # Delta u(1) = u''(1) + 3 u'(1) = 0 - 3 = -3
    assert us.laplacian(1.0) == pytest.approx(-3.0, abs=1e-14)


def test_fourth_order_n3_boundary():
    us = fourth_order_hemisphere(3)
    j = us.eval4(1.0)
    assert j.value == pytest.approx(1.0, abs=1e-14)
    assert j.d1 == pytest.approx(0.5, abs=1e-14)
    assert us.eval4(0.0).value == pytest.approx(math.sqrt(0.5), abs=1e-15)


def test_log_cosh_spot_values():
    w = cylinder_log_cosh()
    j = w.eval4(0.0)
    assert j == Jet(0.0, -0.0, -1.0, 0.0, 2.0)
    j5 = w.eval4(5.0)
    assert j5.value == pytest.approx(-math.log(math.cosh(5.0)))
    assert j5.d1 == pytest.approx(-math.tanh(5.0))


def test_second_order_hemisphere_boundary():
    # Dirichlet data at r = 1 for every dimension
    for n in (2, 3, 4, 5):
        u = second_order_hemisphere(n)
        assert u.eval4(1.0).value == pytest.approx(0.0, abs=1e-14)


def test_parabola_matches_fourth_order_bc():
    p = lambda_zero_parabola(5)
    assert p.eval4(0.0).value == pytest.approx(1.25)
    assert p.eval4(1.0).value == pytest.approx(1.0)
    assert p.eval4(1.0).d1 == pytest.approx(-0.5)
    # Delta u(0) = 2 n B = -n/2
    assert p.laplacian(0.0) == pytest.approx(-2.5)


def test_center_regularity():
    for cf in (fourth_order_hemisphere(5), fourth_order_hemisphere(4),
               second_order_hemisphere(3), lambda_zero_parabola(6)):
        j = cf.eval4(0.0)
        assert j.d1 == 0.0
        assert j.d3 == 0.0
        # Laplacian limit n u''(0)
        assert cf.laplacian(0.0) == pytest.approx(cf.n * j.d2, abs=1e-13)


# ---------------------------------------------------------------------------
# derivative formulas vs central differences (independent cross-check)
# ---------------------------------------------------------------------------

def _fd(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2 * h)


@pytest.mark.parametrize("cf", [
    fourth_order_hemisphere(5),
    fourth_order_hemisphere(7),
    fourth_order_hemisphere(4),
    fourth_order_hemisphere(3),
    second_order_hemisphere(2),
    second_order_hemisphere(5),
    cylinder_log_cosh(),
    lambda_zero_parabola(5),
])
def test_derivative_ladder_against_differencing(cf):
    xs = [0.15, 0.5, 0.85] if cf.kind != "cylinder_log_cosh" else [0.3, 1.0, 2.5]
    for x in xs:
        for k in range(4):
            lower = lambda y, k=k: cf.eval4(y)[k]
            got = cf.eval4(x)[k + 1]
            want = _fd(lower, x)
            assert got == pytest.approx(want, rel=2e-8, abs=2e-8)


def test_quotient_formulas_consistent():
    # analytic u'/r, u'''/r, (u''-u'/r)/r^2 agree with direct division
    for cf in (fourth_order_hemisphere(6), fourth_order_hemisphere(4)):
        for r in (0.2, 0.7, 1.0):
            j = cf.eval4(r)
            q1, q3, curv = cf._quotients(r)
            assert q1 == pytest.approx(j.d1 / r, rel=1e-12)
            assert q3 == pytest.approx(j.d3 / r, rel=1e-12)
            assert curv == pytest.approx((j.d2 - j.d1 / r) / r**2, rel=1e-9)


# ---------------------------------------------------------------------------
# PDE residuals
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_fourth_order_residual_tiny(n):
    us = fourth_order_hemisphere(n)
    grid = np.linspace(0.0, 1.0, 1001)
    assert closed_form_residual(us, n, grid) <= 1e-8


def test_n3_reversed_inequality_equality_case():
    us = fourth_order_hemisphere(3)
    grid = np.linspace(0.0, 1.0, 501)
    # Delta^2 u + (15/16) u^{-7} = 0 for the closed form
    assert closed_form_residual(us, 3, grid) <= 1e-10


def test_cylinder_identity_machine_zero():
    w = cylinder_log_cosh()
    grid = np.linspace(0.0, 20.0, 2001)
    assert closed_form_residual(w, 4, grid) <= 1e-12


def test_parabola_biharmonic_exact():
    p = lambda_zero_parabola(5)
    grid = np.linspace(0.0, 1.0, 101)
    assert closed_form_residual(p, 5, grid) == 0.0


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_second_order_residual_tiny(n):
    u = second_order_hemisphere(n)
    grid = np.linspace(0.0, 1.0, 501)
    assert closed_form_residual(u, n, grid) <= 1e-10


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------

def test_factory_and_errors():
    cf = closed_form("fourth_order_hemisphere_n5plus", 5)
    assert isinstance(cf, ConformalPower)
    with pytest.raises(ValueError):
        closed_form("nope", 5)
    with pytest.raises(DomainError):
        cf.eval4(1.5)
    with pytest.raises(DomainError):
        cylinder_log_cosh().eval4(-0.1)
    with pytest.raises(ValueError):
        closed_form_residual(cf, 6, [0.5])
