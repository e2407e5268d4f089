"""Integrator and radial/cylindrical IVP checks against closed forms."""

import math

import numpy as np
import pytest

from gelfand_atlas.closed_forms import cylinder_log_cosh, fourth_order_hemisphere
from gelfand_atlas.errors import BlowUp, LostPositivity, ToleranceFailure
from gelfand_atlas.problems import ProblemSpec, make_problem
from gelfand_atlas.radial import (
    integrate_cylinder_ivp,
    integrate_radial_ivp,
    integrate_radial_with_sensitivity,
    taylor_coefficients,
)
from gelfand_atlas.rk45 import integrate

N5 = 5
LAM_Q5 = 105 / 16
US5 = fourth_order_hemisphere(5)
# center values of the n=5 hemisphere factor: u(0) = sqrt(2), Delta u(0) = n u''(0)
US5_CENTER = (math.sqrt(2.0), 5 * US5.eval4(0.0).d2)


# ---------------------------------------------------------------------------
# generic integrator
# ---------------------------------------------------------------------------

def test_rk45_exponential():
    res = integrate(lambda t, y: [y[0]], 0.0, 1.0, [1.0], rtol=1e-11, atol=1e-13)
    assert res.y_end[0] == pytest.approx(math.e, rel=1e-10)
    assert res.stats.steps > 5
    assert res.stats.nfev > 0
    # dense output hits interior points of each step
    for t in (0.199, 0.5001, 0.93):
        assert res(t)[0] == pytest.approx(math.exp(t), rel=1e-9)


def test_rk45_dense_output_order():
    # interpolation error shrinks with the tolerance
    errs = []
    ts = np.linspace(0.05, 2.95, 113)
    for tol in (1e-6, 1e-9, 1e-12):
        res = integrate(lambda t, y: [math.cos(t) * y[0]], 0.0, 3.0, [1.0],
                        rtol=tol, atol=tol * 1e-2)
        exact = np.exp(np.sin(ts))
        errs.append(np.max(np.abs(res.sample(ts)[0] - exact)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-10


def test_rk45_blowup_detected():
    # y' = y^2 from y(0)=1 blows up at t=1; float multiply overflows to inf
    # and the integrator converts the collapsing step into BlowUp
    with pytest.raises(BlowUp):
        integrate(lambda t, y: [y[0] * y[0]], 0.0, 2.0, [1.0], rtol=1e-9)


def test_rk45_rejects_bad_inputs():
    with pytest.raises(ValueError):
        integrate(lambda t, y: [0.0], 1.0, 0.0, [1.0])
    with pytest.raises(ValueError):
        integrate(lambda t, y: [0.0], 0.0, 1.0, [1.0], rtol=-1)


# ---------------------------------------------------------------------------
# radial fourth-order trajectories
# ---------------------------------------------------------------------------

def test_hemisphere_trajectory_matches_closed_form():
    p = make_problem(4, 5, lam=LAM_Q5)
    rs = np.linspace(0.0, 1.0, 257)
    traj = integrate_radial_ivp(p, US5_CENTER, tol=1e-11, grid=rs)
    exact = np.array([US5.eval4(float(r)).value for r in rs])
    assert np.max(np.abs(traj.states[0] - exact)) <= 1e-8
    # boundary rows of the closed form
    u1, du1, w1, _ = traj.end_state
    assert u1 == pytest.approx(1.0, abs=1e-9)
    assert du1 == pytest.approx(-0.5, abs=1e-9)
    assert w1 == pytest.approx(-1.75, abs=1e-8)


def test_lambda_zero_quadratic_exact():
    # lam = 0 makes the equation linear; the solution is n/4 - r^2/4 exactly
    p = make_problem(4, 5, lam=0.0)
    traj = integrate_radial_ivp(p, (1.25, -2.5), tol=1e-10,
                                grid=np.linspace(0, 1, 101))
    exact = 1.25 - 0.25 * traj.r**2
    assert np.max(np.abs(traj.states[0] - exact)) < 1e-12
    assert traj.end_state[0] == pytest.approx(1.0, abs=1e-12)
    assert traj.end_state[1] == pytest.approx(-0.5, abs=1e-12)


def test_second_order_exp_hemisphere():
    # -Delta u = e^{2u} with u(0) = ln 2 hits u(1) = 0
    p = ProblemSpec(2, 2, "exp2u", 1.0)
    traj = integrate_radial_ivp(p, (math.log(2.0),), tol=1e-10)
    assert abs(traj.end_state[0]) <= 1e-6
    assert traj.end_state[0] == pytest.approx(0.0, abs=1e-9)


def test_taylor_start_matches_closed_form():
    # the eps-start states agree with the hemisphere factor to O(eps^5)
    p = make_problem(4, 5, lam=LAM_Q5)
    traj = integrate_radial_ivp(p, US5_CENTER, tol=1e-10)
    eps = traj.eps
    j = US5.eval4(eps)
    st = traj.state_at(eps)
    assert st[0] == pytest.approx(j.value, abs=1e-14)
    assert st[1] == pytest.approx(j.d1, abs=1e-13)
    assert st[2] == pytest.approx(US5.laplacian(eps), abs=1e-12)


def test_taylor_coefficients_order2():
    p = ProblemSpec(2, 2, "exp2u", 1.0)
    u2, u4 = taylor_coefficients(p, (0.0,))
    # u2 = -g(0)/(2n) = -1/4, u4 = -g'(0) u2 / (4(n+2)) = 2*(1/4)/16
    assert u2 == pytest.approx(-0.25)
    assert u4 == pytest.approx(2 * 0.25 / 16)


def test_state_below_eps_uses_taylor():
    p = make_problem(4, 5, lam=LAM_Q5)
    traj = integrate_radial_ivp(p, US5_CENTER, tol=1e-10)
    st0 = traj.state_at(0.0)
    assert st0[0] == pytest.approx(US5_CENTER[0])
    assert st0[1] == 0.0
    assert st0[2] == pytest.approx(US5_CENTER[1])
    assert st0[3] == 0.0


def test_tolerance_convergence_monotone():
    p = make_problem(4, 5, lam=LAM_Q5)
    rs = np.linspace(0.0, 1.0, 65)
    ref = integrate_radial_ivp(p, US5_CENTER, tol=1e-13, grid=rs).states[0]
    devs = []
    for tol in (1e-5, 1e-7, 1e-9):
        got = integrate_radial_ivp(p, US5_CENTER, tol=tol, grid=rs).states[0]
        devs.append(np.max(np.abs(got - ref)))
    assert devs[0] > devs[1] > devs[2]


def test_lost_positivity_raised():
    p = make_problem(4, 5, lam=LAM_Q5)
    with pytest.raises(LostPositivity):
        integrate_radial_ivp(p, (0.5, -30.0), tol=1e-9)


def test_blowup_raised_on_radial():
    p = ProblemSpec(2, 2, "exp2u", 1.0)
    with pytest.raises(BlowUp):
        integrate_radial_ivp(p, (40.0,), tol=1e-9)


def test_center_value_validation():
    p = make_problem(4, 5, lam=LAM_Q5)
    with pytest.raises(ValueError):
        integrate_radial_ivp(p, (1.0,), tol=1e-9)
    with pytest.raises(ValueError):
        integrate_radial_ivp(p, (math.nan, 1.0), tol=1e-9)
    with pytest.raises(LostPositivity):
        integrate_radial_ivp(p, (-1.0, 0.0), tol=1e-9)


# ---------------------------------------------------------------------------
# variational equations
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("order,n,tag,lam,center,dirs", [
    (4, 5, "q_power", LAM_Q5, (1.5, -7.5), ("u0", "w0", "lam")),
    (4, 4, "exp4u", 5.0, (0.8, -9.0), ("u0", "w0", "lam")),
    (2, 2, "exp2u", 0.8, (0.4,), ("u0", "lam")),
    (2, 3, "scalar_power", 0.5, (0.3,), ("u0", "lam")),
])
def test_sensitivities_match_forward_differences(order, n, tag, lam, center, dirs):
    p = ProblemSpec(order, n, tag, lam)
    run = integrate_radial_with_sensitivity(p, center, tol=1e-11, directions=dirs)
    h = 1e-6
    for d in dirs:
        if d == "lam":
            pp = p.with_lambda(lam + h)
            pm = p.with_lambda(lam - h)
            up = integrate_radial_ivp(pp, center, tol=1e-11).end_state
            um = integrate_radial_ivp(pm, center, tol=1e-11).end_state
        else:
            idx = 0 if d == "u0" else 1
            cp = list(center)
            cm = list(center)
            cp[idx] += h
            cm[idx] -= h
            up = integrate_radial_ivp(p, cp, tol=1e-11).end_state
            um = integrate_radial_ivp(p, cm, tol=1e-11).end_state
        fd = [(a - b) / (2 * h) for a, b in zip(up, um)]
        got = run.cols[d]
        for a, b in zip(got, fd):
            assert a == pytest.approx(b, rel=2e-5, abs=2e-5)


# ---------------------------------------------------------------------------
# cylindrical trajectories
# ---------------------------------------------------------------------------

def test_cylinder_log_cosh_short_horizon():
    # exact initial data reproduces -ln cosh; horizon kept below the point
    # where the e^{2t} mode amplifies roundoff past 1e-8
    w = cylinder_log_cosh()
    prof = integrate_cylinder_ivp(6.0, -1.0, 0.0, T=5.0, tol=1e-12)
    exact = np.array([w.eval4(float(t)).value for t in prof.t])
    assert np.max(np.abs(prof.v - exact)) <= 1e-8
    assert prof.v1[-1] == pytest.approx(-math.tanh(5.0), abs=1e-7)


def test_cylinder_linear_case():
    # lam = 0: v = (c/4)(cosh 2t - 1) solves v'''' = 4 v'' with v2(0)=c
    c = 0.37
    prof = integrate_cylinder_ivp(0.0, c, 0.0, T=3.0, tol=1e-12)
    exact = c / 4 * (np.cosh(2 * prof.t) - 1.0)
    assert np.max(np.abs(prof.v - exact)) <= 1e-9


def test_cylinder_zero_curvature_start_diverges():
    # v''(0) = 0 violates the admissible far-field; the trajectory blows up
    # or v' never approaches -1
    try:
        prof = integrate_cylinder_ivp(6.0, 0.0, 0.0, T=20.0, tol=1e-9)
    except BlowUp:
        return
    assert abs(prof.v1[-1] + 1.0) > 0.5


def test_cylinder_profile_fourth_derivative():
    prof = integrate_cylinder_ivp(6.0, -1.0, 0.0, T=4.0, tol=1e-11)
    w = cylinder_log_cosh()
    exact4 = np.array([w.eval4(float(t)).d4 for t in prof.t])
    assert np.max(np.abs(prof.v4() - exact4)) <= 1e-6
