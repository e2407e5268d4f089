"""First-order reductions and initial-value integration in r and t.

The radial problems are integrated as first-order systems

    order 2:  (u, p)        with  p' = -lambda g(u) - (n-1) p / r
    order 4:  (u, p, w, q)  with  w = Delta u,
              p' = w - (n-1) p / r,  q' = lambda f(u) - (n-1) q / r

started at r = eps with a three-term even Taylor expansion whose
coefficients come from the equation itself, which removes the (n-1)/r
singular coefficient with O(eps^6) truncation error. Shooting needs the
derivative of the final state with respect to the center values (and
lambda); those sensitivities are integrated jointly via the variational
equations.

The cylindrical problem v'''' - 4 v'' = lambda e^{4v} is regular at t = 0
and is integrated directly, optionally with its 4x4 fundamental matrix for
multiple shooting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import BlowUp, LostPositivity
from .problems import Nonlinearity, ProblemSpec, _exp
from .rk45 import IntegratorStats, RKResult, integrate

__all__ = [
    "EPS_START",
    "OVERFLOW_GUARD",
    "Trajectory",
    "CylProfile",
    "taylor_coefficients",
    "integrate_radial_ivp",
    "integrate_radial_with_sensitivity",
    "integrate_cylinder_ivp",
    "cylinder_rhs",
    "cylinder_rhs_with_matrix",
]

EPS_START = 1e-4
OVERFLOW_GUARD = 1e12
POSITIVITY_FLOOR = 1e-10

_SENS_DIRECTIONS = ("u0", "w0", "lam")


# ---------------------------------------------------------------------------
# Taylor start at the center
# ---------------------------------------------------------------------------

def taylor_coefficients(p: ProblemSpec, center: Sequence[float]):
    """Even-series coefficients (u2, u4[, w2, w4]) from the equation.

    order 2: u2 = -lam g(u0) / (2n),  u4 = -lam g'(u0) u2 / (4(n+2))
    order 4: u2 = w0 / (2n), w2 = lam f(u0) / (2n),
             u4 = w2 / (4(n+2)), w4 = lam f'(u0) u2 / (4(n+2))
    """
    n, lam, nl = p.n, p.lam, p.f
    if p.order == 2:
        (u0,) = center
        u2 = -lam * nl.g(u0) / (2 * n)
        u4 = -lam * nl.dg(u0) * u2 / (4 * (n + 2))
        return u2, u4
    u0, w0 = center
    u2 = w0 / (2 * n)
    w2 = lam * nl.g(u0) / (2 * n)
    u4 = w2 / (4 * (n + 2))
    w4 = lam * nl.dg(u0) * u2 / (4 * (n + 2))
    return u2, u4, w2, w4


def _taylor_state(p: ProblemSpec, center, eps: float) -> List[float]:
    if p.order == 2:
        u2, u4 = taylor_coefficients(p, center)
        u0 = center[0]
        e2, e3, e4 = eps * eps, eps**3, eps**4
        return [u0 + u2 * e2 + u4 * e4, 2 * u2 * eps + 4 * u4 * e3]
    u2, u4, w2, w4 = taylor_coefficients(p, center)
    u0, w0 = center
    e2, e3, e4 = eps * eps, eps**3, eps**4
    return [
        u0 + u2 * e2 + u4 * e4, 2 * u2 * eps + 4 * u4 * e3,
        w0 + w2 * e2 + w4 * e4, 2 * w2 * eps + 4 * w4 * e3,
    ]


def _taylor_sensitivities(p: ProblemSpec, center, eps: float,
                          directions: Sequence[str]) -> List[float]:
    """Start values of the variational states: the Taylor start
    differentiated with respect to each requested direction."""
    n, lam, nl = p.n, p.lam, p.f
    e2, e3, e4 = eps * eps, eps**3, eps**4
    out: List[float] = []
    if p.order == 2:
        (u0,) = center
        u2, _ = taylor_coefficients(p, center)
        for d in directions:
            if d == "u0":
                du2 = -lam * nl.dg(u0) / (2 * n)
                du4 = -lam * (nl.d2g(u0) * u2 + nl.dg(u0) * du2) / (4 * (n + 2))
                base = 1.0
            elif d == "lam":
                du2 = -nl.g(u0) / (2 * n)
                du4 = -(nl.dg(u0) * u2 + lam * nl.dg(u0) * du2) / (4 * (n + 2))
                base = 0.0
            else:
                raise ValueError(f"order-2 sensitivity direction {d!r}")
            out += [base + du2 * e2 + du4 * e4, 2 * du2 * eps + 4 * du4 * e3]
        return out

    u0, w0 = center
    u2 = w0 / (2 * n)
    for d in directions:
        if d == "u0":
            du2 = 0.0
            dw2 = lam * nl.dg(u0) / (2 * n)
            du4 = dw2 / (4 * (n + 2))
            dw4 = lam * nl.d2g(u0) * u2 / (4 * (n + 2))
            bu, bw = 1.0, 0.0
        elif d == "w0":
            du2 = 1.0 / (2 * n)
            dw2 = 0.0
            du4 = 0.0
            dw4 = lam * nl.dg(u0) * du2 / (4 * (n + 2))
            bu, bw = 0.0, 1.0
        elif d == "lam":
            du2 = 0.0
            dw2 = nl.g(u0) / (2 * n)
            du4 = dw2 / (4 * (n + 2))
            dw4 = nl.dg(u0) * u2 / (4 * (n + 2))
            bu, bw = 0.0, 0.0
        else:
            raise ValueError(f"unknown sensitivity direction {d!r}")
        out += [
            bu + du2 * e2 + du4 * e4, 2 * du2 * eps + 4 * du4 * e3,
            bw + dw2 * e2 + dw4 * e4, 2 * dw2 * eps + 4 * dw4 * e3,
        ]
    return out


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def _radial_rhs(p: ProblemSpec, directions: Sequence[str] = ()):
    n, lam = p.n, p.lam
    nl = p.f
    nm1 = n - 1.0
    g, dg = nl.g, nl.dg
    want_lam = tuple(d == "lam" for d in directions)

    if p.order == 2:
        def rhs(r: float, y: List[float]) -> List[float]:
            u, pr = y[0], y[1]
            gv = g(u)
            dgv = dg(u) if directions else 0.0
            out = [pr, -lam * gv - nm1 * pr / r]
            for k, is_lam in enumerate(want_lam):
                du, dp = y[2 + 2 * k], y[3 + 2 * k]
                extra = -gv if is_lam else 0.0
                out += [dp, -lam * dgv * du - nm1 * dp / r + extra]
            return out
        return rhs

    def rhs4(r: float, y: List[float]) -> List[float]:
        u, pr, w, q = y[0], y[1], y[2], y[3]
        gv = g(u)
        dgv = dg(u) if directions else 0.0
        out = [pr, w - nm1 * pr / r, q, lam * gv - nm1 * q / r]
        for k, is_lam in enumerate(want_lam):
            i = 4 + 4 * k
            du, dp, dw, dq = y[i], y[i + 1], y[i + 2], y[i + 3]
            extra = gv if is_lam else 0.0
            out += [dp, dw - nm1 * dp / r, dq,
                    lam * dgv * du - nm1 * dq / r + extra]
        return out
    return rhs4


def _make_guard(p: ProblemSpec):
    lb = p.f.lower_bound

    def guard(t: float, y: List[float]) -> None:
        for v in y:
            if abs(v) > OVERFLOW_GUARD:
                raise BlowUp(t)
        if lb is not None and y[0] - lb < POSITIVITY_FLOOR:
            raise LostPositivity(t)
    return guard


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Radial trajectory on [0, 1] with dense output and Taylor center patch."""

    problem: ProblemSpec
    center: Tuple[float, ...]
    r: np.ndarray                 # output abscissae
    states: np.ndarray            # shape (order, len(r))
    result: RKResult = field(repr=False)
    eps: float = EPS_START

    @property
    def stats(self) -> IntegratorStats:
        return self.result.stats

    def state_at(self, r: float) -> List[float]:
        """State at any radius in [0, 1]; below eps the Taylor start is used."""
        if r < 0 or r > 1 + 1e-12:
            raise ValueError(f"radius {r} outside [0, 1]")
        if r >= self.eps:
            return self.result(min(r, self.result.t_end))
        return _taylor_state(self.problem, self.center, r)

    def sample(self, rs: Sequence[float]) -> np.ndarray:
        return np.array([self.state_at(float(r)) for r in rs], dtype=float).T

    @property
    def end_state(self) -> List[float]:
        return self.result.y_end


def integrate_radial_ivp(
    p: ProblemSpec,
    center_values: Sequence[float],
    tol: float = 1e-10,
    grid: Optional[Sequence[float]] = None,
) -> Trajectory:
    """Integrate the radial problem from its center values out to r = 1.

    ``center_values`` is (u(0),) for order 2 and (u(0), Delta u(0)) for
    order 4. Raises BlowUp past the overflow guard, LostPositivity when a
    positivity-constrained unknown hits its floor, ToleranceFailure when
    the requested accuracy is unreachable.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    center = tuple(float(v) for v in center_values)
    if len(center) != p.n_params:
        raise ValueError(
            f"expected {p.n_params} center values for order {p.order}")
    if not all(math.isfinite(v) for v in center):
        raise ValueError("center values must be finite")
    lb = p.f.lower_bound
    if lb is not None and center[0] <= lb:
        raise LostPositivity(0.0)

    y_eps = _taylor_state(p, center, EPS_START)
    res = integrate(
        _radial_rhs(p), EPS_START, 1.0, y_eps,
        rtol=tol, atol=max(tol * 1e-3, 1e-14),
        guard=_make_guard(p),
    )
    traj = Trajectory(p, center, np.array([]), np.array([[]]), res)
    rs = np.asarray(grid, dtype=float) if grid is not None else np.array(res.ts)
    traj.r = rs
    traj.states = traj.sample(rs)
    return traj


@dataclass
class SensitivityRun:
    """End state plus d(state)/d(direction) columns from one joint solve."""

    end: List[float]
    cols: dict
    result: RKResult = field(repr=False)


def integrate_radial_with_sensitivity(
    p: ProblemSpec,
    center_values: Sequence[float],
    tol: float = 1e-10,
    directions: Sequence[str] = (),
) -> SensitivityRun:
    """Base trajectory and variational states integrated jointly.

    ``directions`` is a subset of ("u0", "w0", "lam"); for order 2 only
    "u0" and "lam" are meaningful.
    """
    center = tuple(float(v) for v in center_values)
    m = 2 if p.order == 2 else 4
    for d in directions:
        if d not in _SENS_DIRECTIONS:
            raise ValueError(f"unknown direction {d!r}")
    y0 = _taylor_state(p, center, EPS_START)
    y0 += _taylor_sensitivities(p, center, EPS_START, directions)

    res = integrate(
        _radial_rhs(p, directions), EPS_START, 1.0, y0,
        rtol=tol, atol=max(tol * 1e-3, 1e-14),
        guard=_make_guard(p),
    )
    ye = res.y_end
    cols = {d: ye[m * (1 + k): m * (2 + k)] for k, d in enumerate(directions)}
    return SensitivityRun(ye[:m], cols, res)


# ---------------------------------------------------------------------------
# cylindrical problem
# ---------------------------------------------------------------------------

def cylinder_rhs(lam: float):
    def rhs(t: float, y: List[float]) -> List[float]:
        return [y[1], y[2], y[3], 4.0 * y[2] + lam * _exp(4.0 * y[0])]
    return rhs


def cylinder_rhs_with_matrix(lam: float):
    """State (v, v', v'', v''') followed by the 4x4 fundamental matrix in
    column-major order; M' = J M with J the linearization."""
    def rhs(t: float, y: List[float]) -> List[float]:
        e4v = _exp(4.0 * y[0])
        out = [y[1], y[2], y[3], 4.0 * y[2] + lam * e4v]
        c = 4.0 * lam * e4v
        for k in range(4):
            i = 4 + 4 * k
            d0, d1, d2, d3 = y[i], y[i + 1], y[i + 2], y[i + 3]
            out += [d1, d2, d3, 4.0 * d2 + c * d0]
        return out
    return rhs


@dataclass
class CylProfile:
    """Profile in the cylindrical variable with derivatives through order 3."""

    t: np.ndarray
    v: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray
    lam: float
    result: Optional[RKResult] = field(default=None, repr=False)

    def v4(self) -> np.ndarray:
        """Fourth derivative recovered from the equation."""
        return 4.0 * self.v2 + self.lam * np.exp(4.0 * self.v)

    @property
    def T(self) -> float:
        return float(self.t[-1])


def _cyl_guard(t: float, y: List[float]) -> None:
    for v in y[:4]:
        if abs(v) > OVERFLOW_GUARD:
            raise BlowUp(t)


def integrate_cylinder_ivp(
    lam: float,
    v2_0: float,
    v3_0: float,
    T: float = 20.0,
    tol: float = 1e-10,
    grid: Optional[Sequence[float]] = None,
) -> CylProfile:
    """Solve v'''' - 4 v'' = lam e^{4v}, v(0) = v'(0) = 0, given v''(0), v'''(0)."""
    if T <= 0 or tol <= 0:
        raise ValueError("require T > 0 and tol > 0")
    res = integrate(
        cylinder_rhs(lam), 0.0, float(T), [0.0, 0.0, v2_0, v3_0],
        rtol=tol, atol=max(tol * 1e-3, 1e-14),
        guard=_cyl_guard,
    )
    ts = (np.asarray(grid, dtype=float) if grid is not None
          else np.linspace(0.0, float(T), max(int(20 * T) + 1, 201)))
    y = res.sample(ts)
    return CylProfile(ts, y[0], y[1], y[2], y[3], float(lam), res)
