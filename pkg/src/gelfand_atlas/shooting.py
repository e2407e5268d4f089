"""Newton shooting for the radial boundary-value problems.

``solve_bvp`` iterates on the center values (u(0) for order 2,
(u(0), Delta u(0)) for order 4) with the Jacobian of the shooting map
integrated from the variational equations and an Armijo-damped update.
``find_all_solutions`` sweeps a box of seeds and deduplicates, which is
how the two-solution structure at fixed lambda is exhibited.

The half-line problem v'''' - 4 v'' = lambda e^{4v} is solved by multiple
shooting: its linearization carries an e^{2t} mode, so a single shot over
[0, 20] amplifies roundoff by e^{40} and cannot meet any sensible
tolerance; splitting into segments of a few units keeps every block of
the Newton system well conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import BlowUp, LostPositivity, NoConvergence, ToleranceFailure
from .problems import ProblemSpec
from .radial import (
    CylProfile,
    Trajectory,
    cylinder_rhs,
    cylinder_rhs_with_matrix,
    integrate_radial_ivp,
    integrate_radial_with_sensitivity,
)
from .rk45 import integrate

__all__ = [
    "RadialProfile",
    "RadialSolution",
    "solve_bvp",
    "find_all_solutions",
    "solve_cylinder_bvp",
    "boundary_residual",
    "DEFAULT_GRID_POINTS",
]

DEFAULT_GRID_POINTS = 513
MAX_NEWTON_ITERS = 50
DEDUP_TOL = 1e-6

_FAILURES = (BlowUp, LostPositivity, ToleranceFailure)


@dataclass
class RadialProfile:
    """Discretized radial function with u, u', Delta u and (Delta u)'."""

    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    lap: np.ndarray
    dlap: np.ndarray

    def interp(self, rs) -> np.ndarray:
        return np.interp(rs, self.r, self.u)


@dataclass
class RadialSolution:
    """A converged solution of one radial boundary-value problem."""

    problem: ProblemSpec
    profile: RadialProfile
    lam: float
    shooting_params: Tuple[float, ...]
    boundary_residual: float
    delta_u_at_1: float
    trajectory: Trajectory = field(repr=False)

    @property
    def u0(self) -> float:
        return self.shooting_params[0]

    def resample(self, rs) -> np.ndarray:
        """u on arbitrary radii through the dense output."""
        return self.trajectory.sample(rs)[0]


def boundary_residual(p: ProblemSpec, end_state: Sequence[float]) -> List[float]:
    """Boundary mismatch vector at r = 1."""
    if p.order == 2:
        return [end_state[0] - p.bc[0]]
    return [end_state[0] - p.bc[0], end_state[1] - p.bc[1]]


def _profile_from_trajectory(p: ProblemSpec, traj: Trajectory,
                             grid: np.ndarray) -> RadialProfile:
    states = traj.sample(grid)
    if p.order == 4:
        return RadialProfile(grid, states[0], states[1], states[2], states[3])
    nl = p.f
    u, du = states[0], states[1]
    lap = -p.lam * np.array([nl.g(v) for v in u])
    dlap = -p.lam * np.array([nl.dg(v) for v in u]) * du
    return RadialProfile(grid, u, du, lap, dlap)


def _solution_from_params(p: ProblemSpec, params: Tuple[float, ...],
                          resid_norm: float, int_tol: float,
                          grid_points: int) -> RadialSolution:
    grid = np.linspace(0.0, 1.0, grid_points)
    traj = integrate_radial_ivp(p, params, tol=int_tol, grid=grid)
    profile = _profile_from_trajectory(p, traj, grid)
    if p.f.lower_bound is not None and np.min(profile.u) <= p.f.lower_bound:
        raise LostPositivity(float(grid[np.argmin(profile.u)]))
    if p.order == 4:
        delta1 = float(profile.lap[-1])
    else:
        delta1 = float(-p.lam * p.f.g(profile.u[-1]))
    return RadialSolution(
        problem=p, profile=profile, lam=p.lam,
        shooting_params=tuple(params),
        boundary_residual=resid_norm, delta_u_at_1=delta1,
        trajectory=traj,
    )


def solve_bvp(
    p: ProblemSpec,
    seed: Sequence[float],
    tol: float = 1e-10,
    int_tol: float = 1e-11,
    max_iter: int = MAX_NEWTON_ITERS,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> RadialSolution:
    """Armijo-damped Newton on the center values.

    Converges when the boundary mismatch has max-norm <= tol. Raises
    NoConvergence when Newton stalls, and propagates BlowUp only if the
    very first trajectory already fails.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = [float(v) for v in seed]
    if len(x) != p.n_params:
        raise ValueError(f"seed must have {p.n_params} components")
    dirs = ("u0",) if p.order == 2 else ("u0", "w0")

    def residual_only(xt) -> List[float]:
        traj = integrate_radial_ivp(p, xt, tol=int_tol)
        return boundary_residual(p, traj.end_state)

    try:
        run = integrate_radial_with_sensitivity(p, x, tol=int_tol, directions=dirs)
    except _FAILURES as exc:
        raise NoConvergence(f"seed trajectory failed: {exc}") from exc
    F = boundary_residual(p, run.end)
    fnorm = max(abs(v) for v in F)

    for _ in range(max_iter):
        if fnorm <= tol:
            return _solution_from_params(p, tuple(x), fnorm, int_tol, grid_points)
        J = np.array([[run.cols[d][i] for d in dirs]
                      for i in range(len(F))])
        try:
            dx = np.linalg.solve(J, np.array(F))
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("singular shooting Jacobian") from exc

        alpha = 1.0
        accepted = False
        while alpha >= 2.0**-12:
            xt = [xi - alpha * di for xi, di in zip(x, dx)]
            try:
                Ft = residual_only(xt)
            except _FAILURES:
                alpha *= 0.5
                continue
            ftnorm = max(abs(v) for v in Ft)
            if ftnorm <= (1.0 - 1e-4 * alpha) * fnorm or ftnorm <= tol:
                x, fnorm = xt, ftnorm
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            raise NoConvergence(
                f"Newton stalled at residual {fnorm:.3e} (tol {tol:g})")
        if fnorm <= tol:
            return _solution_from_params(p, tuple(x), fnorm, int_tol, grid_points)
        try:
            run = integrate_radial_with_sensitivity(
                p, x, tol=int_tol, directions=dirs)
        except _FAILURES as exc:
            raise NoConvergence(f"trajectory failed near iterate: {exc}") from exc
        F = boundary_residual(p, run.end)
        fnorm = max(abs(v) for v in F)

    raise NoConvergence(
        f"no convergence in {max_iter} iterations (residual {fnorm:.3e})")


def find_all_solutions(
    p: ProblemSpec,
    seed_box: Sequence[Tuple[float, float]],
    tol: float = 1e-10,
    per_axis: int = 7,
    int_tol: float = 1e-11,
) -> List[RadialSolution]:
    """Seed sweep over a box of center values; deduplicated, sorted by u(0).

    Solutions closer than 1e-6 in center-value space are merged. An empty
    list is a legitimate outcome (no solution at this lambda).
    """
    if len(seed_box) != p.n_params:
        raise ValueError(f"seed_box must have {p.n_params} axis ranges")
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in seed_box]
    seeds = (
        [(a,) for a in axes[0]] if p.n_params == 1
        else [(a, b) for a in axes[0] for b in axes[1]]
    )
    found: List[RadialSolution] = []
    for seed in seeds:
        try:
            sol = solve_bvp(p, seed, tol=tol, int_tol=int_tol)
        except (NoConvergence, *_FAILURES):
            continue
        if any(max(abs(a - b) for a, b in
                   zip(sol.shooting_params, other.shooting_params)) < DEDUP_TOL
               for other in found):
            continue
        found.append(sol)
    found.sort(key=lambda s: s.u0)
    return found


# ---------------------------------------------------------------------------
# cylindrical boundary-value problem (multiple shooting)
# ---------------------------------------------------------------------------

def _default_cyl_seed(lam: float) -> Tuple[float, float]:
    # the conserved quantity pins v''(0)^2 = 4 - lam/2 on the extremal orbit
    return (-math.sqrt(max(4.0 - lam / 2.0, 0.04)), 0.0)


def _init_nodes(lam: float, seed: Tuple[float, float], nodes: np.ndarray,
                int_tol: float) -> List[List[float]]:
    """Initial interior states from the seed trajectory, with a linear
    slope -1 tail wherever the unstable mode has already taken over."""
    states: List[List[float]] = []
    y = [0.0, 0.0, seed[0], seed[1]]
    ok = True
    for k in range(len(nodes) - 1):
        if ok:
            try:
                res = integrate(cylinder_rhs(lam), float(nodes[k]),
                                float(nodes[k + 1]), y,
                                rtol=max(int_tol, 1e-9), atol=1e-12,
                                guard=lambda t, yy: _cap_guard(t, yy),
                                store_dense=False)
                y = res.y_end
            except (BlowUp, ToleranceFailure):
                ok = False
        if not ok or abs(y[1] + 1.0) > 2.0:
            ok = False
            prev = states[-1] if states else [0.0, 0.0, seed[0], seed[1]]
            dt = float(nodes[k + 1] - nodes[k])
            y = [prev[0] - dt, -1.0, 0.0, 0.0]
        states.append(list(y))
    return states[:-1] if len(states) > 1 else []


def _cap_guard(t: float, y: List[float]) -> None:
    for v in y[:4]:
        if abs(v) > 1e6:
            raise BlowUp(t)


def solve_cylinder_bvp(
    lam: float,
    T: float = 20.0,
    seed: Optional[Tuple[float, float]] = None,
    tol: float = 1e-9,
    n_segments: Optional[int] = None,
    int_tol: float = 1e-11,
    require_v3_nonneg: bool = False,
    max_iter: int = MAX_NEWTON_ITERS,
) -> CylProfile:
    """Multiple-shooting Newton for v'''' - 4 v'' = lam e^{4v} on [0, T].

    Boundary data: v(0) = v'(0) = 0 with far-field targets v'(T) = -1 and
    v''(T) = 0. Unknowns are (v''(0), v'''(0)) plus the full state at the
    interior matching nodes. With ``require_v3_nonneg`` the converged
    solution must satisfy v'''(0) >= -tol; one retry from the canonical
    seed is made before giving up.
    """
    if T < 10:
        raise ValueError("far-field truncation requires T >= 10")
    if seed is None:
        seed = _default_cyl_seed(lam)
    K = n_segments if n_segments is not None else max(4, int(math.ceil(T / 2.5)))
    nodes = np.linspace(0.0, float(T), K + 1)

    interior = _init_nodes(lam, seed, nodes, int_tol)
    # unknown vector: (v2_0, v3_0) then 4 per interior node
    X = np.array([seed[0], seed[1]] + [v for st in interior for v in st])
    n_unknowns = 2 + 4 * (K - 1)
    assert X.size == n_unknowns

    def seg_starts(Xv: np.ndarray) -> List[List[float]]:
        starts = [[0.0, 0.0, Xv[0], Xv[1]]]
        for k in range(K - 1):
            starts.append(list(Xv[2 + 4 * k: 6 + 4 * k]))
        return starts

    def residual_vec(Xv: np.ndarray, with_matrix: bool):
        starts = seg_starts(Xv)
        res = np.zeros(n_unknowns)
        mats: List[np.ndarray] = []
        for k in range(K):
            y0 = list(starts[k])
            if with_matrix:
                y0 += [1.0 if i % 5 == 0 else 0.0 for i in range(16)]
                rhs = cylinder_rhs_with_matrix(lam)
            else:
                rhs = cylinder_rhs(lam)
            r = integrate(rhs, float(nodes[k]), float(nodes[k + 1]), y0,
                          rtol=int_tol, atol=1e-13,
                          guard=_cap_guard, store_dense=False)
            e = r.y_end
            if with_matrix:
                mats.append(np.array(e[4:]).reshape(4, 4, order="F"))
            if k < K - 1:
                res[4 * k: 4 * k + 4] = [e[i] - starts[k + 1][i] for i in range(4)]
            else:
                res[-2] = e[1] + 1.0
                res[-1] = e[2]
        return res, mats

    def assemble_jacobian(mats: List[np.ndarray]) -> np.ndarray:
        J = np.zeros((n_unknowns, n_unknowns))
        # start of segment 0 depends on (v2_0, v3_0) through rows 2 and 3
        S0 = np.zeros((4, 2))
        S0[2, 0] = 1.0
        S0[3, 1] = 1.0
        for k in range(K):
            dstart = mats[0] @ S0 if k == 0 else mats[k]
            cols = slice(0, 2) if k == 0 else slice(2 + 4 * (k - 1), 6 + 4 * (k - 1))
            if k < K - 1:
                rows = slice(4 * k, 4 * k + 4)
                J[rows, cols] = dstart
                J[rows, 2 + 4 * k: 6 + 4 * k] -= np.eye(4)
            else:
                J[-2:, cols] = dstart[1:3, :]
        return J

    try:
        F, mats = residual_vec(X, with_matrix=True)
    except (BlowUp, ToleranceFailure) as exc:
        raise NoConvergence(f"initial cylinder trajectory failed: {exc}") from exc
    fnorm = float(np.max(np.abs(F)))

    for _ in range(max_iter):
        if fnorm <= tol:
            break
        J = assemble_jacobian(mats)
        try:
            dx = np.linalg.solve(J, F)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("singular multiple-shooting Jacobian") from exc
        alpha, accepted = 1.0, False
        while alpha >= 2.0**-12:
            Xt = X - alpha * dx
            try:
                Ft, _ = residual_vec(Xt, with_matrix=False)
            except (BlowUp, ToleranceFailure):
                alpha *= 0.5
                continue
            ftnorm = float(np.max(np.abs(Ft)))
            if ftnorm <= (1.0 - 1e-4 * alpha) * fnorm or ftnorm <= tol:
                X, fnorm = Xt, ftnorm
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            raise NoConvergence(
                f"cylinder Newton stalled at residual {fnorm:.3e}")
        if fnorm <= tol:
            break
        F, mats = residual_vec(X, with_matrix=True)
        fnorm = float(np.max(np.abs(F)))
    else:
        raise NoConvergence(
            f"cylinder Newton: no convergence in {max_iter} iterations")

    if require_v3_nonneg and X[1] < -max(tol, 1e-8):
        if seed != _default_cyl_seed(lam):
            return solve_cylinder_bvp(
                lam, T=T, seed=None, tol=tol, n_segments=n_segments,
                int_tol=int_tol, require_v3_nonneg=True, max_iter=max_iter)
        raise NoConvergence(
            f"converged with v'''(0) = {X[1]:.3e} < 0 under the "
            "nonnegativity constraint")

    # assemble the profile from per-segment dense output
    starts = seg_starts(X)
    ts_all: List[float] = []
    cols: List[List[float]] = []
    for k in range(K):
        r = integrate(cylinder_rhs(lam), float(nodes[k]), float(nodes[k + 1]),
                      starts[k], rtol=int_tol, atol=1e-13, guard=_cap_guard)
        span = np.linspace(float(nodes[k]), float(nodes[k + 1]),
                           max(int(20 * (nodes[k + 1] - nodes[k])) + 1, 21))
        if k > 0:
            span = span[1:]
        for t in span:
            ts_all.append(float(t))
            cols.append(r(float(t)))
    arr = np.array(cols).T
    return CylProfile(np.array(ts_all), arr[0], arr[1], arr[2], arr[3],
                      float(lam), None)
