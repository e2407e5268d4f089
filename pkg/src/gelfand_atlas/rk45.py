"""Adaptive embedded Runge-Kutta 5(4) integrator with dense output.

Dormand-Prince coefficients, error-scaled step control and the standard
quartic interpolant. States are plain Python lists of floats: the systems
integrated here have at most ~20 components, where list arithmetic beats
array overhead by an order of magnitude, and branch tracing lives inside
this loop.

Blow-up handling is part of the contract: callers may pass a ``guard``
that inspects every accepted state and raises (``BlowUp``,
``LostPositivity``). Non-finite right-hand sides are treated as entering a
blow-up region: the step is retried smaller and ``BlowUp`` is raised once
the step size collapses.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import BlowUp, ToleranceFailure

__all__ = ["IntegratorStats", "RKResult", "integrate"]

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# b - b*: weights of the embedded error estimate
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# dense-output interpolant, y(t+theta*h) = y + h * sum_i K_i * P_i(theta)
_P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_SAFETY = 0.9


@dataclass
class IntegratorStats:
    steps: int = 0
    rejected: int = 0
    nfev: int = 0
    max_error_estimate: float = 0.0


class RKResult:
    """Accepted mesh, states, statistics and a dense interpolant."""

    def __init__(self, ts: List[float], ys: List[List[float]],
                 segments: list, stats: IntegratorStats):
        self.ts = ts
        self.ys = ys
        self._segments = segments  # (t0, h, y0, K) per accepted step
        self.stats = stats

    @property
    def t_end(self) -> float:
        return self.ts[-1]

    @property
    def y_end(self) -> List[float]:
        return self.ys[-1]

    def __call__(self, t: float) -> List[float]:
        """Interpolated state at t inside the integrated span."""
        if not self._segments:
            raise ValueError("dense output was not stored")
        t0 = self.ts[0]
        t1 = self.ts[-1]
        if not (min(t0, t1) - 1e-12 <= t <= max(t0, t1) + 1e-12):
            raise ValueError(f"t={t} outside integrated span [{t0}, {t1}]")
        idx = min(bisect_right(self.ts, t) - 1, len(self._segments) - 1)
        idx = max(idx, 0)
        ts0, h, y0, K = self._segments[idx]
        theta = (t - ts0) / h
        m = len(y0)
        out = list(y0)
        t2 = theta * theta
        powers = (theta, t2, t2 * theta, t2 * t2)
        for i in range(7):
            pi = _P[i]
            w = h * (pi[0] * powers[0] + pi[1] * powers[1]
                     + pi[2] * powers[2] + pi[3] * powers[3])
            if w != 0.0:
                Ki = K[i]
                for j in range(m):
                    out[j] += w * Ki[j]
        return out

    def sample(self, ts: Sequence[float]) -> np.ndarray:
        """States at the given abscissae, shape (n_components, len(ts))."""
        cols = [self(float(t)) for t in ts]
        return np.array(cols, dtype=float).T


def integrate(
    f: Callable[[float, List[float]], List[float]],
    t0: float,
    t1: float,
    y0: Sequence[float],
    rtol: float = 1e-9,
    atol: float = 1e-12,
    guard: Optional[Callable[[float, List[float]], None]] = None,
    max_step: Optional[float] = None,
    first_step: Optional[float] = None,
    store_dense: bool = True,
) -> RKResult:
    """Integrate y' = f(t, y) from t0 to t1 (forward only).

    ``guard(t, y)`` is invoked on every accepted state and may raise to
    abort (the exception propagates). Raises ``ToleranceFailure`` when the
    step size underflows with finite arithmetic, ``BlowUp`` when it
    underflows because the right-hand side stopped being finite.
    """
    if not t1 > t0:
        raise ValueError("forward integration requires t1 > t0")
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")

    y = [float(v) for v in y0]
    m = len(y)
    t = float(t0)
    span = t1 - t0
    hmax = max_step if max_step is not None else span
    h = first_step if first_step is not None else min(hmax, 1e-2 * span)

    stats = IntegratorStats()
    ts = [t]
    ys = [list(y)]
    segments: list = []

    k0 = f(t, y)
    stats.nfev += 1
    if not all(math.isfinite(v) for v in k0):
        raise BlowUp(t, "right-hand side not finite at the initial state")

    K: List[List[float]] = [k0] + [[0.0] * m for _ in range(6)]
    nonfinite_streak = 0

    while t < t1:
        h = min(h, t1 - t, hmax)
        if h < 16 * math.ulp(max(abs(t), 1.0)):
            if nonfinite_streak > 0 or any(abs(v) > 1e10 for v in y):
                raise BlowUp(t)
            raise ToleranceFailure(
                f"step size underflow at t={t:.6g} (rtol={rtol:g})")

        finite = True
        for i in range(1, 7):
            ai = _A[i]
            yi = list(y)
            for l in range(i):
                w = h * ai[l]
                if w != 0.0:
                    Kl = K[l]
                    for j in range(m):
                        yi[j] += w * Kl[j]
            Ki = f(t + _C[i] * h, yi)
            stats.nfev += 1
            if not all(math.isfinite(v) for v in Ki):
                finite = False
                break
            K[i] = Ki

        if not finite:
            nonfinite_streak += 1
            stats.rejected += 1
            h *= 0.25
            continue
        nonfinite_streak = 0

        # 5th-order solution (stage 6 state) and embedded error
        ynew = list(y)
        for i in range(7):
            w = h * _B[i]
            if w != 0.0:
                Ki = K[i]
                for j in range(m):
                    ynew[j] += w * Ki[j]

        err_sq = 0.0
        err_abs = 0.0
        for j in range(m):
            e = 0.0
            for i in range(7):
                if _E[i] != 0.0:
                    e += _E[i] * K[i][j]
            e *= h
            sc = atol + rtol * max(abs(y[j]), abs(ynew[j]))
            q = abs(e) / sc
            if q > 1e100:
                # saturate instead of overflowing in q**2
                err_sq = math.inf
                err_abs = max(err_abs, abs(e))
                break
            err_sq += q * q
            err_abs = max(err_abs, abs(e))
        err = math.sqrt(err_sq / m)

        if err <= 1.0:
            if store_dense:
                segments.append((t, h, y, [list(k) for k in K]))
            t += h
            y = ynew
            ts.append(t)
            ys.append(list(y))
            stats.steps += 1
            stats.max_error_estimate = max(stats.max_error_estimate, err_abs)
            if guard is not None:
                guard(t, y)
            # FSAL: stage 7 was evaluated at (t+h, ynew)
            K[0] = K[6]
            factor = _MAX_FACTOR if err == 0.0 else min(
                _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** -0.2))
        else:
            stats.rejected += 1
            factor = max(_MIN_FACTOR, _SAFETY * err ** -0.2)
        h *= factor

    return RKResult(ts, ys, segments, stats)
