"""Closed-form reference profiles and the constants attached to them.

Everything here is evaluated from hand-written derivative formulas (no
numerical differencing), because these profiles are the ground truth that the
integrators, shooting solvers, iteration schemes and curvature routines are
checked against. The radial Laplacian ``u'' + (n-1)u'/r`` and bilaplacian are
supplied with the singular quotients ``u'/r``, ``u'''/r`` and
``(u'' - u'/r)/r^2`` written out analytically, so r = 0 needs no special
casing.

Profile families:

* ``(2/(1+r^2))^c + shift`` covers the fourth-order hemisphere factors for
  n >= 5 (c = (n-4)/2), the n = 3 factor (c = -1/2), and the second-order
  spherical-cap factor for n >= 3 (c = (n-2)/2, shift = -1).
* ``ln(2/(1+r^2))`` covers n = 4 (fourth order) and n = 2 (second order).
* ``-ln cosh t`` is the extremal profile in the cylindrical variable.
* ``A + B r^2`` is the exact solution of the fourth-order problem at
  lambda = 0 and doubles as the lower barrier ``n/4 - (n-4) r^2 / 4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .errors import DomainError

__all__ = [
    "GelfandConstants",
    "gelfand_constants",
    "Jet",
    "ClosedForm",
    "ConformalPower",
    "LogConformal",
    "LogCosh",
    "Parabola",
    "closed_form",
    "closed_form_eval",
    "closed_form_residual",
    "second_order_hemisphere",
    "fourth_order_hemisphere",
    "cylinder_log_cosh",
    "lambda_zero_parabola",
    "KINDS",
]


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GelfandConstants:
    """Reference constants of the hemisphere/Gelfand family at dimension n.

    Fields that are not defined at a given dimension are ``None`` rather
    than zero.
    """

    n: int
    Q_rhs: Optional[float]          # fourth-order RHS constant (6 at n=4)
    Q0: Optional[float]             # round-sphere Q-curvature (n-2)n(n+2)/8
    a1: Optional[float]             # admissible Delta u(1), minimal branch
    a2: Optional[float]             # admissible Delta u(1), second branch
    lambda_star_2nd: float          # second-order extremal
    lambda_conj_4th: Optional[float]  # conjectured fourth-order extremal
    barrier_coeffs: Optional[Tuple[float, float]]  # (n/4, (n-4)/4)


def gelfand_constants(n: int) -> GelfandConstants:
    """All closed-form constants of the problem family at dimension ``n``.

    * second-order extremal: 1 at n=2, (n-2)n/4 for n >= 3
    * fourth-order RHS constant: (n-4)(n-2)n(n+2)/16 for n >= 5, 6 at n=4
    * admissible boundary Laplacian values (n >= 5):
      a1 = -(n-4)(n+2)/4, a2 = -(n-4)(n-2)/4
    * conjectured fourth-order extremal: n^3(n-4)/16 for n >= 5, 8 at n=4
    """
    if not isinstance(n, (int, np.integer)) or n <= 1:
        raise ValueError(f"dimension must be an integer >= 2, got {n!r}")
    n = int(n)

    if n == 4:
        q_rhs: Optional[float] = 6.0
    elif n >= 5:
        q_rhs = (n - 4) * (n - 2) * n * (n + 2) / 16
    else:
        q_rhs = None

    q0 = (n - 2) * n * (n + 2) / 8 if n >= 3 else None

    if n >= 5:
        a1: Optional[float] = -(n - 4) * (n + 2) / 4
        a2: Optional[float] = -(n - 4) * (n - 2) / 4
    else:
        a1 = a2 = None

    lam2 = 1.0 if n == 2 else (n - 2) * n / 4

    if n == 4:
        lam4: Optional[float] = 8.0
    elif n >= 5:
        lam4 = n**3 * (n - 4) / 16
    else:
        lam4 = None

    barrier = (n / 4, (n - 4) / 4) if n >= 4 else None

    return GelfandConstants(
        n=n, Q_rhs=q_rhs, Q0=q0, a1=a1, a2=a2,
        lambda_star_2nd=lam2, lambda_conj_4th=lam4, barrier_coeffs=barrier,
    )


# ---------------------------------------------------------------------------
# profile evaluators
# ---------------------------------------------------------------------------

class Jet(NamedTuple):
    """Value and derivatives up to order four at a single point."""

    value: float
    d1: float
    d2: float
    d3: float
    d4: float


KIND_SECOND_ORDER = "second_order_hemisphere"
KIND_FOURTH_N5 = "fourth_order_hemisphere_n5plus"
KIND_FOURTH_N4 = "fourth_order_hemisphere_n4"
KIND_FOURTH_N3 = "fourth_order_n3"
KIND_CYLINDER = "cylinder_log_cosh"
KIND_PARABOLA = "lambda_zero_parabola"

KINDS = (
    KIND_SECOND_ORDER,
    KIND_FOURTH_N5,
    KIND_FOURTH_N4,
    KIND_FOURTH_N3,
    KIND_CYLINDER,
    KIND_PARABOLA,
)


class ClosedForm:
    """Common interface: an evaluator with analytic derivatives to order 4.

    Radial forms live on [0, 1] and additionally expose the radial Laplacian
    and bilaplacian; the cylindrical form lives on [0, inf).
    """

    kind: str = ""
    n: int = 0
    domain: Tuple[float, float] = (0.0, 1.0)

    def eval4(self, x: float) -> Jet:
        raise NotImplementedError

    def __call__(self, x: float) -> float:
        return self.eval4(x).value

    def _check_domain(self, x: float) -> None:
        lo, hi = self.domain
        if not (lo <= x <= hi):
            raise DomainError(
                f"{self.kind}: x={x:.6g} outside domain [{lo:.3g}, {hi:.3g}]"
            )

    # radial operators; overridden by the radial families
    def laplacian(self, r: float) -> float:
        raise NotImplementedError

    def bilaplacian(self, r: float) -> float:
        raise NotImplementedError

    def pde_residual(self, x: float) -> float:
        """Residual of the defining equation at a single point."""
        raise NotImplementedError


class _RadialForm(ClosedForm):
    """Radial profile on the unit ball; derived classes supply the singular
    quotients d1/r, d3/r and (d2 - d1/r)/r^2 analytically."""

    domain = (0.0, 1.0)

    def _quotients(self, r: float) -> Tuple[float, float, float]:
        """(u'/r, u'''/r, (u'' - u'/r)/r^2) as analytic expressions."""
        raise NotImplementedError

    def laplacian(self, r: float) -> float:
        self._check_domain(r)
        j = self.eval4(r)
        d1_over_r = self._quotients(r)[0]
        return j.d2 + (self.n - 1) * d1_over_r

    def bilaplacian(self, r: float) -> float:
        # Delta^2 u = u'''' + 2(n-1) u'''/r + (n-1)(n-3) (u'' - u'/r)/r^2
        self._check_domain(r)
        n = self.n
        j = self.eval4(r)
        _, d3_over_r, curv = self._quotients(r)
        return j.d4 + 2 * (n - 1) * d3_over_r + (n - 1) * (n - 3) * curv


class ConformalPower(_RadialForm):
    """u(r) = (2/(1+r^2))^c + shift."""

    def __init__(self, c: float, n: int, kind: str, shift: float = 0.0):
        self.c = float(c)
        self.n = int(n)
        self.kind = kind
        self.shift = float(shift)
        self._K = 2.0**self.c

    def eval4(self, r: float) -> Jet:
        self._check_domain(r)
        c, K = self.c, self._K
        s = 1.0 + r * r
        p1 = s ** (-c - 1)
        p2 = p1 / s
        p3 = p2 / s
        p4 = p3 / s
        a = -2.0 * c * K
        u = K * s**(-c) + self.shift
        d1 = a * r * p1
        d2 = a * (p1 - 2 * (c + 1) * r * r * p2)
        d3 = a * (-6 * (c + 1) * r * p2 + 4 * (c + 1) * (c + 2) * r**3 * p3)
        d4 = a * (-6 * (c + 1) * p2 + 24 * (c + 1) * (c + 2) * r * r * p3
                  - 8 * (c + 1) * (c + 2) * (c + 3) * r**4 * p4)
        return Jet(u, d1, d2, d3, d4)

    def _quotients(self, r: float) -> Tuple[float, float, float]:
        c, K = self.c, self._K
        s = 1.0 + r * r
        p1 = s ** (-c - 1)
        p2 = p1 / s
        p3 = p2 / s
        a = -2.0 * c * K
        d1_over_r = a * p1
        d3_over_r = a * (-6 * (c + 1) * p2 + 4 * (c + 1) * (c + 2) * r * r * p3)
        curv = 4.0 * c * K * (c + 1) * p2      # (u'' - u'/r)/r^2
        return d1_over_r, d3_over_r, curv


class LogConformal(_RadialForm):
    """u(r) = ln(2/(1+r^2))."""

    def __init__(self, n: int, kind: str):
        self.n = int(n)
        self.kind = kind

    def eval4(self, r: float) -> Jet:
        self._check_domain(r)
        s = 1.0 + r * r
        s2 = s * s
        s3 = s2 * s
        s4 = s3 * s
        u = math.log(2.0 / s)
        d1 = -2 * r / s
        d2 = -2 / s + 4 * r * r / s2
        d3 = 12 * r / s2 - 16 * r**3 / s3
        d4 = 12 / s2 - 96 * r * r / s3 + 96 * r**4 / s4
        return Jet(u, d1, d2, d3, d4)

    def _quotients(self, r: float) -> Tuple[float, float, float]:
        s = 1.0 + r * r
        s2 = s * s
        s3 = s2 * s
        return -2 / s, 12 / s2 - 16 * r * r / s3, 4 / s2


class LogCosh(ClosedForm):
    """w(t) = -ln cosh t on the half-cylinder."""

    kind = KIND_CYLINDER
    domain = (0.0, math.inf)

    def __init__(self, n: int = 4):
        self.n = int(n)

    def eval4(self, t: float) -> Jet:
        self._check_domain(t)
        th = math.tanh(t)
        # sech^2 computed from tanh to stay accurate for large t
        sech2 = 1.0 - th * th
        w = -math.log(math.cosh(t)) if t < 350 else math.log(2.0) - t
        d1 = -th
        d2 = -sech2
        d3 = 2 * sech2 * th
        d4 = -4 * sech2 * th * th + 2 * sech2 * sech2
        return Jet(w, d1, d2, d3, d4)

    def pde_residual(self, t: float) -> float:
        # w'''' - 4 w'' - 6 e^{4w}; e^{4w} = sech^4 t exactly
        j = self.eval4(t)
        sech2 = -j.d2
        return j.d4 - 4 * j.d2 - 6 * sech2 * sech2


class Parabola(_RadialForm):
    """u(r) = A + B r^2, the exact fourth-order solution at lambda = 0."""

    kind = KIND_PARABOLA

    def __init__(self, a: float, b: float, n: int):
        self.a = float(a)
        self.b = float(b)
        self.n = int(n)

    def eval4(self, r: float) -> Jet:
        self._check_domain(r)
        return Jet(self.a + self.b * r * r, 2 * self.b * r, 2 * self.b, 0.0, 0.0)

    def _quotients(self, r: float) -> Tuple[float, float, float]:
        return 2 * self.b, 0.0, 0.0

    def pde_residual(self, r: float) -> float:
        return self.bilaplacian(r)


# ---------------------------------------------------------------------------
# factories and residuals
# ---------------------------------------------------------------------------

def second_order_hemisphere(n: int) -> ClosedForm:
    """Extremal profile of the second-order problem at lambda*.

    n = 2: u = ln(2/(1+r^2)) with -Delta u = e^{2u};
    n >= 3: u = (2/(1+r^2))^{(n-2)/2} - 1 with -Delta u = lambda* (1+u)^{(n+2)/(n-2)}.
    """
    if n == 2:
        cf: ClosedForm = LogConformal(2, KIND_SECOND_ORDER)
    elif n >= 3:
        cf = ConformalPower((n - 2) / 2, n, KIND_SECOND_ORDER, shift=-1.0)
    else:
        raise ValueError("second-order family needs n >= 2")

    lam = gelfand_constants(n).lambda_star_2nd

    if n == 2:
        def residual(r: float, _cf=cf, _lam=lam) -> float:
            return _cf.laplacian(r) + _lam * math.exp(2 * _cf.eval4(r).value)
    else:
        p = (n + 2) / (n - 2)

        def residual(r: float, _cf=cf, _lam=lam, _p=p) -> float:
            return _cf.laplacian(r) + _lam * (1.0 + _cf.eval4(r).value) ** _p

    cf.pde_residual = residual  # type: ignore[method-assign]
    return cf


def fourth_order_hemisphere(n: int) -> ClosedForm:
    """Hemisphere factor of the fourth-order problem.

    n >= 5: u = (2/(1+r^2))^{(n-4)/2}, Delta^2 u = Q u^{(n+4)/(n-4)};
    n = 4:  u = ln(2/(1+r^2)),         Delta^2 u = 6 e^{4u};
    n = 3:  u = sqrt((1+r^2)/2), the equality case of the reversed inequality,
            handled by the same power family with c = -1/2.
    """
    if n == 4:
        cf: ClosedForm = LogConformal(4, KIND_FOURTH_N4)

        def residual(r: float, _cf=cf) -> float:
            return _cf.bilaplacian(r) - 6.0 * math.exp(4 * _cf.eval4(r).value)
    elif n >= 5 or n == 3:
        kind = KIND_FOURTH_N5 if n >= 5 else KIND_FOURTH_N3
        cf = ConformalPower((n - 4) / 2, n, kind)
        q = (n - 4) * (n - 2) * n * (n + 2) / 16
        p = (n + 4) / (n - 4)

        def residual(r: float, _cf=cf, _q=q, _p=p) -> float:
            return _cf.bilaplacian(r) - _q * _cf.eval4(r).value ** _p
    else:
        raise ValueError("fourth-order family needs n = 3 or n >= 4")

    cf.pde_residual = residual  # type: ignore[method-assign]
    return cf


def cylinder_log_cosh() -> LogCosh:
    return LogCosh()


def lambda_zero_parabola(n: int) -> Parabola:
    """n/4 - (n-4) r^2 / 4: biharmonic, matches u(1)=1, u'(1)=-(n-4)/2."""
    return Parabola(n / 4, -(n - 4) / 4, n)


_FACTORIES = {
    KIND_SECOND_ORDER: second_order_hemisphere,
    KIND_FOURTH_N5: fourth_order_hemisphere,
    KIND_FOURTH_N4: lambda n: fourth_order_hemisphere(4),
    KIND_FOURTH_N3: lambda n: fourth_order_hemisphere(3),
    KIND_CYLINDER: lambda n: cylinder_log_cosh(),
    KIND_PARABOLA: lambda_zero_parabola,
}


def closed_form(kind: str, n: int) -> ClosedForm:
    try:
        factory = _FACTORIES[kind]
    except KeyError:
        raise ValueError(f"unknown closed form kind {kind!r}") from None
    return factory(n)


def closed_form_eval(cf: ClosedForm, x: float) -> Jet:
    """Value with analytic derivatives up to order 4 at x."""
    return cf.eval4(x)


def closed_form_residual(cf: ClosedForm, n: int, grid) -> float:
    """Max absolute residual of the defining equation over the grid."""
    if n != cf.n:
        raise ValueError(f"closed form carries n={cf.n}, residual requested at n={n}")
    return max(abs(cf.pde_residual(float(x))) for x in np.asarray(grid, dtype=float))
