"""Problem descriptions for the radial boundary-value problems.

A ``ProblemSpec`` pins down one member of the family

    order 2:  -Delta u = lambda g(u)   on B_1,  u(1) = 0
    order 4:  Delta^2 u = lambda f(u)  on B_1,  u(1), u'(1) prescribed

with the four nonlinearities used throughout:

    exp2u         g(u) = e^{2u}              (order 2, n = 2)
    scalar_power  g(u) = (1+u)^{(n+2)/(n-2)} (order 2, n >= 3)
    exp4u         f(u) = e^{4u}              (order 4, n = 4), bc (0, -1)
    q_power       f(u) = u^{(n+4)/(n-4)}     (order 4, n >= 5), bc (1, -(n-4)/2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

__all__ = ["Nonlinearity", "ProblemSpec", "NONLINEARITIES", "make_problem"]


@dataclass(frozen=True)
class Nonlinearity:
    """g(u) with first and second derivatives and an optional lower bound on u.

    ``lower_bound`` is the open constraint u > lower_bound required for the
    nonlinearity to stay defined; integrators abort with LostPositivity when
    it is crossed.
    """

    tag: str
    g: callable
    dg: callable
    d2g: callable
    lower_bound: Optional[float] = None


def _exp(x: float) -> float:
    # overflow maps to inf so the integrator can shrink the step instead
    # of dying on OverflowError
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _pow(base: float, p: float) -> float:
    if base <= 0.0:
        return math.nan
    try:
        return base ** p
    except OverflowError:
        return math.inf


def _exp2u() -> Nonlinearity:
    return Nonlinearity(
        "exp2u",
        lambda u: _exp(2 * u),
        lambda u: 2 * _exp(2 * u),
        lambda u: 4 * _exp(2 * u),
    )


def _exp4u() -> Nonlinearity:
    return Nonlinearity(
        "exp4u",
        lambda u: _exp(4 * u),
        lambda u: 4 * _exp(4 * u),
        lambda u: 16 * _exp(4 * u),
    )


def _power(p: float, shift: float, tag: str) -> Nonlinearity:
    # (shift + u)^p with domain shift + u > 0; outside it the value is nan,
    # which the integrator treats as a blow-up region
    return Nonlinearity(
        tag,
        lambda u: _pow(shift + u, p),
        lambda u: p * _pow(shift + u, p - 1),
        lambda u: p * (p - 1) * _pow(shift + u, p - 2),
        lower_bound=-shift,
    )


NONLINEARITIES = ("exp2u", "exp4u", "scalar_power", "q_power")


def nonlinearity_for(tag: str, n: int) -> Nonlinearity:
    if tag == "exp2u":
        return _exp2u()
    if tag == "exp4u":
        return _exp4u()
    if tag == "scalar_power":
        if n < 3:
            raise ValueError("scalar_power requires n >= 3")
        return _power((n + 2) / (n - 2), 1.0, tag)
    if tag == "q_power":
        if n < 5:
            raise ValueError("q_power requires n >= 5")
        return _power((n + 4) / (n - 4), 0.0, tag)
    raise ValueError(f"unknown nonlinearity {tag!r}")


def _default_bc(order: int, n: int, tag: str) -> Tuple[float, ...]:
    if order == 2:
        return (0.0,)
    if tag == "q_power":
        return (1.0, -(n - 4) / 2)
    if tag == "exp4u":
        # the exponential fourth-order family uses u = 0, u' = -1 at r = 1
        return (0.0, -1.0)
    raise ValueError(f"no default boundary data for order-4 {tag!r}")


@dataclass(frozen=True)
class ProblemSpec:
    """One radial Gelfand problem. ``bc`` is (u(1),) for order 2 and
    (u(1), u'(1)) for order 4."""

    order: int
    n: int
    nonlinearity: str
    lam: float
    bc: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.order not in (2, 4):
            raise ValueError("order must be 2 or 4")
        if self.n < 2:
            raise ValueError("dimension must be >= 2")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.nonlinearity not in NONLINEARITIES:
            raise ValueError(f"unknown nonlinearity {self.nonlinearity!r}")
        if self.order == 2 and self.nonlinearity in ("exp4u", "q_power"):
            raise ValueError(f"{self.nonlinearity} is a fourth-order family")
        if self.order == 4 and self.nonlinearity in ("exp2u", "scalar_power"):
            raise ValueError(f"{self.nonlinearity} is a second-order family")
        if not self.bc:
            object.__setattr__(
                self, "bc", _default_bc(self.order, self.n, self.nonlinearity))
        if len(self.bc) != (1 if self.order == 2 else 2):
            raise ValueError("boundary data length does not match the order")
        # sanity per the problem family definitions
        nonlinearity_for(self.nonlinearity, self.n)

    @property
    def f(self) -> Nonlinearity:
        return nonlinearity_for(self.nonlinearity, self.n)

    def with_lambda(self, lam: float) -> "ProblemSpec":
        return ProblemSpec(self.order, self.n, self.nonlinearity, lam, self.bc)

    @property
    def n_params(self) -> int:
        """Number of free center values in the shooting formulation."""
        return 1 if self.order == 2 else 2


def make_problem(order: int, n: int, nonlinearity: Optional[str] = None,
                 lam: float = 0.0) -> ProblemSpec:
    """ProblemSpec with the conventional nonlinearity for (order, n)."""
    if nonlinearity is None:
        if order == 2:
            nonlinearity = "exp2u" if n == 2 else "scalar_power"
        else:
            nonlinearity = "exp4u" if n == 4 else "q_power"
    return ProblemSpec(order, n, nonlinearity, lam)
