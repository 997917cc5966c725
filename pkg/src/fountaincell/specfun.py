"""Gauss hypergeometric kernels for the coverage analytics.

Everything downstream needs exactly two one-parameter families, with
delta = 2/alpha in (0, 1):

    F_neg(delta, x) = 2F1([1, -delta]; 1 - delta; -x)   (>= 1, increasing)
    F_pos(delta, x) = 2F1([1,  delta]; 1 + delta; -x)   (in (0, 1], decreasing)

Both are evaluated from their integral representations,

    F_neg = 1 + x^delta * int_0^x  delta / ((1 + y) y^delta) dy
    F_pos =     int_0^1  delta y^(delta-1) / (1 + x y) dy,

after substitutions that (a) remove the endpoint singularities and
(b) leave no x-dependent interior length scale, so one adaptive pass
holds the requested tolerance for any x up to float overflow.  x reaches
2^(K/t) - 1 ~ 2^1020 in the t -> 0 regions of the analytics, where naive
quadrature of the raw integrands fails long before the math does.

F_neg splits at y = 1: on (0, min(x,1)) take u = y^(1-delta), on (1, x)
take u = y^(-delta); both integrands are 1/(1+u^p) on a subset of [0, 1].
F_pos first substitutes u = y^delta, then for x > 1 rescales w = x^delta*u
and splits at w = 1 the same way.

`hyp2f1_series_oracle` is an independent route (plain Gauss series plus
the Pfaff transformation); it exists for cross-validation in the test
suite and is not used by the analytics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ConvergenceError, DomainError

__all__ = [
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "Delta",
    "hyp2f1_neg_delta",
    "hyp2f1_pos_delta",
    "hyp2f1_series_oracle",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances handed to the adaptive quadrature driver."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class Delta:
    """delta = 2/alpha; all integrals below converge only for delta in (0,1)."""

    delta: float

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")

    @classmethod
    def from_alpha(cls, alpha: float) -> "Delta":
        if not alpha > 2.0:
            raise DomainError(f"path-loss exponent must exceed 2, got {alpha}")
        return cls(2.0 / alpha)


def _delta_value(delta) -> float:
    d = delta.delta if isinstance(delta, Delta) else float(delta)
    if not 0.0 < d < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {d}")
    return d


def adaptive_quad(f, a: float, b: float, spec: QuadratureSpec = DEFAULT_QUADRATURE,
                  points=None) -> float:
    """Gauss-Kronrod adaptive integral of f over [a, b] at spec tolerances.

    Raises ConvergenceError when the requested tolerance is not certified.
    """
    if a == b:
        return 0.0
    out = quad(f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
               limit=spec.max_subdivisions, points=points, full_output=1)
    if len(out) > 3:
        # quad appends its warning message only when convergence is in doubt
        raise ConvergenceError(f"quadrature on [{a}, {b}]: {out[3]}")
    return out[0]


def hyp2f1_neg_delta(delta, x: float,
                     quad_spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """2F1([1, -delta]; 1 - delta; -x) for x >= 0.

    Equals 1 + x^delta * int_0^x delta/((1+y) y^delta) dy.  Result >= 1,
    strictly increasing in x, ~ delta*pi/sin(pi*delta) * x^delta for large x.
    """
    d = _delta_value(delta)
    if not x >= 0.0:
        raise DomainError(f"x must be nonnegative, got {x}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return math.inf
    p = 1.0 / (1.0 - d)
    # y in (0, min(x,1)]: u = y^(1-delta) kills the y^-delta singularity
    head = d * p * adaptive_quad(lambda u: 1.0 / (1.0 + u**p),
                                 0.0, min(x, 1.0) ** (1.0 - d), quad_spec)
    tail = 0.0
    if x > 1.0:
        # y in (1, x]: u = y^-delta; underflow of x^-delta is the correct limit
        q = 1.0 / d
        tail = adaptive_quad(lambda u: 1.0 / (1.0 + u**q),
                             x ** (-d), 1.0, quad_spec)
    return 1.0 + x**d * (head + tail)


def hyp2f1_pos_delta(delta, x: float,
                     quad_spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """2F1([1, delta]; 1 + delta; -x) for x >= 0.

    Equals int_0^1 du / (1 + x u^(1/delta)) after u = y^delta.  Result in
    (0, 1], strictly decreasing, -> 0 like x^-delta as x -> inf.
    """
    d = _delta_value(delta)
    if not x >= 0.0:
        raise DomainError(f"x must be nonnegative, got {x}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    q = 1.0 / d
    if x <= 1.0:
        return adaptive_quad(lambda u: 1.0 / (1.0 + x * u**q), 0.0, 1.0, quad_spec)
    # x > 1: rescale w = x^delta * u so the transition sits at w ~ 1,
    # then split there; the tail substitution v = w^((delta-1)/delta)
    # flattens it onto (x^(delta-1), 1).
    head = adaptive_quad(lambda w: 1.0 / (1.0 + w**q), 0.0, 1.0, quad_spec)
    p = 1.0 / (1.0 - d)
    tail = d * p * adaptive_quad(lambda v: 1.0 / (1.0 + v**p),
                                 x ** (d - 1.0), 1.0, quad_spec)
    return x ** (-d) * (head + tail)


def hyp2f1_series_oracle(a: float, b: float, c: float, z: float,
                         rel_tol: float = 1e-12,
                         max_terms: int = 5_000_000) -> float:
    """Gauss series for 2F1(a, b; c; z), z <= 1, as an independent oracle.

    For z < -0.5 the Pfaff transformation z -> z/(z-1) moves the argument
    into (0, 1) first, so the summed series has no cancellation.  Terms are
    accumulated in blocks with a geometric bound on the dropped tail.
    Validation use only; the analytics never call this.
    """
    if c <= 0 and float(c).is_integer():
        raise DomainError(f"c must not be a non-positive integer, got {c}")
    if z > 1.0:
        raise DomainError(f"series argument must satisfy z <= 1, got {z}")
    if z == 0.0:
        return 1.0
    if z < -0.5:
        w = z / (z - 1.0)
        return (1.0 - z) ** (-a) * hyp2f1_series_oracle(a, c - b, c, w,
                                                        rel_tol, max_terms)

    block = 4096
    total = 1.0
    term = 1.0
    n = 0
    while n < max_terms:
        k = np.arange(n, n + block, dtype=float)
        ratios = (a + k) * (b + k) / ((c + k) * (1.0 + k)) * z
        terms = term * np.cumprod(ratios)
        total += float(terms.sum())
        term = float(terms[-1])
        n += block
        if term == 0.0:
            return total  # terminating (polynomial) case
        # geometric tail bound: beyond here ratios stay below rho
        rho = max(abs(float(ratios[-1])), abs(z))
        if rho < 1.0 and abs(term) * rho / (1.0 - rho) <= rel_tol * abs(total):
            return total
    raise ConvergenceError(
        f"2F1 series did not converge within {max_terms} terms (z={z})")
