"""Closed-form radial dead-core profiles and their constants.

The profile Theta*(|x| - r0)_+^gamma solves -div(|grad u|^{p-2} grad u)
+ lambda u^q = 0 exactly when r0 = 0 (any dimension) or N = 1, and is a
supersolution for N >= 2 with r0 > 0; Theta is determined by matching the
absorption against the p-Laplacian of the profile.  These are the ground
truth the grid solver is judged against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Exponents, gamma_exponent


def theta_constant(dim: int, p: float, q: float, lam: float) -> float:
    """Amplitude making Theta*|x|^gamma an exact solution (unit weight).

    Theta = [lam (p-1-q)^p / (p^{p-1} (pq + N(p-1-q)))]^{1/(p-1-q)}.
    """
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    g = gamma_exponent(p, q)  # validates p, q
    d = p - 1.0 - q
    denom = p ** (p - 1.0) * (p * q + dim * d)
    return (lam * d ** p / denom) ** (1.0 / d)


@dataclass(frozen=True)
class RadialProfile:
    """u(x) = theta * (|x| - r0)_+^gamma, exact or supersolution.

    exactness is 'exact' iff r0 = 0 or the dimension is 1; for N >= 2 and
    r0 > 0 the curvature term only helps, giving a supersolution.
    """

    theta: float
    r0: float
    exponents: Exponents
    dimension: int
    lam: float

    def __post_init__(self):
        if self.theta <= 0.0:
            raise ValueError("theta must be positive")
        if self.r0 < 0.0:
            raise ValueError("r0 must be non-negative")
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.exponents.borderline:
            raise ValueError("radial profiles need standard mode (q < p-1)")
        if self.lam <= 0.0:
            raise ValueError("lambda must be positive")

    @property
    def exactness(self) -> str:
        return "exact" if (self.r0 == 0.0 or self.dimension == 1) else "supersolution"

    @classmethod
    def matched(cls, dim: int, p: float, q: float, lam: float,
                r0: float = 0.0) -> "RadialProfile":
        """Profile with theta = theta_constant(dim, p, q, lam)."""
        return cls(theta_constant(dim, p, q, lam), r0, Exponents(p, q), dim, lam)


def radial_profile_eval(profile: RadialProfile, x) -> float:
    """Profile value theta*(|x| - r0)_+^gamma at a point (or radius)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r = float(np.sqrt(np.sum(x * x)))
    s = r - profile.r0
    if s <= 0.0:
        return 0.0
    return profile.theta * s ** profile.exponents.gamma


def analytic_residual(profile: RadialProfile, r: float) -> float:
    """Pointwise residual of the equation at radius r > r0.

    R(r) = lam*Theta^q*(r-r0)^{gamma q}
         - (Theta*gamma)^{p-1} [(1 + gamma q) + (N-1)(r-r0)/r] (r-r0)^{gamma q}.

    Identically zero for exact profiles; non-negative for supersolutions.
    """
    if r <= profile.r0:
        raise ValueError(f"radius {r} not inside the positivity set (r0={profile.r0})")
    ex = profile.exponents
    g = ex.gamma
    s = r - profile.r0
    n = profile.dimension
    absorb = profile.lam * profile.theta ** ex.q * s ** (g * ex.q)
    bracket = (1.0 + g * ex.q) + (n - 1.0) * s / r
    diffuse = (profile.theta * g) ** (ex.p - 1.0) * bracket * s ** (g * ex.q)
    return absorb - diffuse


def borderline_exponential(p: float, lam: float, axis: int):
    """Strictly positive exact solution for the borderline order q = p-1.

    Returns an evaluator x -> exp((lam/(p-1))^{1/p} * x[axis-1]); it solves
    -div(|grad u|^{p-2} grad u) + lam u^{p-1} = 0 in any dimension.
    """
    if p <= 1.0:
        raise ValueError("p must exceed 1")
    if lam < 0.0:
        raise ValueError("lambda must be non-negative")
    if axis < 1:
        raise ValueError("axis is 1-based")
    rate = (lam / (p - 1.0)) ** (1.0 / p)

    def evaluate(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return math.exp(rate * x[axis - 1])

    return evaluate


def barrier_constant(p: float, q: float, kappa1: float,
                     lambda_minus: float) -> float:
    """Largest c > 0 admissible in the non-degeneracy barrier condition.

    Solves kappa1 * c^{p-1-q} [g^{p-1} + g^{p-2}/c + 1] = lambda_minus for
    c by bisection, with g = p/(p-1-q).  The left side is strictly
    increasing in c because p > 2 + q.  Bisection (rather than the
    p-Laplace closed form) keeps one code path for any kappa1.
    """
    if not p > 2.0 + q:
        raise ValueError(f"barrier constant requires p > 2+q, got p={p}, q={q}")
    if kappa1 <= 0.0 or lambda_minus <= 0.0:
        raise ValueError("kappa1 and lambda_minus must be positive")
    g = gamma_exponent(p, q)

    def lhs(c: float) -> float:
        return kappa1 * (c ** (p - 1.0 - q) * (g ** (p - 1.0) + 1.0)
                         + c ** (p - 2.0 - q) * g ** (p - 2.0))

    hi = 1.0
    while lhs(hi) <= lambda_minus:
        hi *= 2.0
        if hi > 1e300:
            raise RuntimeError("barrier bracket expansion failed")
    lo = 0.0
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if lhs(mid) <= lambda_minus:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
