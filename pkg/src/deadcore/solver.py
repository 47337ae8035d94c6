"""Discrete energy minimization for dead-core problems.

The discrete energy uses cell-based corner quadrature for the p-Dirichlet
part (coercive on grid oscillations, reduces to the exact interval scheme
in one dimension) plus nodal quadrature of the absorption primitive.  The
minimizer over {u >= 0, u = g on Dirichlet nodes} is computed by cyclic
pointwise relaxation with exact nodal solves; see _kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from .core import (DIRICHLET, EXTERIOR, INTERIOR, GridField, Interval,
                   Problem, Rectangle, ball_extrema, build_grid,
                   validate_problem)


@dataclass
class Solution:
    """Converged field plus solver statistics."""

    field: GridField
    problem: Problem
    energy: float
    kkt_residual: float
    iterations: int
    tolerance_used: float
    converged: bool = True
    energy_trace: Optional[np.ndarray] = None

    @property
    def h(self) -> float:
        return self.field.h


@dataclass
class MeasureReport:
    """Discrete free-boundary measure mu = -(dJ/du)/h^N."""

    mu: np.ndarray
    total_mass: float
    min_value: float
    support_distance: float
    tol: float


@dataclass
class ComparisonReport:
    violations: list  # (node index, u1, u2) with u1 > u2 + tol
    tol: float

    @property
    def empty(self) -> bool:
        return len(self.violations) == 0


def _kernel_params(problem: Problem):
    law, q, tp, mp = problem.absorption.kernel_params()
    p = problem.exponents.p
    e2 = 0.5 * (p - 2.0)
    f0p = problem.absorption.f_right_limit_at_zero
    return p, e2, law, q, tp, mp, f0p


def _cell_weights(problem: Problem, grid: GridField) -> np.ndarray:
    """Weight a at cell centers, zeroed on cells touching exterior nodes."""
    h = grid.h
    if grid.dimension == 1:
        mids = grid.origin[0] + h * (np.arange(grid.shape[0] - 1) + 0.5)
        a = problem.weight_at(mids[:, None])
        active = (grid.mask[:-1] != EXTERIOR) & (grid.mask[1:] != EXTERIOR)
        return np.where(active, a, 0.0)
    xs = grid.origin[0] + h * (np.arange(grid.shape[0] - 1) + 0.5)
    ys = grid.origin[1] + h * (np.arange(grid.shape[1] - 1) + 0.5)
    pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
    a = problem.weight_at(pts)
    m = grid.mask
    active = ((m[:-1, :-1] != EXTERIOR) & (m[1:, :-1] != EXTERIOR)
              & (m[:-1, 1:] != EXTERIOR) & (m[1:, 1:] != EXTERIOR))
    return np.where(active, a, 0.0)


def _lambda_h(problem: Problem, grid: GridField) -> np.ndarray:
    lam = problem.lam_at(grid.points())
    hN = grid.h ** grid.dimension
    return np.where(grid.mask == INTERIOR, lam * hN, 0.0)


def discrete_energy(fld: GridField, problem: Problem) -> float:
    """Discrete energy J_h(u): corner-quadrature p-Dirichlet part plus
    nodal absorption.  Raises on a non-finite result."""
    h = fld.h
    p = problem.exponents.p
    u = fld.values
    acell = _cell_weights(problem, fld)
    if fld.dimension == 1:
        d = np.diff(u) / h
        grad_part = np.sum(h * acell * np.abs(d) ** p / p)
    else:
        dx = np.diff(u, axis=0) / h
        dy = np.diff(u, axis=1) / h
        A = dx[:, :-1]
        B = dx[:, 1:]
        C = dy[:-1, :]
        D = dy[1:, :]
        s = ((A * A + C * C) ** (p / 2) + (A * A + D * D) ** (p / 2)
             + (B * B + C * C) ** (p / 2) + (B * B + D * D) ** (p / 2))
        grad_part = np.sum(0.25 * h * h * acell * s / p)
    lam = problem.lam_at(fld.points())
    hN = h ** fld.dimension
    active = fld.mask != EXTERIOR
    absorb = np.sum(hN * lam[active] * problem.absorption.primitive(u[active]))
    out = float(grad_part + absorb)
    if not math.isfinite(out):
        raise ValueError("discrete energy is not finite")
    return out


def energy_gradient(fld: GridField, problem: Problem,
                    at_zero: str = "measure") -> np.ndarray:
    """dJ_h/du at every interior node.

    at_zero selects the absorption derivative where u = 0: 'measure' uses
    lambda0 u_+^q chi_{u>0} (zero), 'feasible' the right limit of f.
    """
    p, e2, law, q, tp, mp, f0p = _kernel_params(problem)
    acell = _cell_weights(problem, fld)
    lamh = _lambda_h(problem, fld)
    f0 = f0p if at_zero == "feasible" else 0.0
    if fld.dimension == 1:
        return K.grad_1d(np.array(fld.values), fld.mask, acell, lamh, fld.h,
                         p, e2, law, q, tp, mp, f0)
    return K.grad_2d(np.array(fld.values), fld.mask, acell, lamh, fld.h,
                     p, e2, law, q, tp, mp, f0)


def _initial_guess(problem: Problem, grid: GridField, initial) -> np.ndarray:
    u = np.array(grid.values)
    if isinstance(initial, GridField):
        initial = initial.values
    if isinstance(initial, np.ndarray):
        if initial.shape != grid.shape:
            raise ValueError("initial guess shape mismatch")
        sel = grid.mask == INTERIOR
        u[sel] = np.maximum(initial[sel], 0.0)
        return u
    if initial == "zero":
        return u
    if initial != "boundary":
        raise ValueError(f"unknown initial guess {initial!r}")

    # multilinear extension of the boundary data
    dom = problem.domain
    if isinstance(dom, Interval):
        n = grid.shape[0]
        xi = np.arange(n) / (n - 1)
        guess = (1 - xi) * u[0] + xi * u[-1]
    elif isinstance(dom, Rectangle):
        ni, nj = grid.shape
        xi = (np.arange(ni) / (ni - 1))[:, None]
        eta = (np.arange(nj) / (nj - 1))[None, :]
        U = (1 - xi) * u[0, :][None, :] + xi * u[-1, :][None, :]
        V = (1 - eta) * u[:, 0][:, None] + eta * u[:, -1][:, None]
        UV = ((1 - xi) * (1 - eta) * u[0, 0] + xi * (1 - eta) * u[-1, 0]
              + (1 - xi) * eta * u[0, -1] + xi * eta * u[-1, -1])
        ring = grid.mask == DIRICHLET
        lo, hi = u[ring].min(), u[ring].max()
        guess = np.clip(U + V - UV, lo, hi)
    else:  # Disk: boundary value at the radial projection of each node
        pts = grid.points()
        c = np.asarray(dom.center)
        rad = np.hypot(pts[..., 0] - c[0], pts[..., 1] - c[1])
        ring_mean = float(u[grid.mask == DIRICHLET].mean())
        guess = np.full(grid.shape, ring_mean)
        sel = (grid.mask == INTERIOR) & (rad > 1e-12 * dom.radius)
        proj = c + (pts[sel] - c) * (dom.radius / rad[sel])[:, None]
        guess[sel] = [problem.boundary(x) for x in proj]
    sel = grid.mask == INTERIOR
    u[sel] = np.maximum(np.asarray(guess)[sel], 0.0)
    return u


def solve(problem: Problem, tol: float = 1e-8, max_iter: Optional[int] = None,
          *, resolution: int = 257, initial="boundary",
          track_energy: bool = False) -> Solution:
    """Minimize the discrete energy over {u >= 0, u = g on Dirichlet nodes}.

    Cyclic pointwise relaxation, lexicographic order, exact nodal solves.
    Converged when both the sup-norm of one full sweep's update and the
    complementarity residual fall below tol; otherwise the best iterate is
    returned flagged non-converged.  max_iter defaults to 200 sweeps per
    node along the longest axis.
    """
    viol = validate_problem(problem)
    if viol:
        raise ValueError("invalid problem: " + "; ".join(str(v) for v in viol))
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    grid = build_grid(problem, resolution)
    if max_iter is None:
        max_iter = 200 * max(grid.shape)
    u = _initial_guess(problem, grid, initial)
    p, e2, law, q, tp, mp, f0p = _kernel_params(problem)
    acell = _cell_weights(problem, grid)
    lamh = _lambda_h(problem, grid)
    h = grid.h
    hN = h ** grid.dimension

    sweep = K.sweep_1d if grid.dimension == 1 else K.sweep_2d
    kkt_fn = K.kkt_residual_1d if grid.dimension == 1 else K.kkt_residual_2d
    relax = K.relax_1d if grid.dimension == 1 else K.relax_2d

    trace = None
    if track_energy:
        node_tol = 0.05 * tol * hN
        energies = []
        sweeps = 0
        converged = False
        maxch = math.inf
        kkt = math.inf
        while sweeps < max_iter:
            maxch = sweep(u, grid.mask, acell, lamh, h, p, e2, law, q, tp,
                          mp, f0p, node_tol)
            sweeps += 1
            energies.append(discrete_energy(grid.with_values(u), problem))
            if maxch <= tol:
                kkt = kkt_fn(u, grid.mask, acell, lamh, h, hN, p, e2, law,
                             q, tp, mp, f0p)
                if kkt <= tol:
                    converged = True
                    break
        if not converged:
            kkt = kkt_fn(u, grid.mask, acell, lamh, h, hN, p, e2, law, q,
                         tp, mp, f0p)
            converged = maxch <= tol and kkt <= tol
        trace = np.array(energies)
    else:
        sweeps, maxch, kkt, converged = relax(
            u, grid.mask, acell, lamh, h, hN, p, e2, law, q, tp, mp, f0p,
            tol, max_iter)

    out = grid.with_values(u)
    return Solution(field=out, problem=problem,
                    energy=discrete_energy(out, problem),
                    kkt_residual=float(kkt), iterations=int(sweeps),
                    tolerance_used=tol, converged=bool(converged),
                    energy_trace=trace)


def comparison_check(sol1: Solution, sol2: Solution,
                     tol: float) -> ComparisonReport:
    """Nodewise check u1 <= u2 + tol (ordered boundary data should give
    ordered solutions).  Raises on grid mismatch; ordering failures are
    reported, not raised."""
    f1, f2 = sol1.field, sol2.field
    if (f1.shape != f2.shape or f1.h != f2.h
            or not np.array_equal(f1.mask, f2.mask)
            or not np.allclose(f1.origin, f2.origin)):
        raise ValueError("solutions live on different grids")
    active = f1.mask != EXTERIOR
    bad = active & (f1.values > f2.values + tol)
    viol = [(tuple(idx), float(f1.values[tuple(idx)]),
             float(f2.values[tuple(idx)])) for idx in np.argwhere(bad)]
    return ComparisonReport(violations=viol, tol=tol)


def rescale_solution(sol: Solution, x0, r: float) -> GridField:
    """Zoom u around x0 at scale r: v(y) = u(x0 + r y) / r^gamma on the
    unit-ball reference grid (spacing matched to the source grid)."""
    ex = sol.problem.exponents
    if ex.borderline:
        raise ValueError("rescaling needs standard mode (gamma finite)")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    fld = sol.field
    if sol.problem.domain.boundary_distance(x0) < r * (1.0 - 1e-12):
        raise ValueError("ball escapes the domain")
    m = max(1, int(round(r / fld.h)))
    hy = 1.0 / m
    n = 2 * m + 1
    dim = fld.dimension
    axes = [np.linspace(-1.0, 1.0, n)] * dim
    ys = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    pts = x0 + r * ys
    vals, valid = fld.interpolate(pts)
    rad = np.sqrt(np.sum(ys * ys, axis=-1))
    inside = (rad <= 1.0 + 1e-12) & valid
    mask = np.where(inside, INTERIOR, EXTERIOR).astype(np.uint8)
    scale = r ** ex.gamma
    out = np.where(inside, vals / scale, 0.0)
    return GridField(dim, hy, np.full(dim, -1.0), out, mask)


def harnack_quotient(sol: Solution, x0, r: float) -> float:
    """Rescaled Harnack quotient at x0 and scale r.

    Q = S_{1/2}[v] / (I_{1/2}[v] + lam_+^{1/(p-1)} S_1[v]^{q/(p-1)}) for
    v the rescaled solution; 0 when the numerator vanishes (the bound is
    vacuous on the dead core), +inf if only the denominator vanishes.
    Needs B_{2r}(x0) inside the domain and r >= 4h.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if sol.problem.domain.boundary_distance(x0) < 2.0 * r * (1.0 - 1e-12):
        raise ValueError("B_2r(x0) escapes the domain")
    if r < 4.0 * sol.field.h:
        raise ValueError("harnack quotient needs r >= 4h")
    v = rescale_solution(sol, x0, r)
    half = ball_extrema(v, np.zeros(v.dimension), 0.5)
    s1 = ball_extrema(v, np.zeros(v.dimension), 1.0).sup
    if half.sup <= 0.0:
        return 0.0
    ex = sol.problem.exponents
    lam_plus = sol.problem.lam_bounds[1]
    denom = half.inf + lam_plus ** (1.0 / (ex.p - 1.0)) * s1 ** (ex.q / (ex.p - 1.0))
    if denom <= 0.0:
        return math.inf
    return half.sup / denom


def kkt_measure(sol: Solution, *, tol: Optional[float] = None) -> MeasureReport:
    """Nodal density of the free-boundary measure, mu = -(dJ/du)/h^N with
    the chi_{u>0} absorption convention.

    At a converged solution mu vanishes (to tolerance) on the positivity
    set, is zero on the dead-core interior, and its mass sits on nodes
    adjacent to the free boundary.
    """
    if tol is None:
        tol = 10.0 * sol.tolerance_used
    fld = sol.field
    hN = fld.h ** fld.dimension
    g = energy_gradient(fld, sol.problem, at_zero="measure")
    mu = -g / hN
    interior = fld.mask == INTERIOR
    total = float(np.sum(mu[interior]) * hN)
    min_value = float(mu[interior].min()) if np.any(interior) else 0.0

    carriers = interior & (np.abs(mu) > tol)
    if not np.any(carriers):
        support = 0.0
    else:
        from .geometry import extract_regions  # local import, no cycle at module load
        ex = sol.problem.exponents
        tau = None if not ex.borderline else 1e-10
        regions = extract_regions(sol, tau_dc=tau)
        if len(regions.fb_nodes) == 0:
            support = math.inf
        else:
            support = float(regions.dist_to_fb[carriers].max())
    return MeasureReport(mu=mu, total_mass=total, min_value=min_value,
                         support_distance=support, tol=tol)
