"""Dead-core extraction and free-boundary diagnostics.

Classifies the nodes of a converged solution into dead core / positivity
set, locates the discrete free boundary, and measures everything the
sharp growth theory predicts: growth and gradient exponents, the
non-degeneracy constant, positive density, porosity, level-set measure,
box-counting perimeter/dimension, and dead-core stability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from .core import (DIRICHLET, EXTERIOR, INTERIOR, GridField,
                   UNIT_BALL_VOLUME, ball_extrema)

REGION_DEAD = 0
REGION_POSITIVE = 1
REGION_DIRICHLET = 2
REGION_EXTERIOR = 3

# Dead-core stability constant: 4x the symmetric-difference/sigma ratio
# measured on the one-dimensional closed-form family at h = 1/512 (ratio
# 1.016; calibration tracked in tests/test_geometry.py).
STABILITY_CONSTANT = 4.1


@dataclass
class RegionMap:
    """Node classes, free-boundary node list and distance transform."""

    classes: np.ndarray
    fb_nodes: np.ndarray  # (k, dim) node indices, lexicographic
    dist_to_fb: np.ndarray
    tau_dc: float

    def __post_init__(self):
        self._fb_set = {tuple(ix) for ix in self.fb_nodes}

    def is_fb(self, idx) -> bool:
        return tuple(int(i) for i in np.atleast_1d(idx)) in self._fb_set

    @property
    def dead_core_count(self) -> int:
        return int(np.sum(self.classes == REGION_DEAD))


@dataclass
class FitReport:
    """Log-log regression of a scale diagnostic against the radius."""

    slope: float
    intercept: float
    r_squared: float
    radii: np.ndarray
    values: np.ndarray
    target_exponent: float
    tolerance: float

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if len(self.radii) < 4:
            raise ValueError("a fit needs at least 4 radii")
        if not np.all(np.diff(self.radii) < 0.0):
            raise ValueError("radii must be strictly decreasing")

    @property
    def passed(self) -> bool:
        return abs(self.slope - self.target_exponent) <= self.tolerance


def _loglog_fit(radii, values):
    x = np.log(np.asarray(radii, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sstot = float(np.sum((y - y.mean()) ** 2))
    ssres = float(np.sum(resid ** 2))
    if sstot < 1e-30:
        r2 = 1.0 if ssres < 1e-30 else 0.0
    else:
        r2 = 1.0 - ssres / sstot
    return float(slope), float(intercept), r2


def _halfoctave_radii(r_max: float, r_min: float) -> np.ndarray:
    """r_j = r_max * 2^{-j/2} down to r_min; needs at least 4 entries."""
    out = []
    f = math.sqrt(0.5)
    r = r_max
    while r >= r_min * (1.0 - 1e-12):
        out.append(r)
        r *= f
    if len(out) < 4:
        raise ValueError(
            f"insufficient radii between {r_min:.3g} and {r_max:.3g}"
            " (grid too coarse)")
    return np.array(out)


def _dyadic_radii(r_max: float, r_min: float) -> list:
    out = []
    r = r_max
    while r >= r_min * (1.0 - 1e-12):
        out.append(r)
        r *= 0.5
    return out


def extract_regions(sol, tau_dc: Optional[float] = None) -> RegionMap:
    """Classify nodes and locate the free boundary.

    The automatic threshold is max(1e-10, h^gamma): values below h^gamma
    are numerically indistinguishable from zero at grid resolution.
    Borderline problems have no gamma, so they must pass tau_dc
    explicitly.
    """
    fld = sol.field
    ex = sol.problem.exponents
    if tau_dc is None:
        if ex.borderline:
            raise ValueError("borderline mode requires an explicit tau_dc")
        tau_dc = max(1e-10, fld.h ** ex.gamma)

    classes = np.full(fld.shape, REGION_EXTERIOR, dtype=np.uint8)
    classes[fld.mask == DIRICHLET] = REGION_DIRICHLET
    interior = fld.mask == INTERIOR
    dead = interior & (fld.values <= tau_dc)
    classes[interior] = REGION_POSITIVE
    classes[dead] = REGION_DEAD

    # fb: positive nodes with a dead axis-neighbour, plus dead nodes with
    # a positive axis-neighbour
    pos = classes == REGION_POSITIVE
    fb = np.zeros(fld.shape, dtype=bool)
    for axis in range(fld.dimension):
        for shift in (1, -1):
            d_sh = _shifted(dead, axis, shift)
            p_sh = _shifted(pos, axis, shift)
            fb |= pos & d_sh
            fb |= dead & p_sh
    fb_nodes = np.argwhere(fb)

    if fb_nodes.shape[0] == 0:
        dist = np.full(fld.shape, math.inf)
    elif fld.dimension == 1:
        dist = K.chamfer_1d(fb, fld.h)
    else:
        dist = K.chamfer_2d(fb, fld.h)
    return RegionMap(classes=classes, fb_nodes=fb_nodes, dist_to_fb=dist,
                     tau_dc=float(tau_dc))


def _shifted(arr: np.ndarray, axis: int, shift: int) -> np.ndarray:
    out = np.zeros_like(arr)
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    if shift > 0:
        src[axis] = slice(1, None)
        dst[axis] = slice(None, -1)
    else:
        src[axis] = slice(None, -1)
        dst[axis] = slice(1, None)
    out[tuple(dst)] = arr[tuple(src)]
    return out


def _require_fb(regions: RegionMap, x0) -> np.ndarray:
    idx = tuple(int(i) for i in np.atleast_1d(x0))
    if not regions.is_fb(idx):
        raise ValueError(f"node {idx} is not a free-boundary node")
    return np.array(idx)


def fit_growth_exponent(sol, regions: RegionMap, x0, *,
                        min_radius_mult: float = 5.0,
                        slope_tol: Optional[float] = None) -> FitReport:
    """Slope of log sup_{B_r} u against log r at a free-boundary node.

    Radii run from dist(x0, boundary)/2 down in half octaves, staying
    above min_radius_mult*h (>= 5h).  The target slope is gamma.
    """
    idx = _require_fb(regions, x0)
    fld = sol.field
    ex = sol.problem.exponents
    point = fld.node_point(idx)
    r_max = sol.problem.domain.boundary_distance(point) / 2.0
    r_min = max(5.0, min_radius_mult) * fld.h
    radii = _halfoctave_radii(r_max, r_min)
    sups = np.array([ball_extrema(fld, point, r).sup for r in radii])
    if np.any(sups <= 0.0):
        keep = sups > 0.0
        radii, sups = radii[keep], sups[keep]
        if len(radii) < 4:
            raise ValueError("supremum vanishes on too many radii")
    slope, intercept, r2 = _loglog_fit(radii, sups)
    tol = slope_tol if slope_tol is not None else (0.15 if fld.dimension == 1 else 0.25)
    return FitReport(slope, intercept, r2, radii, sups, ex.gamma, tol)


def gradient_magnitude(sol, regions: RegionMap) -> np.ndarray:
    """|grad u| at positivity-set nodes (zero elsewhere).

    Centered differences, except one-sided into the positivity set next to
    the dead core: centered stencils straddling the free boundary would
    pollute the decay rate.
    """
    fld = sol.field
    u = fld.values
    h = fld.h
    cls = regions.classes
    usable = (cls == REGION_POSITIVE) | (cls == REGION_DIRICHLET)
    pos = cls == REGION_POSITIVE
    total = np.zeros(fld.shape)
    for axis in range(fld.dimension):
        up = _shift_vals(u, axis, 1)
        dn = _shift_vals(u, axis, -1)
        up_ok = _shifted(usable, axis, 1)
        dn_ok = _shifted(usable, axis, -1)
        comp = np.zeros(fld.shape)
        both = up_ok & dn_ok
        comp[both] = (up[both] - dn[both]) / (2 * h)
        only_up = up_ok & ~dn_ok
        comp[only_up] = (up[only_up] - u[only_up]) / h
        only_dn = dn_ok & ~up_ok
        comp[only_dn] = (u[only_dn] - dn[only_dn]) / h
        total += comp ** 2
    out = np.sqrt(total)
    out[~pos] = 0.0
    return out


def _shift_vals(arr, axis, shift):
    out = np.zeros_like(arr)
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    if shift > 0:
        src[axis] = slice(1, None)
        dst[axis] = slice(None, -1)
    else:
        src[axis] = slice(None, -1)
        dst[axis] = slice(1, None)
    out[tuple(dst)] = arr[tuple(src)]
    return out


def fit_gradient_exponent(sol, regions: RegionMap, x0, *,
                          min_radius_mult: float = 5.0,
                          slope_tol: Optional[float] = None) -> FitReport:
    """Slope of log max_{B_r} |grad u| against log r; target gamma - 1."""
    idx = _require_fb(regions, x0)
    fld = sol.field
    ex = sol.problem.exponents
    point = fld.node_point(idx)
    r_max = sol.problem.domain.boundary_distance(point) / 2.0
    r_min = max(5.0, min_radius_mult) * fld.h
    radii = _halfoctave_radii(r_max, r_min)
    gmag = gradient_magnitude(sol, regions)
    gfld = fld.with_values(gmag)
    vals = np.array([ball_extrema(gfld, point, r).sup for r in radii])
    keep = vals > 0.0
    radii, vals = radii[keep], vals[keep]
    if len(radii) < 4:
        raise ValueError("gradient vanishes on too many radii")
    slope, intercept, r2 = _loglog_fit(radii, vals)
    target = (1.0 + ex.q) / (ex.p - 1.0 - ex.q)
    tol = slope_tol if slope_tol is not None else (0.15 if fld.dimension == 1 else 0.25)
    return FitReport(slope, intercept, r2, radii, vals, target, tol)


def nondegeneracy_scan(sol, regions: RegionMap, *,
                       min_radius_mult: float = 5.0):
    """Minimum of sup_{sphere r} u / r^gamma over fb nodes and dyadic radii.

    A strictly positive minimum certifies that the solution leaves its
    dead core at the sharp rate.  Returns (c_min, table) with table rows
    (node index, r, c).
    """
    ex = sol.problem.exponents
    if ex.borderline:
        raise ValueError("non-degeneracy scan needs standard mode")
    if regions.fb_nodes.shape[0] == 0:
        raise ValueError("free boundary is empty")
    fld = sol.field
    g = ex.gamma
    r_min = max(5.0, min_radius_mult) * fld.h
    table = []
    for idx in regions.fb_nodes:
        point = fld.node_point(idx)
        r_cap = sol.problem.domain.boundary_distance(point) / 2.0
        for r in _dyadic_radii(r_cap, r_min):
            s = ball_extrema(fld, point, r).sup_on_sphere
            table.append((tuple(int(i) for i in idx), float(r),
                          float(s / r ** g)))
    if not table:
        raise ValueError("no admissible radii for any fb node")
    c_min = min(row[2] for row in table)
    return c_min, table


def _ball_window(fld: GridField, point: np.ndarray, r: float):
    """Index slices covering B_r(point) plus the local distance array."""
    lo = np.maximum(np.floor((point - r - fld.origin) / fld.h).astype(int), 0)
    hi = np.minimum(np.ceil((point + r - fld.origin) / fld.h).astype(int),
                    np.array(fld.shape) - 1)
    sl = tuple(slice(a, b + 1) for a, b in zip(lo, hi))
    axes = [fld.origin[a] + fld.h * np.arange(lo[a], hi[a] + 1)
            for a in range(fld.dimension)]
    grids = np.meshgrid(*axes, indexing="ij")
    dist = np.sqrt(sum((g - c) ** 2 for g, c in zip(grids, point)))
    return sl, dist


def density_fraction(sol, regions: RegionMap, x0, rho: float) -> float:
    """Volume fraction of the positivity set in B_rho(x0), normalized by
    the unit-ball volume."""
    idx = _require_fb(regions, x0)
    fld = sol.field
    point = fld.node_point(idx)
    if rho < 2.0 * fld.h:
        raise ValueError("rho below 2h")
    if rho > sol.problem.domain.boundary_distance(point) * (1.0 + 1e-12):
        raise ValueError("rho exceeds the distance to the domain boundary")
    sl, dist = _ball_window(fld, point, rho)
    inside = dist <= rho
    count = int(np.sum(inside & (regions.classes[sl] == REGION_POSITIVE)))
    hN = fld.h ** fld.dimension
    omega = UNIT_BALL_VOLUME[fld.dimension]
    return count * hN / (omega * rho ** fld.dimension)


def porosity_estimate(sol, regions: RegionMap, *,
                      min_radius_mult: float = 5.0):
    """Certified porosity constant of the free boundary.

    For each fb node x and admissible dyadic radius r, the largest ball
    avoiding the fb inside B_r(x) has radius max_y min(dist_fb(y),
    r - |x-y|); the scan minimum of that ratio over (x, r) is returned
    with the full table.
    """
    if regions.fb_nodes.shape[0] == 0:
        raise ValueError("free boundary is empty")
    fld = sol.field
    r_min = max(5.0, min_radius_mult) * fld.h
    table = []
    for idx in regions.fb_nodes:
        point = fld.node_point(idx)
        r_cap = sol.problem.domain.boundary_distance(point) / 2.0
        for r in _dyadic_radii(r_cap, r_min):
            sl, dist = _ball_window(fld, point, r)
            inside = dist <= r
            pore = np.minimum(regions.dist_to_fb[sl][inside],
                              r - dist[inside])
            table.append((tuple(int(i) for i in idx), float(r),
                          float(pore.max() / r)))
    if not table:
        raise ValueError("no admissible radii for any fb node")
    delta_hat = min(row[2] for row in table)
    return delta_hat, table


def level_set_measure(sol, regions: RegionMap, rho: float) -> float:
    """Volume of the thin positivity band {tau_dc < u < rho^gamma}."""
    ex = sol.problem.exponents
    if ex.borderline:
        raise ValueError("level-set measure needs standard mode")
    if not 0.0 < rho <= 1.0:
        raise ValueError("rho must lie in (0, 1]")
    fld = sol.field
    cut = rho ** ex.gamma
    interior = fld.mask == INTERIOR
    band = interior & (fld.values > regions.tau_dc) & (fld.values < cut)
    return float(np.sum(band)) * fld.h ** fld.dimension


def _box_count(indices: np.ndarray, scale: int) -> int:
    if indices.shape[0] == 0:
        return 0
    boxes = indices // scale
    return len({tuple(b) for b in boxes})


def boxcount_fb_measure(sol, regions: RegionMap, x0, r: float):
    """Box-counting perimeter and dimension of the free boundary in B_r(x0).

    In 2D the perimeter estimate counts grid cells crossed by the
    interface (cells holding both dead-core and positivity corners) and
    applies the pi/4 stereological correction for the axis-aligned
    crossing count of an isotropic curve.  In 1D the 'perimeter' is the
    number of fb clusters.  The dimension fit coarsens boxes over
    eps = h*2^m, m = 0..4, counting boxes that hold dead-side fb nodes;
    target N-1.
    """
    fld = sol.field
    if r < 8.0 * fld.h:
        raise ValueError("r must be at least 8h for 5 coarsening levels")
    idx = _require_fb(regions, x0)
    point = fld.node_point(idx)

    fb_dead = [tuple(ix) for ix in regions.fb_nodes
               if regions.classes[tuple(ix)] == REGION_DEAD]
    fb_dead = np.array(fb_dead, dtype=int).reshape(-1, fld.dimension)
    fb_pts = fld.origin + fld.h * fb_dead
    in_ball = np.sqrt(np.sum((fb_pts - point) ** 2, axis=-1)) <= r
    fb_in = fb_dead[in_ball]

    counts = []
    scales = [2 ** m for m in range(5)]
    for s in scales:
        counts.append(max(_box_count(fb_in, s), 1))
    eps = np.array([fld.h * s for s in scales])
    slope, intercept, r2 = _loglog_fit(1.0 / eps[::-1], counts[::-1])
    dim_fit = FitReport(slope, intercept, r2, radii=eps[::-1],
                        values=np.array(counts[::-1], dtype=float),
                        target_exponent=fld.dimension - 1.0, tolerance=0.2)

    if fld.dimension == 1:
        if fb_in.shape[0] == 0:
            return 0.0, dim_fit
        order = np.sort(fb_in[:, 0])
        clusters = 1 + int(np.sum(np.diff(order) > 1))
        return float(clusters), dim_fit

    dead = regions.classes == REGION_DEAD
    pos = regions.classes == REGION_POSITIVE
    has_dead = dead[:-1, :-1] | dead[1:, :-1] | dead[:-1, 1:] | dead[1:, 1:]
    has_pos = pos[:-1, :-1] | pos[1:, :-1] | pos[:-1, 1:] | pos[1:, 1:]
    mixed = has_dead & has_pos
    ni, nj = fld.shape
    cx = fld.origin[0] + fld.h * (np.arange(ni - 1) + 0.5)
    cy = fld.origin[1] + fld.h * (np.arange(nj - 1) + 0.5)
    centers = np.stack(np.meshgrid(cx, cy, indexing="ij"), axis=-1)
    cdist = np.sqrt(np.sum((centers - point) ** 2, axis=-1))
    n_cells = int(np.sum(mixed & (cdist <= r)))
    perimeter = (math.pi / 4.0) * n_cells * fld.h
    return perimeter, dim_fit


def deadcore_symdiff(sol1, sol2, sigma: float, *,
                     c_stab: float = STABILITY_CONSTANT):
    """Measure of the symmetric difference of the two dead cores.

    Requires the two fields on the same grid with sup-norm distance at
    most sigma^gamma (raises otherwise); passes when the measure is below
    c_stab * sigma.
    """
    f1, f2 = sol1.field, sol2.field
    if f1.shape != f2.shape or f1.h != f2.h or not np.allclose(f1.origin, f2.origin):
        raise ValueError("solutions live on different grids")
    ex = sol1.problem.exponents
    if ex.borderline:
        raise ValueError("stability bound needs standard mode")
    if not 0.0 < sigma <= 1.0:
        raise ValueError("sigma must lie in (0, 1]")
    active = f1.mask != EXTERIOR
    gap = float(np.max(np.abs(f1.values[active] - f2.values[active])))
    if gap > sigma ** ex.gamma * (1.0 + 1e-9):
        raise ValueError(
            f"sup-norm gap {gap:.3g} exceeds sigma^gamma = {sigma ** ex.gamma:.3g}")
    r1 = extract_regions(sol1)
    r2 = extract_regions(sol2)
    d1 = r1.classes == REGION_DEAD
    d2 = r2.classes == REGION_DEAD
    measure = float(np.sum(d1 ^ d2)) * f1.h ** f1.dimension
    return measure, measure <= c_stab * sigma
