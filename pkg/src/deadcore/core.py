"""Exponent arithmetic, problem data, grids and ball extrema.

Shared vocabulary for the solver and the free-boundary analysis: the
exponent pair (p, q) with its growth exponent p/(p-1-q), absorption laws,
the boundary value problem description, and scalar fields on uniform
Cartesian grids with a domain mask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Union

import numpy as np

# node classes of a GridField mask
INTERIOR = 0
DIRICHLET = 1
EXTERIOR = 2

# unit ball volumes for N = 1, 2
UNIT_BALL_VOLUME = {1: 2.0, 2: math.pi}

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def gamma_exponent(p: float, q: float) -> float:
    """Growth exponent p/(p-1-q) of non-negative solutions at free boundary points.

    Requires p > 1 and 0 <= q < p-1 (standard mode).
    """
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got p={p}")
    if q < 0.0 or q >= p - 1.0:
        raise ValueError(f"need 0 <= q < p-1, got q={q} with p-1={p - 1}")
    return p / (p - 1.0 - q)


def holder_class(p: float, q: float):
    """Split the growth exponent into (k, beta) with k integer, beta in [0,1).

    Returns (k, beta, classical_across_fb) where k = floor(gamma),
    beta = gamma - k, and classical_across_fb is True exactly when
    gamma > 2, i.e. the solution has continuous second derivatives
    across the free boundary.
    """
    g = gamma_exponent(p, q)
    k = int(math.floor(g))
    return k, g - k, g > 2.0


@dataclass(frozen=True)
class Exponents:
    """The pair (p, q) with p > 1 and either 0 <= q < p-1 or q = p-1.

    In standard mode gamma = p/(p-1-q) is finite; in borderline mode
    (q = p-1) gamma is undefined and reading it raises.
    """

    p: float
    q: float
    borderline: bool = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.p <= 1.0:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.q < 0.0 or self.q > self.p - 1.0:
            raise ValueError(f"need 0 <= q <= p-1, got q={self.q}")
        if self.borderline is None:
            object.__setattr__(self, "borderline", self.q == self.p - 1.0)

    @property
    def gamma(self) -> float:
        if self.borderline:
            raise ValueError("gamma is undefined in borderline mode (q = p-1)")
        return gamma_exponent(self.p, self.q)


class BallExtrema(NamedTuple):
    sup: float
    inf: float
    sup_on_sphere: float


# ---------------------------------------------------------------------------
# absorption laws


_LAW_IDS = {"power": 0, "exp_power": 1, "log_power": 2, "power_log": 3,
            "power_rational": 4}


@dataclass(frozen=True)
class AbsorptionLaw:
    """Absorption nonlinearity f(s) >= 0 with f(0) = 0, and its primitive.

    The reference law is f(s) = s_+^q.  The other laws behave like s^q near
    zero (f(s) <= C s^q for 0 < s <= 1) under the parameter constraints
    enforced here: t >= q for the exp/log laws, t > 0 for power_log, and
    t > 0, 0 < m <= q for the rational law.
    """

    law: str
    q: float
    t: float = math.nan
    m: float = math.nan

    def __post_init__(self):
        if self.law not in _LAW_IDS:
            raise ValueError(f"unknown absorption law {self.law!r}")
        if self.q < 0.0:
            raise ValueError("absorption order q must be non-negative")
        if self.law in ("exp_power", "log_power"):
            if not self.t >= self.q:
                raise ValueError(f"{self.law} requires t >= q, got t={self.t}")
        elif self.law == "power_log":
            if not self.t > 0.0:
                raise ValueError("power_log requires t > 0")
        elif self.law == "power_rational":
            if not self.t > 0.0:
                raise ValueError("power_rational requires t > 0")
            if not (0.0 < self.m <= self.q):
                raise ValueError(
                    f"power_rational requires 0 < m <= q, got m={self.m}, q={self.q}")

    @classmethod
    def power(cls, q: float) -> "AbsorptionLaw":
        return cls("power", q)

    @classmethod
    def exp_power(cls, q: float, t: float) -> "AbsorptionLaw":
        return cls("exp_power", q, t)

    @classmethod
    def log_power(cls, q: float, t: float) -> "AbsorptionLaw":
        return cls("log_power", q, t)

    @classmethod
    def power_log(cls, q: float, t: float) -> "AbsorptionLaw":
        return cls("power_log", q, t)

    @classmethod
    def power_rational(cls, q: float, t: float, m: float) -> "AbsorptionLaw":
        return cls("power_rational", q, t, m)

    @property
    def law_id(self) -> int:
        return _LAW_IDS[self.law]

    def f(self, s):
        """f(s), elementwise; zero for s <= 0."""
        s = np.asarray(s, dtype=float)
        pos = s > 0.0
        sp = np.where(pos, s, 0.0)
        if self.law == "power":
            with np.errstate(divide="ignore"):
                out = np.where(pos, sp ** self.q, 0.0)
        elif self.law == "exp_power":
            out = np.where(pos, np.expm1(sp ** self.t), 0.0)
        elif self.law == "log_power":
            out = np.where(pos, np.log1p(sp ** self.t), 0.0)
        elif self.law == "power_log":
            out = np.where(pos, sp ** self.q * np.log1p(sp ** self.t), 0.0)
        else:  # power_rational
            out = np.where(pos, sp ** self.q / (1.0 + sp ** self.t) ** self.m, 0.0)
        return out if out.ndim else float(out)

    def primitive(self, s):
        """F(s) = integral of f from 0 to s (s >= 0).

        Closed form for the power law; 32-point Gauss-Legendre otherwise,
        with a quadratic substitution clustering nodes at 0 where the
        fractional-power laws lose smoothness (relative accuracy ~1e-9).
        """
        s = np.asarray(s, dtype=float)
        sp = np.where(s > 0.0, s, 0.0)
        if self.law == "power":
            out = sp ** (self.q + 1.0) / (self.q + 1.0)
        else:
            # int_0^s f = s * int_0^1 f(s y^2) 2y dy
            y = 0.5 * (1.0 + _GL_NODES)  # in (0, 1)
            vals = self.f(sp[..., None] * y * y) * 2.0 * y
            out = 0.5 * sp * np.sum(vals * _GL_WEIGHTS, axis=-1)
        return out if out.ndim else float(out)

    @property
    def f_right_limit_at_zero(self) -> float:
        # only the power law with q = 0 jumps at the origin
        if self.law == "power" and self.q == 0.0:
            return 1.0
        return 0.0

    def kernel_params(self):
        """(law_id, q, t, m) tuple consumed by the numba kernels."""
        t = 0.0 if math.isnan(self.t) else self.t
        m = 0.0 if math.isnan(self.m) else self.m
        return self.law_id, self.q, t, m


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    dimension = 1

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("interval needs hi > lo")

    def boundary_distance(self, x) -> float:
        x0 = float(np.atleast_1d(x)[0])
        return min(x0 - self.lo, self.hi - x0)

    def bounding_box(self):
        return np.array([self.lo]), np.array([self.hi])


@dataclass(frozen=True)
class Rectangle:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    dimension = 2

    def __post_init__(self):
        if not (self.x_hi > self.x_lo and self.y_hi > self.y_lo):
            raise ValueError("rectangle needs positive extents")

    def boundary_distance(self, x) -> float:
        x = np.atleast_1d(x)
        return min(x[0] - self.x_lo, self.x_hi - x[0],
                   x[1] - self.y_lo, self.y_hi - x[1])

    def bounding_box(self):
        return np.array([self.x_lo, self.y_lo]), np.array([self.x_hi, self.y_hi])


@dataclass(frozen=True)
class Disk:
    center: tuple
    radius: float
    dimension = 2

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0.0:
            raise ValueError("disk needs radius > 0")

    def boundary_distance(self, x) -> float:
        x = np.atleast_1d(x)
        return self.radius - math.hypot(x[0] - self.center[0], x[1] - self.center[1])

    def bounding_box(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius


Domain = Union[Interval, Rectangle, Disk]


# ---------------------------------------------------------------------------
# grid fields


@dataclass
class GridField:
    """Scalar values on a uniform grid with a node-class mask.

    Arrays are frozen after construction; derived fields must copy.
    ``origin`` is the coordinate of node index 0 (per axis) and ``h`` the
    common spacing.  Exterior nodes (outside a disk domain) hold value 0
    and carry no energy contribution.
    """

    dimension: int
    h: float
    origin: np.ndarray
    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        self.values = np.ascontiguousarray(self.values, dtype=float)
        self.mask = np.ascontiguousarray(self.mask, dtype=np.uint8)
        if self.values.shape != self.mask.shape:
            raise ValueError("values/mask shape mismatch")
        if self.values.ndim != self.dimension:
            raise ValueError("array rank must equal dimension")
        if not np.all(np.isfinite(self.values[self.mask != EXTERIOR])):
            raise ValueError("non-finite values on active nodes")
        self.values.setflags(write=False)
        self.mask.setflags(write=False)

    @property
    def shape(self):
        return self.values.shape

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.h * np.arange(self.shape[axis])

    def node_point(self, idx) -> np.ndarray:
        return self.origin + self.h * np.asarray(idx, dtype=float)

    def points(self) -> np.ndarray:
        """Coordinates of all nodes, shape (*grid_shape, dimension)."""
        axes = [self.axis_coords(a) for a in range(self.dimension)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack(grids, axis=-1)

    def with_values(self, values: np.ndarray) -> "GridField":
        return GridField(self.dimension, self.h, self.origin.copy(),
                         np.array(values, dtype=float), np.array(self.mask))

    def interpolate(self, pts: np.ndarray):
        """Multilinear interpolation at points, shape (..., dimension).

        Returns (values, valid); valid is False where the interpolation
        cell is missing or touches an exterior node.
        """
        pts = np.asarray(pts, dtype=float)
        scaled = (pts - self.origin) / self.h
        shape = self.shape
        base = np.floor(scaled).astype(np.int64)
        for a in range(self.dimension):
            base[..., a] = np.clip(base[..., a], 0, shape[a] - 2)
        frac = scaled - base
        valid = np.all((scaled >= -1e-9) & (scaled <= np.array(shape) - 1 + 1e-9),
                       axis=-1)
        frac = np.clip(frac, 0.0, 1.0)
        if self.dimension == 1:
            i = base[..., 0]
            fx = frac[..., 0]
            v = (1 - fx) * self.values[i] + fx * self.values[i + 1]
            ok = (self.mask[i] != EXTERIOR) & (self.mask[i + 1] != EXTERIOR)
        else:
            i, j = base[..., 0], base[..., 1]
            fx, fy = frac[..., 0], frac[..., 1]
            v00 = self.values[i, j]
            v10 = self.values[i + 1, j]
            v01 = self.values[i, j + 1]
            v11 = self.values[i + 1, j + 1]
            v = ((1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10
                 + (1 - fx) * fy * v01 + fx * fy * v11)
            ok = ((self.mask[i, j] != EXTERIOR) & (self.mask[i + 1, j] != EXTERIOR)
                  & (self.mask[i, j + 1] != EXTERIOR)
                  & (self.mask[i + 1, j + 1] != EXTERIOR))
        return v, valid & ok


# ---------------------------------------------------------------------------
# problems


ScalarField = Union[float, Callable[[np.ndarray], float]]


@dataclass(frozen=True)
class Problem:
    """One dead-core boundary value problem.

    The equation is -div(a(x)|grad u|^{p-2} grad u) + lambda0(x) f(u) = 0
    with u = g >= 0 on the boundary; f is the absorption law (f(s) = s_+^q
    for the power law).  Weight and lambda bounds are declared, not
    inferred; for constant coefficients they default to the constant.
    """

    exponents: Exponents
    dimension: int
    domain: Domain
    boundary: Callable[[np.ndarray], float]
    absorption: AbsorptionLaw
    weight: ScalarField = 1.0
    lam: ScalarField = 1.0
    weight_bounds: tuple = None  # type: ignore[assignment]
    lam_bounds: tuple = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.weight_bounds is None:
            if callable(self.weight):
                raise ValueError("weight_bounds required for a non-constant weight")
            object.__setattr__(self, "weight_bounds",
                               (float(self.weight), float(self.weight)))
        if self.lam_bounds is None:
            if callable(self.lam):
                raise ValueError("lam_bounds required for a non-constant lambda")
            object.__setattr__(self, "lam_bounds", (float(self.lam), float(self.lam)))

    def weight_at(self, pts: np.ndarray) -> np.ndarray:
        return _eval_field(self.weight, pts)

    def lam_at(self, pts: np.ndarray) -> np.ndarray:
        return _eval_field(self.lam, pts)

    def boundary_at(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        flat = pts.reshape(-1, pts.shape[-1])
        out = np.array([float(self.boundary(x)) for x in flat])
        return out.reshape(pts.shape[:-1])

    @property
    def structural_constants(self) -> dict:
        """Ellipticity/growth constants of the scalar-weight operator class."""
        a_min, a_max = self.weight_bounds
        return {"c1": a_min, "c2": 0.0, "c3": a_max, "c4": 0.0, "zeta": a_min}


def _eval_field(f: ScalarField, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    if not callable(f):
        return np.full(pts.shape[:-1], float(f))
    flat = pts.reshape(-1, pts.shape[-1])
    out = np.array([float(f(x)) for x in flat])
    return out.reshape(pts.shape[:-1])


def power_problem(p: float, q: float, domain: Domain,
                  lam: ScalarField, boundary: Callable[[np.ndarray], float],
                  weight: ScalarField = 1.0, *, weight_bounds=None,
                  lam_bounds=None, borderline: Optional[bool] = None) -> Problem:
    """Problem with the reference power-law absorption f(s) = s_+^q."""
    exps = Exponents(p, q) if borderline is None else Exponents(p, q, borderline)
    return Problem(exponents=exps, dimension=domain.dimension, domain=domain,
                   boundary=boundary, absorption=AbsorptionLaw.power(q),
                   weight=weight, lam=lam,
                   weight_bounds=weight_bounds, lam_bounds=lam_bounds)


# ---------------------------------------------------------------------------
# grid construction


def build_grid(problem: Problem, resolution: int) -> GridField:
    """Uniform grid over the domain with Dirichlet data filled in.

    ``resolution`` is the node count per axis of the bounding box.  For a
    disk, nodes outside are exterior and the first inside ring (any of the
    8 neighbours outside or off-grid) is Dirichlet, carrying g at the
    nearest boundary point.  Values start at 0 away from Dirichlet nodes.
    """
    dom = problem.domain
    if resolution < (3 if dom.dimension == 1 else 9):
        raise ValueError("resolution too small for this domain")
    lo, hi = dom.bounding_box()
    widths = hi - lo
    h = float(widths[0]) / (resolution - 1)
    shape = [resolution]
    for a in range(1, len(widths)):
        steps = widths[a] / h
        n_a = int(round(steps)) + 1
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError("domain extents must share a common spacing")
        shape.append(n_a)
    shape = tuple(shape)

    values = np.zeros(shape)
    mask = np.full(shape, INTERIOR, dtype=np.uint8)

    if isinstance(dom, Interval):
        mask[0] = mask[-1] = DIRICHLET
        values[0] = problem.boundary(np.array([dom.lo]))
        values[-1] = problem.boundary(np.array([dom.hi]))
    elif isinstance(dom, Rectangle):
        mask[0, :] = mask[-1, :] = DIRICHLET
        mask[:, 0] = mask[:, -1] = DIRICHLET
        pts = np.stack(np.meshgrid(
            lo[0] + h * np.arange(shape[0]),
            lo[1] + h * np.arange(shape[1]), indexing="ij"), axis=-1)
        ring = mask == DIRICHLET
        values[ring] = problem.boundary_at(pts[ring])
    else:  # Disk
        pts = np.stack(np.meshgrid(
            lo[0] + h * np.arange(shape[0]),
            lo[1] + h * np.arange(shape[1]), indexing="ij"), axis=-1)
        c = np.asarray(dom.center)
        rad = np.hypot(pts[..., 0] - c[0], pts[..., 1] - c[1])
        inside = rad <= dom.radius * (1.0 + 1e-12)
        mask[~inside] = EXTERIOR
        # ring: inside nodes with an 8-neighbour outside (or off the grid)
        padded = np.pad(inside, 1, constant_values=False)
        shield = np.ones_like(inside)
        for di in (0, 1, 2):
            for dj in (0, 1, 2):
                shield &= padded[di:di + shape[0], dj:dj + shape[1]]
        ring = inside & ~shield
        mask[ring] = DIRICHLET
        rr = np.where(rad > 1e-12 * dom.radius, rad, 1.0)
        proj = c + (pts - c) * (dom.radius / rr)[..., None]
        ring_idx = np.argwhere(ring)
        for i, j in ring_idx:
            values[i, j] = problem.boundary(proj[i, j])

    g = GridField(dom.dimension, h, lo, values, mask)
    bad = g.values[g.mask == DIRICHLET] < 0.0
    if np.any(bad):
        raise ValueError("boundary data must be non-negative")
    return g


def field_from_function(problem: Problem, resolution: int,
                        fn: Callable[[np.ndarray], float]) -> GridField:
    """Sample fn on the problem grid (Dirichlet nodes keep g, not fn)."""
    g = build_grid(problem, resolution)
    pts = g.points()
    flat = pts.reshape(-1, g.dimension)
    vals = np.array([float(fn(x)) for x in flat]).reshape(g.shape)
    out = np.array(g.values)
    sel = g.mask == INTERIOR
    out[sel] = vals[sel]
    return g.with_values(out)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def __str__(self):
        return f"{self.field}: {self.message}"


def _probe_points(domain: Domain, n: int = 33) -> np.ndarray:
    lo, hi = domain.bounding_box()
    if domain.dimension == 1:
        xs = np.linspace(lo[0], hi[0], n)
        return xs[:, None]
    xs = np.linspace(lo[0], hi[0], n)
    ys = np.linspace(lo[1], hi[1], n)
    pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    if isinstance(domain, Disk):
        c = np.asarray(domain.center)
        keep = np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1]) <= domain.radius
        pts = pts[keep]
    return pts


def _boundary_points(domain: Domain, n: int = 64) -> np.ndarray:
    if isinstance(domain, Interval):
        return np.array([[domain.lo], [domain.hi]])
    if isinstance(domain, Rectangle):
        xs = np.linspace(domain.x_lo, domain.x_hi, n)
        ys = np.linspace(domain.y_lo, domain.y_hi, n)
        edges = [np.stack([xs, np.full_like(xs, domain.y_lo)], axis=-1),
                 np.stack([xs, np.full_like(xs, domain.y_hi)], axis=-1),
                 np.stack([np.full_like(ys, domain.x_lo), ys], axis=-1),
                 np.stack([np.full_like(ys, domain.x_hi), ys], axis=-1)]
        return np.concatenate(edges)
    ang = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    c = np.asarray(domain.center)
    return c + domain.radius * np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def validate_problem(problem: Problem) -> list:
    """Check the problem invariants; returns a list of violations (empty = valid)."""
    out = []
    ex = problem.exponents
    if ex.q == ex.p - 1.0 and not ex.borderline:
        out.append(Violation("exponents", "q = p-1 requires borderline mode"))
    if ex.borderline and ex.q != ex.p - 1.0:
        out.append(Violation("exponents", "borderline mode requires q = p-1"))
    if not ex.borderline and ex.q < ex.p - 1.0:
        g = ex.gamma
        if abs(g * (ex.p - 1.0 - ex.q) - ex.p) > 1e-12 * ex.p:
            out.append(Violation("exponents", "gamma*(p-1-q) deviates from p"))
    if problem.dimension not in (1, 2):
        out.append(Violation("dimension", "dimension must be 1 or 2"))
    if problem.domain.dimension != problem.dimension:
        out.append(Violation("domain", "domain rank differs from dimension"))

    a_min, a_max = problem.weight_bounds
    if not a_min > 0.0:
        out.append(Violation("weight", f"a_min must be positive, got {a_min}"))
    if a_min > a_max:
        out.append(Violation("weight", "a_min exceeds a_max"))
    l_min, l_max = problem.lam_bounds
    if l_min < 0.0:
        out.append(Violation("lambda", f"lambda_minus must be >= 0, got {l_min}"))
    if l_min > l_max:
        out.append(Violation("lambda", "lambda_minus exceeds lambda_plus"))

    pts = _probe_points(problem.domain)
    av = problem.weight_at(pts)
    if np.any(av < a_min - 1e-12) or np.any(av > a_max + 1e-12):
        out.append(Violation("weight", "sampled weight leaves [a_min, a_max]"))
    if np.any(av <= 0.0):
        out.append(Violation("weight", "sampled weight is not positive"))
    lv = problem.lam_at(pts)
    if np.any(lv < -1e-15):
        out.append(Violation("lambda", "sampled lambda is negative"))
    if np.any(lv < l_min - 1e-12) or np.any(lv > l_max + 1e-12):
        out.append(Violation("lambda", "sampled lambda leaves declared bounds"))

    bpts = _boundary_points(problem.domain)
    gv = problem.boundary_at(bpts)
    if np.any(gv < 0.0):
        out.append(Violation("boundary", "boundary data takes negative values"))

    if problem.absorption.q != ex.q:
        out.append(Violation("absorption", "absorption order differs from q"))
    # monotonicity of f on the attained range [0, max g]
    top = float(np.max(gv)) if gv.size else 1.0
    if top > 0.0:
        ss = np.linspace(0.0, top, 64)
        fv = problem.absorption.f(ss)
        if np.any(np.diff(fv) < -1e-12 * max(1.0, np.max(np.abs(fv)))):
            out.append(Violation("absorption", "f decreases on [0, max g]"))
    return out


# ---------------------------------------------------------------------------
# ball extrema


def ball_extrema(fld: GridField, center, r: float) -> BallExtrema:
    """Extrema of a field over the discrete ball |x - center| <= r.

    sup/inf range over interior nodes in the ball; sup_on_sphere over the
    annulus r - h < |x - center| <= r.  Raises if no interior node
    qualifies.  Requires r >= 2h.
    """
    if r < 2.0 * fld.h:
        raise ValueError(f"ball radius {r} below 2h = {2 * fld.h}")
    center = np.atleast_1d(np.asarray(center, dtype=float))
    lo_idx = np.maximum(np.floor((center - r - fld.origin) / fld.h).astype(int), 0)
    hi_idx = np.minimum(np.ceil((center + r - fld.origin) / fld.h).astype(int),
                        np.array(fld.shape) - 1)
    if np.any(lo_idx > hi_idx):
        raise ValueError("ball does not meet the grid")
    sl = tuple(slice(a, b + 1) for a, b in zip(lo_idx, hi_idx))
    sub_vals = fld.values[sl]
    sub_mask = fld.mask[sl]
    axes = [fld.origin[a] + fld.h * np.arange(lo_idx[a], hi_idx[a] + 1)
            for a in range(fld.dimension)]
    grids = np.meshgrid(*axes, indexing="ij")
    dist = np.sqrt(sum((g - c) ** 2 for g, c in zip(grids, center)))
    inside = (dist <= r) & (sub_mask == INTERIOR)
    if not np.any(inside):
        raise ValueError("no interior node inside the ball")
    vals = sub_vals[inside]
    sphere = (dist > r - fld.h) & (dist <= r) & (sub_mask == INTERIOR)
    if not np.any(sphere):
        raise ValueError("no interior node on the sphere annulus")
    return BallExtrema(float(vals.max()), float(vals.min()),
                       float(sub_vals[sphere].max()))
