"""Configuration-driven experiment runner.

Subcommands solve / oracle-check / sweep / liouville / borderline /
stability / report each take a JSON config, an output directory and a
seed, run the requested experiment and emit CSV tables, a JSON summary
and optional SVG fit plots.  Exit code 0 means every check passed, 2
means some check failed, 1 means the run itself errored.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__
from .core import (Disk, Interval, Rectangle, gamma_exponent, power_problem,
                   validate_problem)
from .geometry import (REGION_DEAD, REGION_POSITIVE, extract_regions,
                       fit_gradient_exponent, fit_growth_exponent,
                       nondegeneracy_scan, porosity_estimate)
from .oracle import borderline_exponential, theta_constant
from .solver import harnack_quotient, kkt_measure, solve

KINDS = ("solve", "oracle_check", "exponent_sweep", "liouville",
         "borderline", "stability", "full_report")

_COMMON_KEYS = {"kind", "resolutions", "tolerance", "output_dir", "formats"}
_KIND_KEYS = {
    "solve": {"problem"},
    "oracle_check": {"p", "q", "lambda", "r0"},
    "exponent_sweep": {"pairs", "dimension", "r0", "fb_samples",
                       "min_radius_mult"},
    "liouville": {"c", "p", "q", "lambda", "s_list", "dimension"},
    "borderline": {"p", "lambda", "dimension", "axis"},
    "stability": {"p", "q", "lambda", "sigmas"},
    "full_report": {"problem", "fb_samples", "min_radius_mult"},
}
_REQUIRED = {
    "solve": {"problem", "resolutions"},
    "oracle_check": {"p", "q", "lambda", "resolutions"},
    "exponent_sweep": {"pairs", "resolutions"},
    "liouville": {"c", "p", "q", "lambda", "s_list", "resolutions"},
    "borderline": {"p", "lambda", "resolutions"},
    "stability": {"p", "q", "lambda", "sigmas", "resolutions"},
    "full_report": {"problem", "resolutions"},
}

_PROBLEM_KEYS = {"p", "q", "dimension", "domain", "lambda", "weight",
                 "absorption", "boundary"}


class ConfigError(ValueError):
    pass


def _worker_count() -> int:
    env = os.environ.get("DEADCORE_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_ordered(tasks):
    """Run callables concurrently, results in submission order."""
    workers = _worker_count()
    if workers == 1 or len(tasks) == 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(t) for t in tasks]
        return [f.result() for f in futures]


@dataclass
class ExperimentSpec:
    """Validated experiment description (one JSON document)."""

    kind: str
    config: dict
    resolutions: list
    tolerance: float
    output_dir: Path
    seed: int
    formats: tuple = ("csv", "json")

    @classmethod
    def from_config(cls, cfg: dict, *, kind: str, out, seed: int) -> "ExperimentSpec":
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        if kind not in KINDS:
            raise ConfigError(f"unknown kind {kind!r}")
        if "kind" in cfg and cfg["kind"] != kind:
            raise ConfigError(
                f"config kind {cfg['kind']!r} does not match subcommand {kind!r}")
        allowed = _COMMON_KEYS | _KIND_KEYS[kind]
        unknown = sorted(set(cfg) - allowed)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        missing = sorted(_REQUIRED[kind] - set(cfg))
        if missing:
            raise ConfigError(f"missing config keys: {', '.join(missing)}")
        res = list(cfg["resolutions"])
        if not res or any(res[i] >= res[i + 1] for i in range(len(res) - 1)):
            raise ConfigError("resolutions must be strictly increasing, len >= 1")
        if kind == "liouville":
            if not 0.0 < float(cfg["c"]) <= 1.0:
                raise ConfigError("liouville requires c in (0, 1]")
            if not cfg["s_list"]:
                raise ConfigError("liouville requires a non-empty s_list")
        tol = float(cfg.get("tolerance", 1e-6))
        if tol <= 0:
            raise ConfigError("tolerance must be positive")
        out_dir = Path(out if out is not None else cfg.get("output_dir", "."))
        fmts = tuple(cfg.get("formats", ("csv", "json")))
        bad = [f for f in fmts if f not in ("csv", "json", "svg")]
        if bad:
            raise ConfigError(f"unknown formats: {bad}")
        return cls(kind=kind, config=dict(cfg), resolutions=res, tolerance=tol,
                   output_dir=out_dir, seed=int(seed), formats=fmts)


@dataclass
class RunReport:
    """Tables, pass/fail checks and provenance of one experiment run."""

    kind: str
    tables: dict = dc_field(default_factory=dict)   # name -> (columns, rows)
    checks: list = dc_field(default_factory=list)
    plots: list = dc_field(default_factory=list)    # (name, xlabel, ylabel, x, y)
    provenance: dict = dc_field(default_factory=dict)
    walltime_s: float = 0.0

    def add_check(self, name, value, bound, op, passed):
        self.checks.append({"name": name, "value": float(value),
                            "bound": float(bound), "op": op,
                            "passed": bool(passed)})

    @property
    def all_passed(self) -> bool:
        return all(c["passed"] for c in self.checks)


def _domain_from_config(cfg: dict):
    kind = cfg.get("type")
    if kind == "interval":
        return Interval(float(cfg["lo"]), float(cfg["hi"]))
    if kind == "rectangle":
        return Rectangle(float(cfg["x_lo"]), float(cfg["x_hi"]),
                         float(cfg["y_lo"]), float(cfg["y_hi"]))
    if kind == "disk":
        return Disk(tuple(cfg["center"]), float(cfg["radius"]))
    raise ConfigError(f"unknown domain type {kind!r}")


def _problem_from_config(cfg: dict):
    if not isinstance(cfg, dict):
        raise ConfigError("problem must be a JSON object")
    unknown = sorted(set(cfg) - _PROBLEM_KEYS)
    if unknown:
        raise ConfigError(f"unknown problem keys: {', '.join(unknown)}")
    for key in ("p", "q", "domain", "lambda", "boundary"):
        if key not in cfg:
            raise ConfigError(f"problem is missing {key!r}")
    p, q = float(cfg["p"]), float(cfg["q"])
    dom = _domain_from_config(cfg["domain"])
    lam = float(cfg["lambda"])
    weight = float(cfg.get("weight", 1.0))
    bnd = cfg["boundary"]
    btype = bnd.get("type")
    if btype == "constant":
        val = float(bnd["value"])
        g = lambda x: val
    elif btype == "profile":
        r0 = float(bnd["r0"])
        th = bnd.get("theta", "matched")
        gam = gamma_exponent(p, q)
        theta = (theta_constant(dom.dimension, p, q, lam)
                 if th == "matched" else float(th))
        g = lambda x: theta * max(0.0, float(np.linalg.norm(x)) - r0) ** gam
    elif btype == "exponential":
        g = borderline_exponential(p, lam, int(bnd.get("axis", 1)))
    else:
        raise ConfigError(f"unknown boundary type {btype!r}")
    borderline = q == p - 1.0
    problem = power_problem(p, q, dom, lam, g, weight, borderline=borderline)
    viol = validate_problem(problem)
    if viol:
        raise ConfigError("invalid problem: " + "; ".join(str(v) for v in viol))
    return problem


# ---------------------------------------------------------------------------
# experiment implementations


def _oracle_problem_1d(p: float, q: float, lam: float, r0: float):
    theta = theta_constant(1, p, q, lam)
    gam = gamma_exponent(p, q)
    gval = theta * (1.0 - r0) ** gam
    return power_problem(p, q, Interval(-1.0, 1.0), lam, lambda x: gval), theta


def _run_oracle_check(spec: ExperimentSpec, report: RunReport):
    cfg = spec.config
    p, q, lam = float(cfg["p"]), float(cfg["q"]), float(cfg["lambda"])
    r0 = float(cfg.get("r0", 0.5))
    problem, theta = _oracle_problem_1d(p, q, lam, r0)
    gam = gamma_exponent(p, q)

    def one(n):
        sol = solve(problem, tol=spec.tolerance, resolution=n)
        pts = sol.field.points()[..., 0]
        exact = theta * np.maximum(np.abs(pts) - r0, 0.0) ** gam
        err = float(np.max(np.abs(sol.field.values - exact)))
        regions = extract_regions(sol)
        dead = regions.classes == REGION_DEAD
        if np.any(dead):
            core_hi = float(np.max(np.abs(pts[dead])))
            core_err = abs(core_hi - r0)
        else:
            core_err = math.inf
        return sol, err, core_err

    results = _run_ordered([lambda n=n: one(n) for n in spec.resolutions])
    rows = []
    for n, (sol, err, core_err) in zip(spec.resolutions, results):
        rows.append([n, sol.field.h, err, core_err, sol.energy,
                     sol.iterations, sol.converged])
    report.tables["oracle_check"] = (
        ["n", "h", "sup_error", "core_endpoint_error", "energy",
         "iterations", "converged"], rows)
    errs = [r[2] for r in rows]
    # below ~50x the solver tolerance the error is iteration noise and
    # refinement comparisons are meaningless
    floor = 50.0 * spec.tolerance
    dec = all(errs[i + 1] <= max(errs[i] * 1.05, floor)
              for i in range(len(errs) - 1))
    report.add_check("sup_error_decreasing", errs[-1], errs[0], "<=", dec)
    hs = [r[1] for r in rows]
    ok_core = all(r[3] <= 2 * h for r, h in zip(rows, hs))
    report.add_check("core_endpoint_within_2h", rows[-1][3], 2 * hs[-1],
                     "<=", ok_core)


def _run_solve(spec: ExperimentSpec, report: RunReport):
    problem = _problem_from_config(spec.config["problem"])
    def one(n):
        return solve(problem, tol=spec.tolerance, resolution=n)
    sols = _run_ordered([lambda n=n: one(n) for n in spec.resolutions])
    rows = []
    for n, sol in zip(spec.resolutions, sols):
        ring = sol.field.mask == 1
        max_g = float(sol.field.values[ring].max()) if np.any(ring) else 0.0
        max_u = float(sol.field.values.max())
        trivial = max_u <= 1e-14
        rows.append([n, sol.field.h, sol.energy, sol.kkt_residual,
                     sol.iterations, sol.converged, max_u, max_g, trivial])
        report.add_check(f"max_principle_n{n}", max_u, max_g * (1 + 1e-9) + 1e-15,
                         "<=", max_u <= max_g * (1 + 1e-9) + 1e-15)
        report.add_check(f"converged_n{n}", float(sol.converged), 1.0, "==",
                         sol.converged)
    report.tables["solve"] = (
        ["n", "h", "energy", "kkt_residual", "iterations", "converged",
         "max_u", "max_g", "trivial"], rows)


def _median_fits(sol, regions, rng, fb_samples, min_radius_mult):
    dead_side = [tuple(ix) for ix in regions.fb_nodes
                 if regions.classes[tuple(ix)] == REGION_DEAD]
    if not dead_side:
        raise ValueError("no dead-side free-boundary nodes")
    k = min(fb_samples, len(dead_side))
    chosen = [dead_side[i] for i in
              sorted(rng.choice(len(dead_side), k, replace=False))]
    growth, grad, r2s = [], [], []
    for ix in chosen:
        f = fit_growth_exponent(sol, regions, ix, min_radius_mult=min_radius_mult)
        fg = fit_gradient_exponent(sol, regions, ix, min_radius_mult=min_radius_mult)
        growth.append(f.slope)
        grad.append(fg.slope)
        r2s.append(f.r_squared)
    return (float(np.median(growth)), float(np.median(grad)),
            float(np.median(r2s)), len(chosen), f)


def _run_exponent_sweep(spec: ExperimentSpec, report: RunReport):
    cfg = spec.config
    pairs = [tuple(map(float, pr)) for pr in cfg["pairs"]]  # (p, q, lambda)
    dim = int(cfg.get("dimension", 1))
    r0 = float(cfg.get("r0", 0.5))
    fb_samples = int(cfg.get("fb_samples", 8))
    mrm = float(cfg.get("min_radius_mult", 5.0))
    rng = np.random.default_rng(spec.seed)

    def build(p, q, lam):
        gam = gamma_exponent(p, q)
        if dim == 1:
            th = theta_constant(1, p, q, lam)
            gval = th * (1.0 - r0) ** gam
            return power_problem(p, q, Interval(-1, 1), lam, lambda x: gval)
        th = theta_constant(1, p, q, lam)
        gval = th * (1.0 - r0) ** gam
        return power_problem(p, q, Disk((0.0, 0.0), 1.0), lam, lambda x: gval)

    tasks = []
    for p, q, lam in pairs:
        for n in spec.resolutions:
            tasks.append((p, q, lam, n))

    def one(p, q, lam, n):
        sol = solve(build(p, q, lam), tol=spec.tolerance, resolution=n)
        return sol, extract_regions(sol)

    sols = _run_ordered([lambda t=t: one(*t) for t in tasks])
    growth_rows, grad_rows = [], []
    tol = 0.15 if dim == 1 else 0.25
    for (p, q, lam, n), (sol, regions) in zip(tasks, sols):
        gam = gamma_exponent(p, q)
        med_g, med_dg, r2, used, last_fit = _median_fits(
            sol, regions, rng, fb_samples, mrm)
        ok_g = abs(med_g - gam) <= tol
        growth_rows.append([p, q, n, sol.field.h, med_g, gam,
                            abs(med_g - gam), r2, used, ok_g])
        target_d = gam - 1.0
        ok_d = abs(med_dg - target_d) <= tol
        grad_rows.append([p, q, n, sol.field.h, med_dg, target_d,
                          abs(med_dg - target_d), r2, used, ok_d])
        report.add_check(f"growth_p{p}_q{q}_n{n}", med_g, tol, "slope_err<=", ok_g)
        report.add_check(f"gradient_p{p}_q{q}_n{n}", med_dg, tol, "slope_err<=", ok_d)
        report.plots.append((f"growth_p{p}_q{q}_n{n}", "r", "sup_Br",
                             list(map(float, last_fit.radii)),
                             list(map(float, last_fit.values))))
    cols = ["p", "q", "n", "h", "slope", "target", "abs_error", "r_squared",
            "fb_nodes_used", "pass"]
    report.tables["growth"] = (cols, growth_rows)
    report.tables["gradient"] = (cols, grad_rows)


def liouville_sweep(c: float, p: float, q: float, lam: float, s_list,
                    *, dimension: int = 1, resolution: int = 513,
                    tol: float = 1e-6):
    """Entire-solution growth threshold scan.

    Solves on balls B_s with constant boundary data c*Theta*s^gamma and
    reports the dead-core radius fraction against the predicted lower
    bound 1 - c^{(p-1-q)/p}.  Needs unit weight and constant lambda.
    """
    if not 0.0 <= c <= 1.0:
        raise ValueError("c must lie in [0, 1]")
    gam = gamma_exponent(p, q)
    theta = theta_constant(dimension, p, q, lam)
    bound = 1.0 - c ** (1.0 / gam) if c > 0.0 else 1.0
    rows = []

    def one(s):
        # at least ~20 nodes across each ball radius
        if resolution < 41:
            raise ValueError("resolution insufficient for the largest s")
        gval = c * theta * s ** gam
        if dimension == 1:
            dom = Interval(-s, s)
        else:
            dom = Disk((0.0, 0.0), s)
        problem = power_problem(p, q, dom, lam, lambda x: gval)
        sol = solve(problem, tol=tol, resolution=resolution)
        regions = extract_regions(sol)
        pts = sol.field.points()
        rad = np.sqrt(np.sum(pts * pts, axis=-1))
        pos = regions.classes == REGION_POSITIVE
        rho = float(np.min(rad[pos])) if np.any(pos) else float(s)
        return sol.field.h, rho

    results = _run_ordered([lambda s=s: one(float(s)) for s in s_list])
    for s, (h, rho) in zip(s_list, results):
        s = float(s)
        ratio = rho / s
        slack = 0.05 + 2.0 * h / s
        if c < 1.0:
            ok = ratio >= bound - slack
        else:
            ok = ratio <= 4.0 * h / s
        rows.append([s, h, rho, ratio, bound, slack, ok])
    return rows, bound


def _run_liouville(spec: ExperimentSpec, report: RunReport):
    cfg = spec.config
    rows, bound = liouville_sweep(
        float(cfg["c"]), float(cfg["p"]), float(cfg["q"]), float(cfg["lambda"]),
        cfg["s_list"], dimension=int(cfg.get("dimension", 1)),
        resolution=spec.resolutions[-1], tol=spec.tolerance)
    report.tables["liouville"] = (
        ["s", "h", "rho_dc", "ratio", "bound", "slack", "pass"], rows)
    for row in rows:
        report.add_check(f"liouville_s{row[0]}", row[3], bound, ">=bound-slack",
                         row[6])


def borderline_run(p: float, lam: float, resolution: int, *,
                   dimension: int = 2, axis: int = 1, tol: float = 1e-6):
    """Borderline absorption order q = p-1: solve with the exponential
    exact trace and report interior positivity plus the sup error."""
    exact = borderline_exponential(p, lam, axis)
    if dimension == 1:
        dom = Interval(0.0, 1.0)
    else:
        dom = Rectangle(0.0, 1.0, 0.0, 1.0)
    problem = power_problem(p, p - 1.0, dom, lam, exact, borderline=True)
    sol = solve(problem, tol=tol, resolution=resolution)
    pts = sol.field.points()
    flat = pts.reshape(-1, dimension)
    ex = np.array([exact(x) for x in flat]).reshape(sol.field.shape)
    interior = sol.field.mask == 0
    min_u = float(sol.field.values[interior].min())
    min_exact = float(ex[interior].min())
    sup_err = float(np.max(np.abs(sol.field.values - ex)[sol.field.mask != 2]))
    dead = int(np.sum(interior & (sol.field.values <= 1e-10)))
    return [resolution, sol.field.h, min_u, min_exact, sup_err, dead,
            sol.converged]


def _run_borderline(spec: ExperimentSpec, report: RunReport):
    cfg = spec.config
    p, lam = float(cfg["p"]), float(cfg["lambda"])
    dim = int(cfg.get("dimension", 2))
    axis = int(cfg.get("axis", 1))
    rows = _run_ordered([
        lambda n=n: borderline_run(p, lam, n, dimension=dim, axis=axis,
                                   tol=spec.tolerance)
        for n in spec.resolutions])
    report.tables["borderline"] = (
        ["n", "h", "min_u", "min_exact", "sup_error", "dead_core_nodes",
         "converged"], rows)
    for row in rows:
        report.add_check(f"positive_n{row[0]}", row[2], 0.9 * row[3], ">=",
                         row[2] >= 0.9 * row[3])
        report.add_check(f"no_dead_core_n{row[0]}", row[5], 0, "==",
                         row[5] == 0)
    errs = [r[4] for r in rows]
    dec = all(errs[i + 1] < errs[i] for i in range(len(errs) - 1))
    if len(errs) > 1:
        report.add_check("sup_error_decreasing", errs[-1], errs[0], "<", dec)


def _run_stability(spec: ExperimentSpec, report: RunReport):
    from .geometry import STABILITY_CONSTANT, deadcore_symdiff
    cfg = spec.config
    p, q, lam = float(cfg["p"]), float(cfg["q"]), float(cfg["lambda"])
    gam = gamma_exponent(p, q)
    theta = theta_constant(1, p, q, lam)
    n = spec.resolutions[-1]

    def pair(sigma):
        sols = []
        for r0 in (1.0 - sigma, 1.0 - sigma / 2.0):
            gval = theta * (1.0 - r0) ** gam
            prob = power_problem(p, q, Interval(-1, 1), lam,
                                 lambda x, g=gval: g)
            sols.append(solve(prob, tol=spec.tolerance, resolution=n))
        return deadcore_symdiff(sols[0], sols[1], sigma)

    sigmas = [float(s) for s in cfg["sigmas"]]
    results = _run_ordered([lambda s=s: pair(s) for s in sigmas])
    rows = []
    for s, (meas, ok) in zip(sigmas, results):
        rows.append([s, meas, STABILITY_CONSTANT * s, ok])
        report.add_check(f"stability_sigma{s}", meas, STABILITY_CONSTANT * s,
                         "<=", ok)
    report.tables["stability"] = (["sigma", "measure", "limit", "pass"], rows)


def _run_full_report(spec: ExperimentSpec, report: RunReport):
    problem = _problem_from_config(spec.config["problem"])
    fb_samples = int(spec.config.get("fb_samples", 8))
    mrm = float(spec.config.get("min_radius_mult", 5.0))
    rng = np.random.default_rng(spec.seed)
    n = spec.resolutions[-1]
    sol = solve(problem, tol=spec.tolerance, resolution=n)
    regions = extract_regions(sol)
    rows = [[n, sol.field.h, sol.energy, sol.kkt_residual, sol.iterations,
             sol.converged]]
    report.tables["solve"] = (
        ["n", "h", "energy", "kkt_residual", "iterations", "converged"], rows)
    report.add_check("converged", float(sol.converged), 1.0, "==", sol.converged)

    mrep = kkt_measure(sol)
    report.add_check("measure_min", mrep.min_value, -mrep.tol, ">=",
                     mrep.min_value >= -mrep.tol)
    report.add_check("measure_support", mrep.support_distance,
                     2 * sol.field.h, "<=",
                     mrep.support_distance <= 2 * sol.field.h)

    diag_rows = []
    if len(regions.fb_nodes) > 0:
        med_g, med_dg, r2, used, _ = _median_fits(sol, regions, rng,
                                                  fb_samples, mrm)
        gam = problem.exponents.gamma
        tol = 0.15 if problem.dimension == 1 else 0.25
        report.add_check("growth_slope", med_g, tol, "slope_err<=",
                         abs(med_g - gam) <= tol)
        report.add_check("gradient_slope", med_dg, tol, "slope_err<=",
                         abs(med_dg - (gam - 1)) <= tol)
        c_min, _ = nondegeneracy_scan(sol, regions)
        delta, _ = porosity_estimate(sol, regions)
        report.add_check("nondegeneracy_cmin", c_min, 0.0, ">", c_min > 0.0)
        report.add_check("porosity", delta, 0.0, ">", delta > 0.0)
        qs = []
        for ix in regions.fb_nodes[:fb_samples]:
            pt = sol.field.node_point(ix)
            r = problem.domain.boundary_distance(pt) / 2.0
            while r >= 4 * sol.field.h:
                qs.append(harnack_quotient(sol, pt, r))
                r /= 2.0
        if qs:
            qs = np.array(qs)
            med = float(np.median(qs))
            mx = float(np.max(qs))
            report.add_check("harnack_bounded", mx, 10 * med, "<=",
                             mx <= 10 * med or med == 0.0)
        diag_rows.append([med_g, med_dg, c_min, delta,
                          mrep.min_value, mrep.support_distance])
        report.tables["diagnostics"] = (
            ["growth_slope", "gradient_slope", "c_min", "porosity",
             "measure_min", "measure_support_dist"], diag_rows)


_RUNNERS = {
    "solve": _run_solve,
    "oracle_check": _run_oracle_check,
    "exponent_sweep": _run_exponent_sweep,
    "liouville": _run_liouville,
    "borderline": _run_borderline,
    "stability": _run_stability,
    "full_report": _run_full_report,
}


def run_experiment(spec: ExperimentSpec) -> RunReport:
    """Dispatch the experiment, write report files, return the report."""
    t0 = time.time()
    report = RunReport(kind=spec.kind)
    _RUNNERS[spec.kind](spec, report)
    report.walltime_s = time.time() - t0
    report.provenance = {
        "kind": spec.kind,
        "config": spec.config,
        "seed": spec.seed,
        "tolerance": spec.tolerance,
        "resolutions": spec.resolutions,
        "version": __version__,
    }
    emit_report(report, spec.output_dir, formats=spec.formats,
                seed=spec.seed)
    return report


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_report(report: RunReport, out_dir, formats=("csv", "json"),
                *, seed: int = 0):
    """Write CSV tables, a JSON summary and optional SVG plots.

    File names embed kind, timestamp and seed; CSV bodies contain no
    timestamps so that identical runs are byte-identical.
    """
    import csv

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%dT%H%M%S")
    base = f"{report.kind}-{stamp}-seed{seed}"
    written = []
    try:
        if "csv" in formats:
            for name, (cols, rows) in report.tables.items():
                path = out_dir / f"{base}-{name}.csv"
                with open(path, "w", newline="", encoding="utf-8") as fh:
                    w = csv.writer(fh, lineterminator="\r\n")
                    w.writerow(cols)
                    for row in rows:
                        w.writerow([_csv_cell(v) for v in row])
                written.append(path)
        if "json" in formats:
            summary = {
                "kind": report.kind,
                "checks": report.checks,
                "all_passed": report.all_passed,
                "tables": {k: len(v[1]) for k, v in report.tables.items()},
                "provenance": report.provenance,
                "walltime_s": report.walltime_s,
            }
            path = out_dir / f"{base}-summary.json"
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(summary, fh, sort_keys=True, indent=2)
            written.append(path)
        if "svg" in formats and report.plots:
            import matplotlib
            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
            for name, xlabel, ylabel, x, y in report.plots:
                fig, ax = plt.subplots(figsize=(4, 3))
                ax.loglog(x, y, "o-")
                ax.set_xlabel(xlabel)
                ax.set_ylabel(ylabel)
                ax.set_title(name)
                path = out_dir / f"{base}-{name}.svg"
                fig.savefig(path, metadata={"Date": None})
                plt.close(fig)
                written.append(path)
    except OSError as exc:
        raise OSError(f"failed writing report under {out_dir}: {exc}") from exc
    return written


_SUBCOMMANDS = {
    "solve": "solve",
    "oracle-check": "oracle_check",
    "sweep": "exponent_sweep",
    "liouville": "liouville",
    "borderline": "borderline",
    "stability": "stability",
    "report": "full_report",
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="deadcore",
        description="dead-core solver and free-boundary analysis experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None)
        sp.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        spec = ExperimentSpec.from_config(
            cfg, kind=_SUBCOMMANDS[args.command], out=args.out, seed=args.seed)
        report = run_experiment(spec)
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for c in report.checks:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"[{status}] {c['name']}: value={c['value']:.6g} "
              f"{c['op']} {c['bound']:.6g}")
    return 0 if report.all_passed else 2


if __name__ == "__main__":
    sys.exit(main())
