"""Numba kernels for the pointwise relaxation solver.

Lexicographic Gauss-Seidel sweeps with exact one-dimensional nodal solves.
The nodal objective restricted to one unknown is convex; its derivative is
rootfound by a bracketed secant (Illinois) with closed forms for p = 2
power laws.  All kernels release the GIL so independent solves can run on
a thread pool.

Convention: the absorption derivative at u = 0 is the right limit of
f (nonzero only for the power law with q = 0), which makes the nodal
derivative right-continuous at the constraint and the clamp decision
exact.  The measure-flavoured gradient uses f(0) = 0 instead.
"""

import math

import numba as nb
import numpy as np

_MAX_NODE_ITER = 60


@nb.njit(inline="always")
def _wpow(m, e2):
    # m >= 0 is a squared gradient norm; returns m**e2 with the
    # degenerate/singular origin handled so that w*g -> 0 as g -> 0
    if e2 == 0.0:
        return 1.0
    if m <= 0.0:
        return 0.0
    if e2 == 0.5:
        return math.sqrt(m)
    if e2 == 1.0:
        return m
    return m ** e2


@nb.njit(inline="always")
def _fabs(law, s, q, tp, mp):
    if s <= 0.0:
        return 0.0
    if law == 0:
        return s ** q
    if law == 1:
        return math.expm1(s ** tp)
    if law == 2:
        return math.log1p(s ** tp)
    if law == 3:
        return s ** q * math.log1p(s ** tp)
    return s ** q / (1.0 + s ** tp) ** mp


@nb.njit(inline="always")
def _d_node_1d(u, i, t, h, aL, aR, lamh, p, e2, law, q, tp, mp, f0p):
    dL = (t - u[i - 1]) / h
    dR = (u[i + 1] - t) / h
    acc = aL * _wpow(dL * dL, e2) * dL - aR * _wpow(dR * dR, e2) * dR
    fa = f0p if t == 0.0 else _fabs(law, t, q, tp, mp)
    return acc + lamh * fa


@nb.njit(inline="always")
def _d_node_2d(u, i, j, t, h, acell, lamh, e2, law, q, tp, mp, f0p):
    acc = 0.0
    for ci in range(i - 1, i + 1):
        for cj in range(j - 1, j + 1):
            a_c = acell[ci, cj]
            if a_c == 0.0:
                continue
            if ci == i - 1:
                gxt = (t - u[ci, j]) / h
                sx = 1.0
            else:
                gxt = (u[ci + 1, j] - t) / h
                sx = -1.0
            if cj == j - 1:
                gyt = (t - u[i, cj]) / h
                sy = 1.0
            else:
                gyt = (u[i, cj + 1] - t) / h
                sy = -1.0
            bp = 2 * cj + 1 - j
            ap = 2 * ci + 1 - i
            gxo = (u[ci + 1, bp] - u[ci, bp]) / h
            gyo = (u[ap, cj + 1] - u[ap, cj]) / h
            wA = _wpow(gxt * gxt + gyt * gyt, e2)
            wB = _wpow(gxt * gxt + gyo * gyo, e2)
            wC = _wpow(gxo * gxo + gyt * gyt, e2)
            acc += 0.25 * h * a_c * ((wA + wB) * gxt * sx + (wA + wC) * gyt * sy)
    fa = f0p if t == 0.0 else _fabs(law, t, q, tp, mp)
    return acc + lamh * fa


@nb.njit(inline="always")
def _illinois_1d(u, i, h, aL, aR, lamh, p, e2, law, q, tp, mp, f0p,
                 hi0, told, node_tol):
    lo = 0.0
    dlo = _d_node_1d(u, i, 0.0, h, aL, aR, lamh, p, e2, law, q, tp, mp, f0p)
    if dlo >= 0.0:
        return 0.0
    hi = hi0
    dhi = _d_node_1d(u, i, hi, h, aL, aR, lamh, p, e2, law, q, tp, mp, f0p)
    if dhi <= 0.0:
        return hi
    t = told
    if not (lo < t < hi):
        t = 0.5 * (lo + hi)
    side = 0
    for _ in range(_MAX_NODE_ITER):
        dt = _d_node_1d(u, i, t, h, aL, aR, lamh, p, e2, law, q, tp, mp, f0p)
        if abs(dt) <= node_tol:
            break
        if dt > 0.0:
            hi = t
            dhi = dt
            if side == 1:
                dlo *= 0.5
            side = 1
        else:
            lo = t
            dlo = dt
            if side == -1:
                dhi *= 0.5
            side = -1
        if hi - lo <= 1e-15 * hi0:
            t = 0.5 * (lo + hi)
            break
        t = (lo * dhi - hi * dlo) / (dhi - dlo)
        if not (lo < t < hi):
            t = 0.5 * (lo + hi)
    if t < 1e-13 * hi0:
        return 0.0
    return t


@nb.njit(inline="always")
def _illinois_2d(u, i, j, h, acell, lamh, e2, law, q, tp, mp, f0p,
                 hi0, told, node_tol):
    lo = 0.0
    dlo = _d_node_2d(u, i, j, 0.0, h, acell, lamh, e2, law, q, tp, mp, f0p)
    if dlo >= 0.0:
        return 0.0
    hi = hi0
    dhi = _d_node_2d(u, i, j, hi, h, acell, lamh, e2, law, q, tp, mp, f0p)
    if dhi <= 0.0:
        return hi
    t = told
    if not (lo < t < hi):
        t = 0.5 * (lo + hi)
    side = 0
    for _ in range(_MAX_NODE_ITER):
        dt = _d_node_2d(u, i, j, t, h, acell, lamh, e2, law, q, tp, mp, f0p)
        if abs(dt) <= node_tol:
            break
        if dt > 0.0:
            hi = t
            dhi = dt
            if side == 1:
                dlo *= 0.5
            side = 1
        else:
            lo = t
            dlo = dt
            if side == -1:
                dhi *= 0.5
            side = -1
        if hi - lo <= 1e-15 * hi0:
            t = 0.5 * (lo + hi)
            break
        t = (lo * dhi - hi * dlo) / (dhi - dlo)
        if not (lo < t < hi):
            t = 0.5 * (lo + hi)
    if t < 1e-13 * hi0:
        return 0.0
    return t


@nb.njit(cache=True, nogil=True)
def sweep_1d(u, mask, acell, lamh, h, p, e2, law, q, tp, mp, f0p, node_tol):
    """One lexicographic relaxation sweep in place; returns the sup update."""
    n = u.shape[0]
    fast = (p == 2.0) and (law == 0) and (q == 0.0 or q == 0.5 or q == 1.0)
    maxch = 0.0
    for i in range(n):
        if mask[i] != 0:
            continue
        told = u[i]
        hi0 = u[i - 1]
        if u[i + 1] > hi0:
            hi0 = u[i + 1]
        if hi0 <= 0.0:
            t = 0.0
        else:
            aL = acell[i - 1]
            aR = acell[i]
            hi0 = hi0 * (1.0 + 1e-12)
            if fast:
                A = (aL + aR) / h
                B = (aL * u[i - 1] + aR * u[i + 1]) / h
                if q == 0.0:
                    t = (B - lamh[i]) / A
                    if t < 0.0:
                        t = 0.0
                elif q == 1.0:
                    t = B / (A + lamh[i])
                else:
                    z = (-lamh[i] + math.sqrt(lamh[i] * lamh[i] + 4.0 * A * B)) / (2.0 * A)
                    t = z * z
            else:
                if told > 0.0 and told < hi0:
                    d0 = _d_node_1d(u, i, told, h, aL, aR, lamh[i], p, e2,
                                    law, q, tp, mp, f0p)
                    if abs(d0) <= node_tol:
                        continue
                t = _illinois_1d(u, i, h, aL, aR, lamh[i], p, e2, law, q,
                                 tp, mp, f0p, hi0, told, node_tol)
        u[i] = t
        ch = abs(t - told)
        if ch > maxch:
            maxch = ch
    return maxch


@nb.njit(cache=True, nogil=True)
def sweep_2d(u, mask, acell, lamh, h, p, e2, law, q, tp, mp, f0p, node_tol):
    ni, nj = u.shape
    fast = (p == 2.0) and (law == 0) and (q == 0.0 or q == 0.5 or q == 1.0)
    maxch = 0.0
    for i in range(ni):
        for j in range(nj):
            if mask[i, j] != 0:
                continue
            told = u[i, j]
            hi0 = 0.0
            for a in range(i - 1, i + 2):
                for b in range(j - 1, j + 2):
                    if u[a, b] > hi0:
                        hi0 = u[a, b]
            if hi0 <= 0.0:
                t = 0.0
            else:
                hi0 = hi0 * (1.0 + 1e-12)
                if fast:
                    A = 0.0
                    B = 0.0
                    for ci in range(i - 1, i + 1):
                        for cj in range(j - 1, j + 1):
                            a_c = acell[ci, cj]
                            if a_c == 0.0:
                                continue
                            A += a_c
                            B += 0.5 * a_c * (u[2 * ci + 1 - i, j]
                                              + u[i, 2 * cj + 1 - j])
                    if A == 0.0:
                        t = told
                    elif q == 0.0:
                        t = (B - lamh[i, j]) / A
                        if t < 0.0:
                            t = 0.0
                    elif q == 1.0:
                        t = B / (A + lamh[i, j])
                    else:
                        z = (-lamh[i, j] + math.sqrt(lamh[i, j] * lamh[i, j]
                                                     + 4.0 * A * B)) / (2.0 * A)
                        t = z * z
                else:
                    if told > 0.0 and told < hi0:
                        d0 = _d_node_2d(u, i, j, told, h, acell, lamh[i, j],
                                        e2, law, q, tp, mp, f0p)
                        if abs(d0) <= node_tol:
                            continue
                    t = _illinois_2d(u, i, j, h, acell, lamh[i, j], e2, law,
                                     q, tp, mp, f0p, hi0, told, node_tol)
            u[i, j] = t
            ch = abs(t - told)
            if ch > maxch:
                maxch = ch
    return maxch


@nb.njit(cache=True, nogil=True)
def kkt_residual_1d(u, mask, acell, lamh, h, hN, p, e2, law, q, tp, mp, f0p):
    """Max complementarity violation in dJ/du / h^N units."""
    n = u.shape[0]
    worst = 0.0
    for i in range(n):
        if mask[i] != 0:
            continue
        d = _d_node_1d(u, i, u[i], h, acell[i - 1], acell[i], lamh[i],
                       p, e2, law, q, tp, mp, f0p)
        if u[i] > 0.0:
            v = abs(d)
        else:
            v = -d if d < 0.0 else 0.0
        if v > worst:
            worst = v
    return worst / hN


@nb.njit(cache=True, nogil=True)
def kkt_residual_2d(u, mask, acell, lamh, h, hN, p, e2, law, q, tp, mp, f0p):
    ni, nj = u.shape
    worst = 0.0
    for i in range(ni):
        for j in range(nj):
            if mask[i, j] != 0:
                continue
            d = _d_node_2d(u, i, j, u[i, j], h, acell, lamh[i, j],
                           e2, law, q, tp, mp, f0p)
            if u[i, j] > 0.0:
                v = abs(d)
            else:
                v = -d if d < 0.0 else 0.0
            if v > worst:
                worst = v
    return worst / hN


@nb.njit(cache=True, nogil=True)
def grad_1d(u, mask, acell, lamh, h, p, e2, law, q, tp, mp, f0p_at_zero):
    """dJ/du at every interior node (others zero).

    f0p_at_zero selects the absorption derivative used where u = 0:
    0.0 gives the chi_{u>0} (measure) convention, the right limit of f
    gives the feasible-direction derivative.
    """
    n = u.shape[0]
    out = np.zeros(n)
    for i in range(n):
        if mask[i] != 0:
            continue
        out[i] = _d_node_1d(u, i, u[i], h, acell[i - 1], acell[i], lamh[i],
                            p, e2, law, q, tp, mp, f0p_at_zero)
    return out


@nb.njit(cache=True, nogil=True)
def grad_2d(u, mask, acell, lamh, h, p, e2, law, q, tp, mp, f0p_at_zero):
    ni, nj = u.shape
    out = np.zeros((ni, nj))
    for i in range(ni):
        for j in range(nj):
            if mask[i, j] != 0:
                continue
            out[i, j] = _d_node_2d(u, i, j, u[i, j], h, acell, lamh[i, j],
                                   e2, law, q, tp, mp, f0p_at_zero)
    return out


@nb.njit(cache=True, nogil=True)
def relax_1d(u, mask, acell, lamh, h, hN, p, e2, law, q, tp, mp, f0p,
             tol, max_sweeps):
    """Sweep until both the update sup-norm and the KKT residual fall
    below tol.  Returns (sweeps, last_update, kkt, converged)."""
    node_tol = 0.05 * tol * hN
    sweeps = 0
    maxch = math.inf
    kkt = math.inf
    gate = 0
    while sweeps < max_sweeps:
        maxch = sweep_1d(u, mask, acell, lamh, h, p, e2, law, q, tp, mp,
                         f0p, node_tol)
        sweeps += 1
        if maxch <= tol and sweeps >= gate:
            kkt = kkt_residual_1d(u, mask, acell, lamh, h, hN, p, e2, law,
                                  q, tp, mp, f0p)
            if kkt <= tol:
                return sweeps, maxch, kkt, True
            gate = sweeps + 4
    kkt = kkt_residual_1d(u, mask, acell, lamh, h, hN, p, e2, law, q, tp,
                          mp, f0p)
    return sweeps, maxch, kkt, (maxch <= tol and kkt <= tol)


@nb.njit(cache=True, nogil=True)
def relax_2d(u, mask, acell, lamh, h, hN, p, e2, law, q, tp, mp, f0p,
             tol, max_sweeps):
    node_tol = 0.05 * tol * hN
    sweeps = 0
    maxch = math.inf
    kkt = math.inf
    gate = 0
    while sweeps < max_sweeps:
        maxch = sweep_2d(u, mask, acell, lamh, h, p, e2, law, q, tp, mp,
                         f0p, node_tol)
        sweeps += 1
        if maxch <= tol and sweeps >= gate:
            kkt = kkt_residual_2d(u, mask, acell, lamh, h, hN, p, e2, law,
                                  q, tp, mp, f0p)
            if kkt <= tol:
                return sweeps, maxch, kkt, True
            gate = sweeps + 4
    kkt = kkt_residual_2d(u, mask, acell, lamh, h, hN, p, e2, law, q, tp,
                          mp, f0p)
    return sweeps, maxch, kkt, (maxch <= tol and kkt <= tol)


@nb.njit(cache=True)
def chamfer_1d(seed, h):
    n = seed.shape[0]
    d = np.empty(n)
    for i in range(n):
        d[i] = 0.0 if seed[i] else 1e300
    for i in range(1, n):
        v = d[i - 1] + h
        if v < d[i]:
            d[i] = v
    for i in range(n - 2, -1, -1):
        v = d[i + 1] + h
        if v < d[i]:
            d[i] = v
    return d


@nb.njit(cache=True)
def chamfer_2d(seed, h):
    """Two-pass chamfer transform, axis cost h and diagonal cost h*sqrt(2)."""
    ni, nj = seed.shape
    d = np.empty((ni, nj))
    for i in range(ni):
        for j in range(nj):
            d[i, j] = 0.0 if seed[i, j] else 1e300
    dh = h
    dd = h * math.sqrt(2.0)
    for i in range(ni):
        for j in range(nj):
            v = d[i, j]
            if i > 0:
                if d[i - 1, j] + dh < v:
                    v = d[i - 1, j] + dh
                if j > 0 and d[i - 1, j - 1] + dd < v:
                    v = d[i - 1, j - 1] + dd
                if j < nj - 1 and d[i - 1, j + 1] + dd < v:
                    v = d[i - 1, j + 1] + dd
            if j > 0 and d[i, j - 1] + dh < v:
                v = d[i, j - 1] + dh
            d[i, j] = v
    for i in range(ni - 1, -1, -1):
        for j in range(nj - 1, -1, -1):
            v = d[i, j]
            if i < ni - 1:
                if d[i + 1, j] + dh < v:
                    v = d[i + 1, j] + dh
                if j > 0 and d[i + 1, j - 1] + dd < v:
                    v = d[i + 1, j - 1] + dd
                if j < nj - 1 and d[i + 1, j + 1] + dd < v:
                    v = d[i + 1, j + 1] + dd
            if j < nj - 1 and d[i, j + 1] + dh < v:
                v = d[i, j + 1] + dh
            d[i, j] = v
    return d
