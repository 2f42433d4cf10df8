"""Numerical tracing of the boundary set Omega for atomic ``p`` and ``q``.

A point ``z = x + i y`` belongs to Omega when some ``g`` off the real and
imaginary axes and some real ``m`` satisfy

    G_p(x + m/g) = g,        G_q(y + (1 - m)/(i g)) = i g.

For a preimage ``zeta`` of ``g`` under ``G_p`` the first equation with real
``x`` forces ``m = Im(zeta) / Im(1/g)``.  For a preimage ``xi`` of ``i g``
under ``G_q`` the second equation then reduces to the real condition

    F(g) = Im(xi - (1 - m)/(i g)) = 0,

so Omega is traced as the zero contours of ``F`` over the g-plane, one
contour family per pair of preimage branches.  Sign changes are located on
grid edges, with roots matched between the two edge ends, and refined by
bisection.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from dataclasses import asdict, dataclass, field

import numpy as np

from .measures import AtomicMeasure, cauchy, cauchy_preimages, cauchy_preimages_array, PoleError

AXIS_GUARD = 1e-6
M_GUARD = 1e-9
SYSTEM_TOL = 1e-8
BISECTION_STEPS = 56


@dataclass(frozen=True)
class OmegaWitness:
    z: complex
    g: complex
    m: float
    residual: float
    branch_j: int
    branch_l: int

    @property
    def x(self):
        return self.z.real

    @property
    def y(self):
        return self.z.imag


@dataclass(frozen=True)
class GridSpec:
    """Rectangle and resolution of the g-plane scan.

    ``resolution`` counts nodes per axis; odd counts are bumped to the next
    even number so that no node lies on an axis.
    """

    re_range: tuple = (-3.0, 3.0)
    im_range: tuple = (-3.0, 3.0)
    resolution: tuple = (400, 400)
    tolerance: float = SYSTEM_TOL
    match_ratio: float = 0.25
    refine: int = 4

    def __post_init__(self):
        res = self.resolution
        if isinstance(res, int):
            res = (res, res)
        res = tuple(int(r) + (int(r) % 2) for r in res)
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "re_range", tuple(float(v) for v in self.re_range))
        object.__setattr__(self, "im_range", tuple(float(v) for v in self.im_range))
        if min(res) < 8:
            raise ValueError("resolution must be at least 8 per axis")
        if int(self.refine) < 1:
            raise ValueError("refine must be a positive integer")
        object.__setattr__(self, "refine", int(self.refine))
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.re_range[0] >= self.re_range[1] or self.im_range[0] >= self.im_range[1]:
            raise ValueError("empty g-plane rectangle")

    def nodes(self):
        re = np.linspace(*self.re_range, self.resolution[0])
        im = np.linspace(*self.im_range, self.resolution[1])
        return re[None, :] + 1j * im[:, None]


@dataclass
class OmegaTrace:
    witnesses: list
    flagged_edges: int = 0
    rejected: dict = field(default_factory=dict)
    grid: GridSpec | None = None

    def __len__(self):
        return len(self.witnesses)

    def z(self):
        return np.array([w.z for w in self.witnesses], dtype=complex)

    def summary(self):
        res = [w.residual for w in self.witnesses]
        return {
            "count": len(self.witnesses),
            "max_residual": max(res) if res else None,
            "mean_residual": float(np.mean(res)) if res else None,
            "flagged_edges": self.flagged_edges,
            "rejected": dict(self.rejected),
        }


# ---------------------------------------------------------------------------
# scalar operations


def m_from_g(mu_p: AtomicMeasure, g, branch: int):
    """``(m, x)`` for the ``branch``-th preimage of ``g`` under ``G_p``.

    Returns ``None`` when ``g`` is within the guard band of the real axis.
    """
    g = complex(g)
    if abs(g.imag) <= AXIS_GUARD:
        return None
    roots = _sorted_roots(cauchy_preimages(mu_p, g))
    zeta = roots[branch]
    return _m_x(zeta, g)


def _m_x(zeta, g):
    ig = 1 / g
    m = zeta.imag / ig.imag
    x = (zeta - m * ig).real
    return m, x


def omega_residual(mu_p: AtomicMeasure, mu_q: AtomicMeasure, g, j: int, l: int) -> float:
    """Signed realness defect ``F(g)`` for branch pair ``(j, l)``."""
    g = complex(g)
    if abs(g.real) <= AXIS_GUARD or abs(g.imag) <= AXIS_GUARD:
        raise ValueError("g lies within the guard band of an axis")
    m, _ = m_from_g(mu_p, g, j)
    xi = _sorted_roots(cauchy_preimages(mu_q, 1j * g))[l]
    return (xi - (1 - m) / (1j * g)).imag


def _sorted_roots(roots):
    return sorted(roots, key=lambda r: (round(r.real, 12), r.imag))


def system_residuals(mu_p, mu_q, z, g, m):
    """``(|G_p(x + m/g) - g|, |G_q(y + (1-m)/(ig)) - ig|)``."""
    z, g = complex(z), complex(g)
    try:
        rp = abs(cauchy(mu_p, z.real + m / g) - g)
        rq = abs(cauchy(mu_q, z.imag + (1 - m) / (1j * g)) - 1j * g)
    except PoleError:
        return math.inf, math.inf
    return rp, rq


# ---------------------------------------------------------------------------
# grid tracing


def _perm_match(a, b):
    """Best permutation aligning root sets ``b`` to ``a`` along the last axis.

    Returns ``(perm_index_array, cost, second_cost)``, where ``cost`` is the
    largest displacement under the best permutation.
    """
    d = a.shape[-1]
    perms = np.array(list(itertools.permutations(range(d))))
    costs = np.stack([np.abs(a - b[..., p]).max(axis=-1) for p in perms], axis=-1)
    order = np.argsort(costs, axis=-1)
    best = order[..., 0]
    cost = np.take_along_axis(costs, best[..., None], axis=-1)[..., 0]
    if len(perms) > 1:
        second = np.take_along_axis(costs, order[..., 1:2], axis=-1)[..., 0]
    else:
        second = np.full(cost.shape, np.inf)
    return perms[best], cost, second


def _min_sep(r):
    d = r.shape[-1]
    if d < 2:
        return np.full(r.shape[:-1], np.inf)
    seps = [np.abs(r[..., i] - r[..., j]) for i in range(d) for j in range(i + 1, d)]
    return np.min(np.stack(seps, axis=-1), axis=-1)


def _F(zeta, xi, g):
    """F for every branch pair: shape ``g.shape + (dp, dq)``; also returns m."""
    ig = 1 / g
    m = zeta.imag / ig.imag[..., None]
    val = xi[..., None, :] - ((1 - m)[..., :, None]) * (-1j * ig)[..., None, None]
    return val.imag, m


class _Preimages:
    def __init__(self, mu):
        self.mu = mu.merged()
        self.d = len(self.mu)

    def __call__(self, w, init=None):
        return cauchy_preimages_array(self.mu, w, init=init)


def trace_omega(mu_p: AtomicMeasure, mu_q: AtomicMeasure, grid: GridSpec | None = None) -> OmegaTrace:
    """Trace Omega on a g-plane grid and return verified witnesses.

    Cells of the base grid that contain a sign change (or an ambiguous root
    matching) are rescanned on a ``grid.refine``-times finer local grid.
    """
    grid = GridSpec() if grid is None else grid
    Pp, Pq = _Preimages(mu_p), _Preimages(mu_q)
    G = grid.nodes()[None]
    cand, flagged, cells = _scan(Pp, Pq, G, grid)
    if grid.refine > 1 and cells.any():
        b, iy, ix = np.nonzero(cells)
        t = np.linspace(0.0, 1.0, grid.refine + 1)
        g00 = G[b, iy, ix]
        dx = (G[b, iy, ix + 1] - g00).real
        dy = (G[b, iy + 1, ix] - g00).imag
        sub = (g00[:, None, None] + dx[:, None, None] * t[None, None, :]
               + 1j * dy[:, None, None] * t[None, :, None])
        cand, flagged, _ = _scan(Pp, Pq, sub, grid)
    witnesses, rejected = _refine(Pp, Pq, mu_p, mu_q, cand, grid.tolerance)
    witnesses.sort(key=lambda w: (w.branch_j, w.branch_l, w.z.real, w.z.imag))
    return OmegaTrace(witnesses, flagged, rejected, grid)


def _scan(Pp, Pq, G, grid):
    """Sign-change candidates on the edges of a batch of grids ``G[b, iy, ix]``.

    Returns ``(candidates, flagged, cells)`` where ``cells[b, iy, ix]`` marks
    cells with a sign change or an ambiguous edge.
    """
    zeta, rz = Pp(G)
    xi, rx = Pq(1j * G)
    node_ok = (rz.max(axis=-1) <= grid.tolerance) & (rx.max(axis=-1) <= grid.tolerance)
    node_ok &= (np.abs(G.real) > AXIS_GUARD) & (np.abs(G.imag) > AXIS_GUARD)
    sep_p, sep_q = _min_sep(zeta), _min_sep(xi)
    cells = np.zeros((G.shape[0], G.shape[1] - 1, G.shape[2] - 1), dtype=bool)

    cand = []   # (g_a, g_b, zeta_a_full, xi_a_full, j, l, F_a)
    flagged = 0
    for axis in (1, 2):
        if axis == 2:
            sl_a, sl_b = np.s_[:, :, :-1], np.s_[:, :, 1:]
        else:
            sl_a, sl_b = np.s_[:, :-1, :], np.s_[:, 1:, :]
        ga, gb = G[sl_a], G[sl_b]
        valid = node_ok[sl_a] & node_ok[sl_b]
        # edges crossing an axis are skipped
        valid &= (np.sign(ga.real) == np.sign(gb.real)) & (np.sign(ga.imag) == np.sign(gb.imag))
        za, zb = zeta[sl_a], zeta[sl_b]
        xa, xb = xi[sl_a], xi[sl_b]
        pp, cp, _ = _perm_match(za, zb)
        pq, cq, _ = _perm_match(xa, xb)
        ok_p = cp <= grid.match_ratio * np.minimum(sep_p[sl_a], sep_p[sl_b])
        ok_q = cq <= grid.match_ratio * np.minimum(sep_q[sl_a], sep_q[sl_b])
        clean = valid & ok_p & ok_q
        retry = valid & ~(ok_p & ok_q)
        idx = np.nonzero(clean)
        new, hit = _edge_candidates(ga[idx], gb[idx], za[idx], xa[idx],
                                    np.take_along_axis(zb[idx], pp[idx], axis=-1),
                                    np.take_along_axis(xb[idx], pq[idx], axis=-1))
        cand += new
        mark = np.zeros(ga.shape, dtype=bool)
        mark[tuple(i[hit] for i in idx)] = True
        mark |= retry
        # ambiguous edges: split once at the midpoint and retry both halves
        idx = np.nonzero(retry)
        if len(idx[0]):
            new, bad = _split_edges(Pp, Pq, ga[idx], gb[idx], za[idx], zb[idx], xa[idx], xb[idx],
                                    grid.match_ratio)
            cand += new
            flagged += bad
        # an edge borders the cells on both of its sides
        if axis == 2:
            cells |= mark[:, :-1, :] | mark[:, 1:, :]
        else:
            cells |= mark[:, :, :-1] | mark[:, :, 1:]
    return cand, flagged, cells


def _edge_candidates(ga, gb, za, xa, zb_m, xb_m):
    """Edges whose F changes sign for some branch pair (roots of b aligned to a)."""
    if len(ga) == 0:
        return [], np.zeros(0, dtype=bool)
    Fa, _ = _F(za, xa, ga)
    Fb, _ = _F(zb_m, xb_m, gb)
    change = np.sign(Fa) * np.sign(Fb) < 0
    e, j, l = np.nonzero(change)
    return [(ga[e], gb[e], za[e], xa[e], j, l, Fa[e, j, l])], change.any(axis=(1, 2))


def _split_edges(Pp, Pq, ga, gb, za, zb, xa, xb, ratio):
    gm = 0.5 * (ga + gb)
    zm, rzm = Pp(gm)
    xm, rxm = Pq(1j * gm)
    out = []
    sp = np.minimum(_min_sep(za), _min_sep(zb))
    sq = np.minimum(_min_sep(xa), _min_sep(xb))
    p1, c1, _ = _perm_match(za, zm)
    q1, d1, _ = _perm_match(xa, xm)
    zm_a = np.take_along_axis(zm, p1, axis=-1)
    xm_a = np.take_along_axis(xm, q1, axis=-1)
    p2, c2, _ = _perm_match(zm_a, zb)
    q2, d2, _ = _perm_match(xm_a, xb)
    ok = (c1 <= ratio * sp) & (c2 <= ratio * sp) & (d1 <= ratio * sq) & (d2 <= ratio * sq)
    ok &= (rzm.max(axis=-1) < SYSTEM_TOL) & (rxm.max(axis=-1) < SYSTEM_TOL)
    idx = np.nonzero(ok)[0]
    out += _edge_candidates(ga[idx], gm[idx], za[idx], xa[idx], zm_a[idx], xm_a[idx])[0]
    out += _edge_candidates(gm[idx], gb[idx], zm_a[idx], xm_a[idx],
                            np.take_along_axis(zb[idx], p2[idx], axis=-1),
                            np.take_along_axis(xb[idx], q2[idx], axis=-1))[0]
    return out, int((~ok).sum())


def _nearest(roots, target):
    k = np.argmin(np.abs(roots - target[..., None]), axis=-1)
    return np.take_along_axis(roots, k[..., None], axis=-1)[..., 0]


def _refine(Pp, Pq, mu_p, mu_q, cand, tol):
    rejected = {"axis": 0, "m": 0, "residual": 0}
    if not cand:
        return [], rejected
    ga = np.concatenate([c[0] for c in cand])
    gb = np.concatenate([c[1] for c in cand])
    za_full = np.concatenate([c[2] for c in cand])
    xa_full = np.concatenate([c[3] for c in cand])
    j = np.concatenate([c[4] for c in cand])
    l = np.concatenate([c[5] for c in cand])
    Fa = np.concatenate([c[6] for c in cand])
    rows = np.arange(len(ga))
    za = za_full[rows, j]
    xa = xa_full[rows, l]
    sa = np.sign(Fa)
    for _ in range(BISECTION_STEPS):
        gm = 0.5 * (ga + gb)
        zm_full, _ = Pp(gm, init=za_full)
        xm_full, _ = Pq(1j * gm, init=xa_full)
        zm = _nearest(zm_full, za)
        xm = _nearest(xm_full, xa)
        ig = 1 / gm
        m = zm.imag / ig.imag
        Fm = (xm - (1 - m) * (-1j * ig)).imag
        move_a = np.sign(Fm) == sa
        ga = np.where(move_a, gm, ga)
        gb = np.where(move_a, gb, gm)
        za = np.where(move_a, zm, za)
        xa = np.where(move_a, xm, xa)
        za_full = np.where(move_a[:, None], zm_full, za_full)
        xa_full = np.where(move_a[:, None], xm_full, xa_full)
    g = ga
    ig = 1 / g
    m = za.imag / ig.imag
    x = (za - m * ig).real
    y = (xa - (1 - m) * (-1j * ig)).real
    out = []
    seen = set()
    for k in range(len(g)):
        gk = complex(g[k])
        if abs(gk.real) <= AXIS_GUARD or abs(gk.imag) <= AXIS_GUARD:
            rejected["axis"] += 1
            continue
        mk = float(m[k])
        if not math.isfinite(mk) or abs(mk) <= M_GUARD or abs(mk - 1) <= M_GUARD:
            rejected["m"] += 1
            continue
        zk = complex(x[k], y[k])
        rp, rq = system_residuals(mu_p, mu_q, zk, gk, mk)
        res = max(rp, rq)
        if not res <= tol:
            rejected["residual"] += 1
            continue
        bj = _branch_index(za_full[k], za[k])
        bl = _branch_index(xa_full[k], xa[k])
        key = (bj, bl, round(gk.real, 13), round(gk.imag, 13))
        if key in seen:
            continue
        seen.add(key)
        out.append(OmegaWitness(zk, gk, mk, float(res), bj, bl))
    return out, rejected


def _branch_index(full, chosen):
    """Index of ``chosen`` among ``full`` sorted by real then imaginary part."""
    order = sorted(range(len(full)), key=lambda i: (round(full[i].real, 12), full[i].imag))
    k = int(np.argmin(np.abs(full - chosen)))
    return order.index(k)


def witnesses_to_rows(witnesses):
    return [(w.x, w.y, w.g.real, w.g.imag, w.m, w.residual, w.branch_j, w.branch_l)
            for w in witnesses]


def coverage_gap(witnesses, points):
    """Largest distance from ``points`` to the nearest witness."""
    from scipy.spatial import cKDTree

    z = np.array([w.z for w in witnesses]) if not isinstance(witnesses, np.ndarray) else witnesses
    if len(z) == 0:
        return math.inf
    tree = cKDTree(np.column_stack([z.real, z.imag]))
    pts = np.asarray(points, dtype=complex)
    d, _ = tree.query(np.column_stack([pts.real, pts.imag]))
    return float(d.max())


# ---------------------------------------------------------------------------
# cross-check with the exact curve

SCORE_RADIUS = 0.1
_CIRCLE = np.exp(2j * np.pi * np.arange(64) / 64)


def curve_scores(f, z, radius=SCORE_RADIUS):
    """Normalized vanishing score of the real polynomial ``f(x, y)`` at ``z``.

    The score is ``|f(z)| / max |f|`` over the circle of the given radius
    around ``z``.  It is scale free and insensitive to the multiplicity of
    factors: a point at distance ``>= radius`` from the zero set scores of
    order one.  ``f(z)`` is evaluated exactly at the float coordinates.

    Returns
    -------
    scores, values : ndarray
        ``values`` is ``|f(z)|`` divided by the largest coefficient modulus.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    T, den = f.scale_to_integral()
    big = Fraction(max(max(abs(a), abs(b)) for a, b in T.values()), den)
    vals = np.array([abs(f.eval_dyadic({"x": w.real, "y": w.imag})) for w in z]) / float(big)
    ring = z[:, None] + radius * _CIRCLE
    local = np.abs(np.real(f.eval({"x": ring.real, "y": ring.imag}, scaled=True))).max(axis=1)
    return vals / local, vals


def verify_against_curve(witnesses, curve, radius=SCORE_RADIUS):
    """Score every witness against the curve polynomial of ``curve``.

    Parameters
    ----------
    witnesses : list of OmegaWitness or array of complex
    curve : CurveResult
    """
    if curve.f is None or curve.degenerate:
        raise ValueError("degenerate curve result; no polynomial to test against")
    z = np.array([w.z for w in witnesses] if len(witnesses) and isinstance(witnesses[0], OmegaWitness)
                 else witnesses, dtype=complex)
    if len(z) == 0:
        return {"count": 0, "scores": [], "abs_f": [], "max_score": None, "mean_score": None}
    s, v = curve_scores(curve.f, z, radius)
    return {
        "count": len(z),
        "radius": radius,
        "scores": s.tolist(),
        "abs_f": v.tolist(),
        "max_score": float(s.max()),
        "mean_score": float(s.mean()),
        "max_abs_f": float(v.max()),
    }
