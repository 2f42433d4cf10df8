"""Closed forms for ``X = p + i q`` when ``p`` and ``q`` each have two atoms.

``mu_p = a delta(alpha) + (1 - a) delta(alpha')`` and likewise for ``q`` with
``(beta, beta', b)``.  Every scalar formula depends on one side only through
``(lo, hi, weight)``, so both sides share :class:`Side`.

Square roots are principal.  Points within ``CUT_TOL`` of a cut ray are
rejected with :class:`CutError`; callers probing one-sided limits must step
off the ray themselves.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .measures import AtomicMeasure, PoleError
from .quaternion import Quaternion, eigen, inverse

CUT_TOL = 1e-12
REAL_TOL = 1e-9


class CutError(ValueError):
    """Argument lies on a branch-cut ray (or in an exceptional set)."""

    def __init__(self, message, which):
        super().__init__(message)
        self.which = which


@dataclass(frozen=True)
class Side:
    """One two-atom measure ``w delta(lo) + (1 - w) delta(hi)``."""

    lo: float
    hi: float
    w: float
    name: str = "p"

    @property
    def span(self):
        return self.hi - self.lo

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def symmetric(self):
        return abs(self.w - 0.5) < 1e-15

    @property
    def cut_re(self):
        return -(1 - 2 * self.w) / self.span

    @property
    def cut_height(self):
        return 2 * math.sqrt(self.w * (1 - self.w)) / abs(self.span)

    def D(self, w):
        return (self.span * w + (1 - 2 * self.w)) ** 2 + 4 * self.w * (1 - self.w)

    def in_cut(self, w, tol=CUT_TOL):
        w = complex(w)
        return abs(w.real - self.cut_re) <= tol and abs(w.imag) > self.cut_height

    def _check_cut(self, w):
        if self.in_cut(w):
            raise CutError(f"{w!r} lies on the cut I_{self.name}", self.name)

    def sqrtD(self, w):
        return cmath.sqrt(self.D(complex(w)))

    def B(self, w):
        """Inverse Cauchy transform ``(lo+hi)/2 + (1 + sqrt D(w)) / (2w)``."""
        w = complex(w)
        if w == 0:
            raise PoleError("B is singular at 0")
        self._check_cut(w)
        return self.center + (1 + self.sqrtD(w)) / (2 * w)

    def one_sided_sqrtD(self, w0, side):
        """Limit of ``sqrt D`` at a cut point from the right (+1) or left (-1)."""
        w0 = complex(w0)
        r = math.sqrt(max(0.0, -self.D(w0).real))
        return side * math.copysign(1.0, w0.imag) * 1j * r

    def ratio_im(self, w):
        """``Im sqrt D(w) / Im w`` continued to the real line."""
        w = complex(w)
        self._check_cut(w)
        c = 1 - 2 * self.w
        if abs(w.imag) < REAL_TOL:
            t = w.real
            return self.span * (self.span * t + c) / math.sqrt(self.D(t).real)
        s = self.sqrtD(w)
        # Im D = 2 Re(s) Im(s) gives a form without cancellation near the axis
        if abs(s.real) >= abs(w.imag):
            return self.span * (self.span * w.real + c) / s.real
        return s.imag / w.imag

    def ratio_conj(self, w):
        """``Im(conj(w) sqrt D(w)) / Im w`` continued to the real line.

        On the cut this is continuous only when the weight is 1/2, where it
        vanishes identically.
        """
        w = complex(w)
        if self.in_cut(w):
            if self.symmetric:
                return 0.0
            raise CutError(f"{w!r} lies on the cut I_{self.name}", self.name)
        if abs(w.imag) < REAL_TOL:
            t = w.real
            c = 1 - 2 * self.w
            return (-c * self.span * t - 1) / math.sqrt(self.D(t).real)
        return w.real * self.ratio_im(w) - self.sqrtD(w).real

    def beta(self, g):
        return self.center + 0.5 * self.ratio_im(g)

    def beta_prime(self, g):
        g = complex(g)
        if g == 0:
            raise PoleError("beta' diverges at 0")
        return (-1 + self.ratio_conj(g)) / (2 * abs(g) ** 2)

    def in_exceptional(self, g):
        """Membership in the set where ``ratio_conj`` has no continuous value."""
        g = complex(g)
        return g == 0 or (self.in_cut(g) and not self.symmetric)

    def blue(self, q: Quaternion) -> Quaternion:
        """Quaternionic inverse Green's function ``beta(g) - beta'(g) Q*``."""
        g = eigen(q).g
        if g == 0:
            raise PoleError("inverse Green's function is singular at 0")
        return self.beta(g) - self.beta_prime(g) * q.conj()

    def measure(self):
        return AtomicMeasure([self.lo, self.hi], [self.w, 1 - self.w])


@dataclass(frozen=True)
class TwoAtomPair:
    alpha: float
    alphaP: float
    beta: float
    betaP: float
    a: float
    b: float

    def __post_init__(self):
        for f in ("alpha", "alphaP", "beta", "betaP", "a", "b"):
            object.__setattr__(self, f, float(getattr(self, f)))
        if not (0 < self.a < 1 and 0 < self.b < 1):
            raise ValueError("weights a, b must lie in (0, 1)")
        if self.alpha == self.alphaP or self.beta == self.betaP:
            raise ValueError("the two atoms of each measure must differ")

    @classmethod
    def from_measures(cls, mu_p: AtomicMeasure, mu_q: AtomicMeasure):
        if len(mu_p) != 2 or len(mu_q) != 2:
            raise ValueError("both measures need exactly two atoms")
        return cls(mu_p.atoms[0], mu_p.atoms[1], mu_q.atoms[0], mu_q.atoms[1],
                   mu_p.weights[0], mu_q.weights[0])

    @property
    def p(self):
        return Side(self.alpha, self.alphaP, self.a, "p")

    @property
    def q(self):
        return Side(self.beta, self.betaP, self.b, "q")

    def measures(self):
        return self.p.measure(), self.q.measure()

    @property
    def corners(self):
        return [complex(x, y) for x in (self.alpha, self.alphaP) for y in (self.beta, self.betaP)]


def D_p(pair, w):
    return pair.p.D(w)


def D_q(pair, w):
    return pair.q.D(w)


def in_cut(pair, w):
    return pair.p.in_cut(w)


def in_cut_q(pair, w):
    return pair.q.in_cut(w)


def B_p(pair, w):
    return pair.p.B(w)


def B_q(pair, w):
    return pair.q.B(w)


def beta_p(pair, g):
    return pair.p.beta(g)


def beta_q(pair, g):
    return pair.q.beta(g)


def beta_p_prime(pair, g):
    return pair.p.beta_prime(g)


def beta_q_prime(pair, g):
    return pair.q.beta_prime(g)


def ell(pair: TwoAtomPair, q: Quaternion) -> float:
    """The real scalar ``l`` with ``B_X(Q) = k + i k' - l Q*``.

    Defined when neither ``g`` lies in ``S_p`` nor ``gI`` in ``S_q``.
    """
    e = eigen(q)
    if e.g == 0:
        raise PoleError("l is singular at Q = 0")
    for side, v in ((pair.p, e.g), (pair.q, e.gI)):
        if side.in_exceptional(v):
            raise CutError(f"{v!r} lies in the exceptional set S_{side.name}", side.name)
    return (pair.p.ratio_conj(e.g) + pair.q.ratio_conj(e.gI)) / (2 * abs(e.g) ** 2)


def B_X_complex(pair: TwoAtomPair, w) -> complex:
    w = complex(w)
    if w == 0:
        raise PoleError("B_X is singular at 0")
    if pair.p.in_cut(w):
        raise CutError(f"{w!r} lies on I_p", "p")
    if pair.q.in_cut(1j * w):
        raise CutError(f"i*{w!r} lies on I_q", "q")
    return (pair.p.center + 1j * pair.q.center
            + (pair.p.sqrtD(w) + pair.q.sqrtD(1j * w)) / (2 * w))


def B_X_quaternion(pair: TwoAtomPair, q: Quaternion) -> Quaternion:
    """Inverse quaternionic Green's function of ``p + i q`` at ``q``."""
    e = eigen(q)
    if e.g == 0:
        raise PoleError("B_X is singular at Q = 0")
    if pair.p.in_cut(e.g):
        raise CutError(f"g = {e.g!r} lies on I_p", "p")
    if pair.q.in_cut(e.gI):
        raise CutError(f"gI = {e.gI!r} lies on I_q", "q")
    k = pair.p.beta(e.g)
    kp = pair.q.beta(e.gI)
    l = ell(pair, q)
    return Quaternion(k + 1j * kp - l * q.A.conjugate(), l * q.B)


def B_X_by_addition(pair: TwoAtomPair, q: Quaternion) -> Quaternion:
    """Same map assembled from the addition law ``B_p(Q) + i B_q(Q i) - Q^-1``."""
    i = Quaternion.unit_i()
    return pair.p.blue(q) + i * pair.q.blue(q * i) - inverse(q)


def hyperbola_residual(pair: TwoAtomPair, z) -> float:
    z = complex(z)
    x, y = z.real, z.imag
    return (x - pair.alpha) * (x - pair.alphaP) - (y - pair.beta) * (y - pair.betaP)


def rect_membership(pair: TwoAtomPair, z, open: bool = False) -> bool:
    z = complex(z)
    xlo, xhi = sorted((pair.alpha, pair.alphaP))
    ylo, yhi = sorted((pair.beta, pair.betaP))
    if open:
        return xlo < z.real < xhi and ylo < z.imag < yhi
    return xlo <= z.real <= xhi and ylo <= z.imag <= yhi


def atom_weights(pair: TwoAtomPair):
    """Brown-measure masses at the four corners and the remaining continuous mass.

    Returns ``(eps00, eps01, eps10, eps11, eps)`` for the corners
    ``alpha+i beta, alpha+i beta', alpha'+i beta, alpha'+i beta'``.
    """
    a, b = _exact_or_float(pair.a), _exact_or_float(pair.b)
    e00 = max(0, a + b - 1)
    e01 = max(0, a - b)
    e10 = max(0, b - a)
    e11 = max(0, 1 - a - b)
    rest = 1 - (e00 + e01 + e10 + e11)
    return tuple(float(v) for v in (e00, e01, e10, e11, rest))


def _exact_or_float(v):
    f = Fraction(v).limit_denominator(10**12)
    return f if abs(float(f) - v) < 1e-15 else v


@dataclass(frozen=True)
class HyperbolaRectangle:
    """The hyperbola ``(x-alpha)(x-alpha') = (y-beta)(y-beta')`` cut to the rectangle."""

    cx: float
    cy: float
    hx: float
    hy: float

    @classmethod
    def from_pair(cls, pair: TwoAtomPair):
        return cls(pair.p.center, pair.q.center, abs(pair.p.span) / 2, abs(pair.q.span) / 2)

    def residual(self, z):
        z = np.asarray(z, dtype=complex)
        xr = z.real - self.cx
        yr = z.imag - self.cy
        return (xr**2 - self.hx**2) - (yr**2 - self.hy**2)

    def arcs(self, npts=4001):
        """Two corner-to-corner arcs covering ``H`` inside the closed rectangle."""
        c = self.hx**2 - self.hy**2
        out = []
        if c > 0:
            # left/right branches parametrised by y
            s = np.linspace(-self.hy, self.hy, npts)
            x = np.sqrt(c + s**2)
            for sign in (-1, 1):
                out.append(self.cx + sign * x + 1j * (self.cy + s))
        else:
            s = np.linspace(-self.hx, self.hx, npts)
            y = np.sqrt(s**2 - c)
            for sign in (-1, 1):
                out.append(self.cx + s + 1j * (self.cy + sign * y))
        return out

    def length(self):
        return sum(np.abs(np.diff(a)).sum() for a in self.arcs())

    def sample_arclength(self, n, npts=20001):
        """``n`` points spread uniformly by arclength over both arcs."""
        arcs = self.arcs(npts)
        pts = np.concatenate(arcs)
        # no length between the end of one arc and the start of the next
        cum = []
        total = 0.0
        for a in arcs:
            d = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(a)))])
            cum.append(total + d)
            total += d[-1]
        cum = np.concatenate(cum)
        targets = (np.arange(n) + 0.5) * total / n
        re = np.interp(targets, cum, pts.real)
        im = np.interp(targets, cum, pts.imag)
        return re + 1j * im

    def distance(self, z, npts=200001):
        """Distance from each point to the curve, via a dense polyline."""
        from scipy.spatial import cKDTree

        pts = np.concatenate(self.arcs(npts))
        tree = cKDTree(np.column_stack([pts.real, pts.imag]))
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        d, _ = tree.query(np.column_stack([z.real, z.imag]))
        return d
