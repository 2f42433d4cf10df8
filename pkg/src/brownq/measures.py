"""Finitely atomic probability measures on the real line.

Provides the Cauchy transform ``G(z) = sum_i a_i / (z - alpha_i)``, all
preimages of a value under ``G`` (Aberth-Ehrlich on the cleared polynomial,
then Newton on ``G`` itself) and the deterministic rounding used to build
diagonal matrices with a prescribed spectrum.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

WEIGHT_TOL = 1e-12
PREIMAGE_TOL = 1e-8

_RATIONAL = re.compile(r"^\s*[+-]?\d+\s*(/\s*\d+\s*)?$")


class PoleError(ZeroDivisionError):
    """Evaluation exactly at a pole (an atom, or zero for inverse maps)."""


class PreimageError(ArithmeticError):
    """Root finding for a Cauchy preimage did not reach the tolerance."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def parse_number(v):
    """Parse a config number: integers and ``"p/q"`` strings stay exact.

    Floats and decimal strings become floats, which marks the measure as
    numeric-only.
    """
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, float):
        return v
    if isinstance(v, str):
        if _RATIONAL.match(v):
            return Fraction(v.replace(" ", ""))
        return float(v)
    raise TypeError(f"cannot parse {v!r} as a number")


@dataclass(frozen=True)
class AtomicMeasure:
    """``sum_i weights[i] * delta(atoms[i])``.

    Duplicate atoms are allowed; they are merged only where a computation
    needs distinct positions (see :meth:`merged`).
    """

    atoms: tuple
    weights: tuple

    def __init__(self, atoms: Sequence, weights: Sequence):
        atoms = tuple(parse_number(a) for a in atoms)
        weights = tuple(parse_number(w) for w in weights)
        if len(atoms) == 0:
            raise ValueError("a measure needs at least one atom")
        if len(atoms) != len(weights):
            raise ValueError("atoms and weights differ in length")
        if any(w < 0 for w in weights):
            raise ValueError("weights must be non-negative")
        if any(isinstance(v, float) and not math.isfinite(v) for v in atoms + weights):
            raise ValueError("atoms and weights must be finite")
        exact = all(isinstance(v, Fraction) for v in atoms + weights)
        total = sum(weights)
        if exact:
            if total != 1:
                raise ValueError(f"weights sum to {total}, not 1")
        elif abs(float(total) - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {float(total)!r}, not 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def dirac(cls, x):
        return cls([x], [1])

    @classmethod
    def from_dict(cls, d):
        return cls(d["atoms"], d["weights"])

    def to_dict(self):
        return {"atoms": [_dump_number(a) for a in self.atoms],
                "weights": [_dump_number(w) for w in self.weights]}

    @property
    def exact(self):
        return all(isinstance(v, Fraction) for v in self.atoms + self.weights)

    @property
    def size(self):
        return len(self.atoms)

    def __len__(self):
        return len(self.atoms)

    def atoms_array(self):
        return np.array([float(a) for a in self.atoms])

    def weights_array(self):
        return np.array([float(w) for w in self.weights])

    def merged(self):
        """Distinct positive-weight atoms, in order of first appearance."""
        order = []
        acc = {}
        for a, w in zip(self.atoms, self.weights):
            if w == 0:
                continue
            if a not in acc:
                order.append(a)
                acc[a] = w
            else:
                acc[a] = acc[a] + w
        return AtomicMeasure(order, [acc[a] for a in order])

    def bound(self):
        return max(abs(float(a)) for a in self.atoms)


def _dump_number(v):
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return v


def cauchy(mu: AtomicMeasure, z):
    """Cauchy transform of ``mu`` at ``z`` (scalar or array)."""
    al = mu.atoms_array()
    wt = mu.weights_array()
    z_arr = np.asarray(z, dtype=complex)
    diff = z_arr[..., None] - al
    if np.any(diff == 0):
        raise PoleError("Cauchy transform evaluated at an atom")
    out = (wt / diff).sum(axis=-1)
    return complex(out) if out.ndim == 0 else out


def cauchy_derivative(mu: AtomicMeasure, z):
    al = mu.atoms_array()
    wt = mu.weights_array()
    diff = np.asarray(z, dtype=complex)[..., None] - al
    out = -(wt / diff**2).sum(axis=-1)
    return complex(out) if out.ndim == 0 else out


def preimage_polynomial(mu: AtomicMeasure, w):
    """Coefficients (highest degree first) of ``w prod(z-c_i) - sum a_i prod_{s!=i}(z-c_s)``.

    Built on the distinct support, so the degree is the number of distinct
    positive-weight atoms.  ``w`` may be an array; coefficients then stack on
    the last axis.
    """
    m = mu.merged()
    al = m.atoms_array()
    wt = m.weights_array()
    full = np.poly(al)
    rest = np.zeros(len(al))
    for i in range(len(al)):
        rest += wt[i] * np.poly(np.delete(al, i))
    w = np.asarray(w, dtype=complex)
    coeffs = w[..., None] * full
    coeffs[..., 1:] -= rest
    return coeffs


def _horner(coeffs, z):
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    for k in range(coeffs.shape[-1]):
        dp = dp * z + p
        p = p * z + coeffs[..., k : k + 1]
    return p, dp


def aberth_roots(coeffs, init=None, tol=1e-15, max_iter=300):
    """All roots of stacked polynomials by Aberth-Ehrlich iteration.

    Parameters
    ----------
    coeffs : array_like, shape (..., d + 1)
        Coefficients, highest degree first; leading ones must be nonzero.
    init : array_like, shape (..., d), optional
        Starting approximations (warm start).  Defaults to points on a circle.

    Returns
    -------
    roots : ndarray, shape (..., d)
    converged : ndarray of bool, shape (...)
    """
    c = np.asarray(coeffs, dtype=complex)
    d = c.shape[-1] - 1
    batch = c.shape[:-1]
    if d < 1:
        raise ValueError("polynomial degree must be at least 1")
    c = (c / c[..., :1]).reshape(-1, d + 1)
    if d == 1:
        return -c[:, 1:2].reshape(batch + (1,)), np.ones(batch, dtype=bool)
    if init is None:
        center = -c[:, 1] / d
        radius = 1.0 + np.abs(c[:, 1:]).max(axis=-1)
        ang = 2 * np.pi * np.arange(d) / d + 0.4
        z = center[:, None] + radius[:, None] * np.exp(1j * ang)
    else:
        z = np.array(init, dtype=complex).reshape(-1, d)
    active = np.ones(len(c), dtype=bool)
    eye = np.eye(d, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        za = z[active]
        ca = c[active]
        p, dp = _horner(ca, za)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = za[..., :, None] - za[..., None, :]
            inv = np.where(eye, 0, 1 / np.where(eye, 1, diff))
            s = inv.sum(axis=-1)
            step = ratio / (1 - ratio * s)
        bad = ~np.isfinite(step)
        step[bad] = 1e-3 * (1 + np.abs(za[bad]))
        za = za - step
        z[active] = za
        done = (np.abs(step) <= tol * np.maximum(1.0, np.abs(za))).all(axis=-1)
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return z.reshape(batch + (d,)), (~active).reshape(batch)


def newton_polish(mu: AtomicMeasure, w, zeta, steps=3):
    """Newton iterations on ``G(zeta) = w`` using the distinct support."""
    m = mu.merged()
    al = m.atoms_array()
    wt = m.weights_array()
    w = np.asarray(w, dtype=complex)
    zeta = np.array(zeta, dtype=complex, copy=True)
    wb = w[..., None] if zeta.ndim > w.ndim else w
    for _ in range(steps):
        diff = zeta[..., None] - al
        with np.errstate(divide="ignore", invalid="ignore"):
            G = (wt / diff).sum(axis=-1)
            dG = -(wt / diff**2).sum(axis=-1)
            step = (G - wb) / dG
        step = np.where(np.isfinite(step), step, 0)
        # only accept steps that reduce the residual
        trial = zeta - step
        with np.errstate(divide="ignore", invalid="ignore"):
            Gt = (wt / (trial[..., None] - al)).sum(axis=-1)
        better = np.abs(Gt - wb) < np.abs(G - wb)
        zeta = np.where(better, trial, zeta)
    return zeta


def preimage_residual(mu: AtomicMeasure, w, zeta):
    m = mu.merged()
    al = m.atoms_array()
    wt = m.weights_array()
    w = np.asarray(w, dtype=complex)
    wb = w[..., None] if np.ndim(zeta) > w.ndim else w
    with np.errstate(divide="ignore", invalid="ignore"):
        G = (wt / (np.asarray(zeta)[..., None] - al)).sum(axis=-1)
    r = np.abs(G - wb)
    return np.where(np.isfinite(r), r, np.inf)


def cauchy_preimages_array(mu: AtomicMeasure, w, init=None):
    """Vectorised preimages: returns ``(roots, residuals)`` of shape ``w.shape + (d,)``."""
    w = np.asarray(w, dtype=complex)
    coeffs = preimage_polynomial(mu, w)
    roots, _ = aberth_roots(coeffs, init=init)
    roots = newton_polish(mu, w, roots)
    return roots, preimage_residual(mu, w, roots)


def cauchy_preimages(mu: AtomicMeasure, w) -> list:
    """All solutions ``zeta`` of ``G_mu(zeta) = w``.

    The count equals the number of distinct positive-weight atoms; repeated
    atoms only contribute roots located at the atoms, which are never
    preimages.
    """
    w = complex(w)
    if w == 0:
        raise PoleError("w = 0 has no finite preimages of full count")
    roots, res = cauchy_preimages_array(mu, np.array(w))
    if res.max() > PREIMAGE_TOL:
        raise PreimageError("preimage root finding failed", float(res.max()))
    return [complex(r) for r in roots]


def sample_matrix_spectrum(mu: AtomicMeasure, n: int) -> np.ndarray:
    """Diagonal of an ``n x n`` matrix whose spectrum approximates ``mu``.

    Largest-remainder rounding of ``n * a_i``; ties go to the lower atom
    index.  Atoms appear in the order of the measure.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    exact = [Fraction(w) for w in mu.weights]
    scaled = [w * n for w in exact]
    counts = [math.floor(s) for s in scaled]
    remaining = n - sum(counts)
    order = sorted(range(len(exact)), key=lambda i: (-(scaled[i] - counts[i]), i))
    for i in order[:remaining]:
        counts[i] += 1
    out = np.empty(n)
    pos = 0
    for a, c in zip(mu.atoms_array(), counts):
        out[pos : pos + c] = a
        pos += c
    return out
