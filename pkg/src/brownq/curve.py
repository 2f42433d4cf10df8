"""Exact boundary-curve polynomial by successive resultants.

For atomic ``mu_p`` (atoms ``alpha_i``, weights ``a_i``) and ``mu_q`` the
boundary system in ``(g, m, x, y)`` is

    P1 = prod_i (g (x - alpha_i) + m) - sum_i a_i prod_{s != i} (g (x - alpha_s) + m)
    P2 = prod_j (i g (y - beta_j) + 1 - m) - sum_j b_j prod_{s != j} (i g (y - beta_s) + 1 - m)

and the pipeline is

    f1 = Res_g(P1, P2)
    f2 = f1 / (m^(n-1) (m-1)^(k-1))        (exact)
    f  = Res_m(Re f2, Im f2)

with real and imaginary parts taken coefficient-wise (``m, x, y`` real).
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .measures import AtomicMeasure
from .polyring import DivisionError, GaussPoly, exact_div, resultant

SYSTEM_VARS = ("g", "m", "x", "y")
CURVE_VARS = ("m", "x", "y")
SIZE_CAP = 7


class DivisibilityError(ArithmeticError):
    """``f1`` was not divisible by ``m^(n-1) (m-1)^(k-1)``."""

    def __init__(self, remainder):
        super().__init__(f"f1 is not divisible; remainder has {len(remainder)} terms")
        self.remainder = remainder


@dataclass(frozen=True)
class CurveConfig:
    mu_p: AtomicMeasure
    mu_q: AtomicMeasure

    def __post_init__(self):
        if not (self.mu_p.exact and self.mu_q.exact):
            raise ValueError("the curve pipeline needs rational atoms and weights; "
                             "use the omega or esd commands for decimal inputs")

    @property
    def n(self):
        return len(self.mu_p)

    @property
    def k(self):
        return len(self.mu_q)


@dataclass
class CurveResult:
    config: CurveConfig
    f1: GaussPoly
    f2: GaussPoly
    re_f2: GaussPoly
    im_f2: GaussPoly
    f: GaussPoly | None
    re_zero: bool = False
    im_zero: bool = False
    f_zero: bool = False
    timings: dict = field(default_factory=dict)

    @property
    def degenerate(self):
        return self.re_zero or self.im_zero or self.f_zero or self.f is None

    @property
    def f_normalized(self):
        return None if self.f is None else self.f.primitive()

    def report(self):
        return {
            "n": self.config.n,
            "k": self.config.k,
            "degenerate": self.degenerate,
            "re_f2_zero": self.re_zero,
            "im_f2_zero": self.im_zero,
            "f_zero": self.f_zero,
            "terms": {"f1": len(self.f1), "f2": len(self.f2),
                      "f": 0 if self.f is None else len(self.f)},
            "degree_f": None if self.f is None else self.f.degree(),
        }


def build_system(cfg: CurveConfig):
    """The two polynomials of the boundary system over ``(g, m, x, y)``."""
    g, m, x, y = GaussPoly.gens(SYSTEM_VARS)
    I = GaussPoly.const(1j, SYSTEM_VARS)
    lin_p = [g * (x - a) + m for a in cfg.mu_p.atoms]
    lin_q = [I * g * (y - b) + (1 - m) for b in cfg.mu_q.atoms]
    return (_cleared(lin_p, cfg.mu_p.weights), _cleared(lin_q, cfg.mu_q.weights))


def _cleared(factors, weights):
    full = factors[0]
    for f in factors[1:]:
        full = full * f
    total = full
    for i, w in enumerate(weights):
        if w == 0:
            continue
        rest = GaussPoly.const(w, full.variables)
        for s, f in enumerate(factors):
            if s != i:
                rest = rest * f
        total = total - rest
    return total


def divisor(cfg: CurveConfig):
    m = GaussPoly.var("m", CURVE_VARS)
    return m ** (cfg.n - 1) * (m - 1) ** (cfg.k - 1)


def run_pipeline(cfg: CurveConfig, system=None) -> CurveResult:
    """Run the four elimination steps.

    Parameters
    ----------
    system : tuple of GaussPoly, optional
        Replacement for :func:`build_system`; used to exercise the
        divisibility failure path.

    Raises
    ------
    DivisibilityError
        If the division step leaves a remainder.
    """
    if cfg.n + cfg.k > SIZE_CAP:
        warnings.warn(f"n + k = {cfg.n + cfg.k} exceeds {SIZE_CAP}; resultants may be very slow",
                      RuntimeWarning, stacklevel=2)
    timings = {}
    t0 = time.perf_counter()
    P1, P2 = build_system(cfg) if system is None else system
    f1 = resultant(P1, P2, "g")
    timings["f1"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    try:
        f2 = exact_div(f1, divisor(cfg))
    except DivisionError as err:
        raise DivisibilityError(err.remainder) from None
    timings["f2"] = time.perf_counter() - t0
    re_f2, im_f2 = f2.split_re_im()
    re_zero, im_zero = re_f2.is_zero(), im_f2.is_zero()
    f = None
    f_zero = False
    t0 = time.perf_counter()
    if not (re_zero or im_zero):
        if re_f2.degree("m") == 0 and im_f2.degree("m") == 0:
            f_zero = True
        else:
            f = resultant(re_f2, im_f2, "m", method="modular")
            f_zero = f.is_zero()
    timings["f"] = time.perf_counter() - t0
    return CurveResult(cfg, f1, f2, re_f2, im_f2, f, re_zero, im_zero, f_zero, timings)


def curve_eval(result: CurveResult, z):
    """Real value of ``f(x, y)`` at ``z = x + i y`` (scalar or array)."""
    if result.f is None:
        raise ValueError("degenerate result has no curve polynomial")
    z = np.asarray(z, dtype=complex)
    v = result.f.eval({"x": z.real, "y": z.imag}, scaled=True)
    v = np.real(v)
    return float(v) if np.ndim(v) == 0 else v


def specific_case_f2(n, k):
    """Closed form of ``f2`` when all atoms sit at 0, up to a constant."""
    m, x, y = GaussPoly.gens(CURVE_VARS)
    I = GaussPoly.const(1j, CURVE_VARS)
    return ((x + I * y) ** (n + k - 2) * ((m - 1) * x + I * m * y) ** ((n - 1) * (k - 1))
            * (m * x + I * (m - 1) * y))
