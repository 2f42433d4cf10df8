"""Exact sparse multivariate polynomials over the Gaussian rationals.

A :class:`GaussPoly` is stored as ``T / den`` with ``T`` a dictionary from
packed exponent vectors to Gaussian integers ``(re, im)`` and ``den`` a
positive integer; the representation is kept primitive so that equal
polynomials compare equal structurally.

Exponent vectors are packed into one Python int, ``BITS`` bits per variable
with the first variable most significant.  Monomial multiplication is then
integer addition, and integer comparison of packed keys is lexicographic
order, which the division routine relies on.

Determinants of polynomial matrices use fraction-free Bareiss elimination
over ``Z[i][vars]``; a cofactor expansion is kept as an independent check.
"""
from __future__ import annotations

import heapq
import math
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Mapping, Sequence

import numpy as np

BITS = 24
FIELD = (1 << BITS) - 1
MAX_DEGREE = (1 << (BITS - 1)) - 1
VARIABLE_ORDER = ("g", "m", "x", "y")


class DivisionError(ArithmeticError):
    """Raised by :func:`exact_div` when the remainder is nonzero."""

    def __init__(self, remainder, quotient):
        super().__init__(f"division leaves a nonzero remainder with {len(remainder)} terms")
        self.remainder = remainder
        self.quotient = quotient


# ---------------------------------------------------------------------------
# Gaussian rationals


class GaussRational:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussRational):
            re, im = re.re, re.im + Fraction(im)
        elif isinstance(re, complex):
            re, im = Fraction(re.real), Fraction(re.imag) + Fraction(im)
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, v):
        return v if isinstance(v, GaussRational) else cls(v)

    re_num = property(lambda self: self.re.numerator)
    re_den = property(lambda self: self.re.denominator)
    im_num = property(lambda self: self.im.numerator)
    im_den = property(lambda self: self.im.denominator)

    def __add__(self, o):
        if not _scalar(o):
            return NotImplemented
        o = GaussRational.coerce(o)
        return GaussRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __sub__(self, o):
        if not _scalar(o):
            return NotImplemented
        return self + (-GaussRational.coerce(o))

    def __rsub__(self, o):
        return GaussRational.coerce(o) - self

    def __mul__(self, o):
        if not _scalar(o):
            return NotImplemented
        o = GaussRational.coerce(o)
        return GaussRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if not _scalar(o):
            return NotImplemented
        o = GaussRational.coerce(o)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero")
        return self * GaussRational(o.re / n, -o.im / n)

    def __rtruediv__(self, o):
        return GaussRational.coerce(o) / self

    def __pow__(self, k):
        out = GaussRational(1)
        for _ in range(k):
            out = out * self
        return out

    def conjugate(self):
        return GaussRational(self.re, -self.im)

    def __eq__(self, o):
        try:
            o = GaussRational.coerce(o)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return f"GaussRational({self.re})"
        return f"GaussRational({self.re}, {self.im})"


def _scalar(v):
    return isinstance(v, (GaussRational, int, Fraction, float, complex))


# ---------------------------------------------------------------------------
# packed exponents


def _pack(exps):
    k = 0
    for e in exps:
        if e < 0 or e > MAX_DEGREE:
            raise ValueError("exponent out of range")
        k = (k << BITS) | e
    return k


def _unpack(k, nv):
    out = [0] * nv
    for i in range(nv - 1, -1, -1):
        out[i] = k & FIELD
        k >>= BITS
    return tuple(out)


def _guard(nv):
    g = 0
    for _ in range(nv):
        g = (g << BITS) | (1 << (BITS - 1))
    return g


# ---------------------------------------------------------------------------
# raw term dictionaries {packed: (re, im)}


def _is_real(t):
    for _, b in t.values():
        if b:
            return False
    return True


def _t_mul(t1, t2):
    if len(t1) > len(t2):
        t1, t2 = t2, t1
    out = {}
    get = out.get
    if _is_real(t1) and _is_real(t2):
        r = {}
        rget = r.get
        items2 = [(k, a) for k, (a, _) in t2.items()]
        for k1, (a, _) in t1.items():
            for k2, c in items2:
                k = k1 + k2
                r[k] = rget(k, 0) + a * c
        return {k: (v, 0) for k, v in r.items() if v}
    items2 = list(t2.items())
    for k1, (a, b) in t1.items():
        for k2, (c, d) in items2:
            k = k1 + k2
            v = get(k)
            if v is None:
                out[k] = (a * c - b * d, a * d + b * c)
            else:
                out[k] = (v[0] + a * c - b * d, v[1] + a * d + b * c)
    return {k: v for k, v in out.items() if v[0] or v[1]}


def _t_addmul(t1, s1, t2, s2):
    """``s1*t1 + s2*t2`` for integer scalars."""
    out = {k: (a * s1, b * s1) for k, (a, b) in t1.items()} if s1 != 1 else dict(t1)
    for k, (a, b) in t2.items():
        v = out.get(k)
        if v is None:
            out[k] = (a * s2, b * s2)
        else:
            nv = (v[0] + a * s2, v[1] + b * s2)
            if nv[0] or nv[1]:
                out[k] = nv
            else:
                del out[k]
    return out


def _t_sub(t1, t2):
    return _t_addmul(t1, 1, t2, -1)


def _t_content(t):
    g = 0
    for a, b in t.values():
        g = math.gcd(g, a, b)
        if g == 1:
            break
    return g


def _t_divexact(num, den, nv, field=False):
    """Divide term dictionaries; returns ``(quotient, remainder)``.

    In integer mode (``field=False``) coefficient quotients must be Gaussian
    integers; ``None`` is returned when one is not, so the caller can retry
    over the field.  In field mode coefficients are Fraction pairs.
    """
    if not den:
        raise ZeroDivisionError("division by the zero polynomial")
    lead = max(den)
    c, d = den[lead]
    norm = c * c + d * d
    guard = _guard(nv)
    rem = dict(num)
    heap = [-k for k in rem]
    heapq.heapify(heap)
    quo = {}
    remainder = {}
    den_items = list(den.items())
    while heap:
        k = -heapq.heappop(heap)
        v = rem.pop(k, None)
        if v is None:
            continue
        while heap and -heap[0] == k:
            heapq.heappop(heap)
        a, b = v
        if ((k | guard) - lead) & guard != guard:
            remainder[k] = v
            continue
        re = a * c + b * d
        im = b * c - a * d
        if field:
            qre, qim = Fraction(re, norm), Fraction(im, norm)
        else:
            if re % norm or im % norm:
                return None
            qre, qim = re // norm, im // norm
        qk = k - lead
        quo[qk] = (qre, qim)
        for kd, (e, f) in den_items:
            if kd == lead:
                continue
            kk = qk + kd
            pre = rem.get(kk)
            dre = qre * e - qim * f
            dim = qre * f + qim * e
            if pre is None:
                rem[kk] = (-dre, -dim)
                heapq.heappush(heap, -kk)
            else:
                nre, nim = pre[0] - dre, pre[1] - dim
                if nre or nim:
                    rem[kk] = (nre, nim)
                else:
                    del rem[kk]
    return quo, remainder


# ---------------------------------------------------------------------------
# polynomials


class GaussPoly:
    """Sparse polynomial with Gaussian-rational coefficients.

    Parameters
    ----------
    variables : sequence of str
        Ordered variable names; exponent vectors follow this order.
    terms : mapping, optional
        ``{exponent tuple: coefficient}``; coefficients may be ints,
        Fractions, complex numbers with integral parts, or GaussRationals.
    """

    __slots__ = ("variables", "_t", "_den")

    def __init__(self, variables: Sequence[str], terms: Mapping | None = None):
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("repeated variable name")
        num = {}
        den = 1
        if terms:
            coeffs = {}
            for exps, c in terms.items():
                exps = tuple(exps)
                if len(exps) != len(self.variables):
                    raise ValueError("exponent vector length does not match variables")
                c = GaussRational.coerce(c)
                if c:
                    k = _pack(exps)
                    coeffs[k] = coeffs[k] + c if k in coeffs else c
            for c in coeffs.values():
                den = math.lcm(den, c.re.denominator, c.im.denominator)
            for k, c in coeffs.items():
                if c:
                    num[k] = (int(c.re * den), int(c.im * den))
        self._set(num, den)

    def _set(self, num, den):
        num = {k: v for k, v in num.items() if v[0] or v[1]}
        if not num:
            self._t, self._den = {}, 1
            return
        g = math.gcd(_t_content(num), den)
        if den < 0:
            g = -g
        if g != 1:
            num = {k: (a // g, b // g) for k, (a, b) in num.items()}
            den //= g
        self._t, self._den = num, den

    @classmethod
    def _raw(cls, variables, num, den=1):
        p = cls.__new__(cls)
        p.variables = tuple(variables)
        p._set(num, den)
        return p

    # constructors ---------------------------------------------------------
    @classmethod
    def const(cls, c, variables):
        nv = len(tuple(variables))
        return cls(variables, {(0,) * nv: c})

    @classmethod
    def var(cls, name, variables):
        variables = tuple(variables)
        exps = tuple(1 if v == name else 0 for v in variables)
        if sum(exps) != 1:
            raise ValueError(f"unknown variable {name!r}")
        return cls(variables, {exps: 1})

    @classmethod
    def gens(cls, variables):
        return tuple(cls.var(v, variables) for v in variables)

    # inspection -----------------------------------------------------------
    @property
    def nvars(self):
        return len(self.variables)

    def is_zero(self):
        return not self._t

    def __bool__(self):
        return bool(self._t)

    def __len__(self):
        return len(self._t)

    @property
    def denominator(self):
        return self._den

    def terms(self):
        """``{exps: GaussRational}`` for every nonzero term."""
        nv = self.nvars
        return {_unpack(k, nv): GaussRational(Fraction(a, self._den), Fraction(b, self._den))
                for k, (a, b) in self._t.items()}

    def coeff(self, exps):
        v = self._t.get(_pack(tuple(exps)))
        if v is None:
            return GaussRational(0)
        return GaussRational(Fraction(v[0], self._den), Fraction(v[1], self._den))

    def is_real(self):
        return _is_real(self._t)

    def degree(self, var=None):
        if not self._t:
            return -1
        nv = self.nvars
        if var is None:
            return max(sum(_unpack(k, nv)) for k in self._t)
        i = self.variables.index(var)
        return max(_unpack(k, nv)[i] for k in self._t)

    def total_degree(self):
        return self.degree()

    def __eq__(self, other):
        if isinstance(other, GaussPoly):
            if other.variables != self.variables:
                return False
            return self._den == other._den and self._t == other._t
        try:
            return self == GaussPoly.const(other, self.variables)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.variables, self._den, frozenset(self._t.items())))

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, GaussPoly):
            if other.variables != self.variables:
                raise ValueError(f"variable mismatch: {self.variables} vs {other.variables}")
            return other
        return GaussPoly.const(other, self.variables)

    def __add__(self, other):
        o = self._coerce(other)
        L = math.lcm(self._den, o._den)
        t = _t_addmul(self._t, L // self._den, o._t, L // o._den)
        return GaussPoly._raw(self.variables, t, L)

    __radd__ = __add__

    def __neg__(self):
        return GaussPoly._raw(self.variables, {k: (-a, -b) for k, (a, b) in self._t.items()}, self._den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return GaussPoly._raw(self.variables, _t_mul(self._t, o._t), self._den * o._den)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = GaussPoly.const(1, self.variables)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def conjugate(self):
        """Conjugate the coefficients (variables treated as real)."""
        return GaussPoly._raw(self.variables, {k: (a, -b) for k, (a, b) in self._t.items()}, self._den)

    def scale_to_integral(self):
        """``(T, den)`` with ``self = T / den`` and ``T`` over ``Z[i]``."""
        return dict(self._t), self._den

    def primitive(self):
        """Integral primitive associate: content and denominator removed.

        The sign is fixed so that the leading (graded-lex) coefficient has a
        positive real part, or positive imaginary part if the real part is 0.
        """
        if not self._t:
            return self
        t = self._t
        g = _t_content(t)
        lead = self._sorted_keys()[0]
        a, b = t[lead]
        s = -1 if (a < 0 or (a == 0 and b < 0)) else 1
        return GaussPoly._raw(self.variables, {k: (s * x // g, s * y // g) for k, (x, y) in t.items()}, 1)

    def _sorted_keys(self):
        nv = self.nvars
        return sorted(self._t, key=lambda k: (sum(_unpack(k, nv)), k), reverse=True)

    # variable handling ----------------------------------------------------
    def with_variables(self, variables):
        """Embed into (or restrict to) another variable list."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        idx = []
        for v in self.variables:
            if v in variables:
                idx.append(variables.index(v))
            else:
                idx.append(None)
        nv, nw = self.nvars, len(variables)
        out = {}
        for k, c in self._t.items():
            e = _unpack(k, nv)
            new = [0] * nw
            for i, ei in enumerate(e):
                if idx[i] is None:
                    if ei:
                        raise ValueError(f"polynomial depends on dropped variable {self.variables[i]!r}")
                else:
                    new[idx[i]] = ei
            out[_pack(new)] = c
        return GaussPoly._raw(variables, out, self._den)

    def coefficients_in(self, var):
        """Coefficients ``[c_0, c_1, ...]`` of powers of ``var``, over the other variables."""
        i = self.variables.index(var)
        rest = self.variables[:i] + self.variables[i + 1 :]
        nv = self.nvars
        buckets = {}
        for k, c in self._t.items():
            e = _unpack(k, nv)
            buckets.setdefault(e[i], {})[_pack(e[:i] + e[i + 1 :])] = c
        deg = max(buckets) if buckets else -1
        return [GaussPoly._raw(rest, buckets.get(d, {}), self._den) for d in range(deg + 1)]

    def substitute(self, var, value):
        """Replace ``var`` by a polynomial (same variable list) or a constant."""
        value = self._coerce(value)
        out = GaussPoly.const(0, self.variables)
        for d, c in enumerate(self.coefficients_in(var)):
            if c:
                embedded = c.with_variables(self.variables) if var in self.variables else c
                out = out + embedded * value**d
        return out

    # evaluation -----------------------------------------------------------
    def eval_exact(self, point: Mapping):
        """Exact value at a point with rational or Gaussian-rational coordinates."""
        vals = [GaussRational.coerce(_bound(point, v)) for v in self.variables]
        total = GaussRational(0)
        for exps, c in self.terms().items():
            term = c
            for v, e in zip(vals, exps):
                if e:
                    term = term * v**e
            total = total + term
        return total

    def eval(self, point: Mapping, scaled=False):
        """Floating evaluation; point values may be numpy arrays.

        With ``scaled=True`` the coefficients are divided by the largest
        coefficient modulus first, which avoids overflow for huge integers.
        """
        vals = [np.asarray(_bound(point, v), dtype=complex) for v in self.variables]
        coeffs, exps = self.float_coefficients(scaled)
        if not len(coeffs):
            return np.zeros(np.broadcast(*vals).shape, dtype=complex) if vals else 0j
        shape = np.broadcast(*vals).shape if vals else ()
        total = np.zeros(shape, dtype=complex)
        for i, v in enumerate(vals):
            vals[i] = np.broadcast_to(v, shape)
        powers = []
        for i, v in enumerate(vals):
            dmax = int(exps[:, i].max())
            pw = [np.ones(shape, dtype=complex)]
            for _ in range(dmax):
                pw.append(pw[-1] * v)
            powers.append(pw)
        for c, e in zip(coeffs, exps):
            term = np.full(shape, c, dtype=complex)
            for i, ei in enumerate(e):
                if ei:
                    term = term * powers[i][ei]
            total += term
        return complex(total) if total.ndim == 0 else total

    def eval_dyadic(self, point: Mapping) -> complex:
        """Correctly rounded value at a point with real float coordinates.

        Every float is an integer over a power of two, so the sum is formed
        exactly in integers and rounded once.  Avoids the cancellation that
        limits :meth:`eval` near the zero set.
        """
        nv = self.nvars
        fr = [Fraction(float(_bound(point, v))) for v in self.variables]
        k = max((f.denominator.bit_length() - 1 for f in fr), default=0)
        N = [f.numerator << (k - (f.denominator.bit_length() - 1)) for f in fr]
        exps = {key: _unpack(key, nv) for key in self._t}
        D = max((sum(e) for e in exps.values()), default=0)
        pw = []
        for i in range(nv):
            top = max((e[i] for e in exps.values()), default=0)
            row = [1]
            for _ in range(top):
                row.append(row[-1] * N[i])
            pw.append(row)
        re = im = 0
        for key, (a, b) in self._t.items():
            e = exps[key]
            mon = 1
            for i in range(nv):
                if e[i]:
                    mon *= pw[i][e[i]]
            mon <<= k * (D - sum(e))
            re += a * mon
            im += b * mon
        scale = self._den << (k * D)
        return complex(Fraction(re, scale), Fraction(im, scale))

    def float_coefficients(self, scaled=False):
        """``(coeffs, exps)`` arrays; ``scaled`` divides by the largest modulus."""
        nv = self.nvars
        keys = list(self._t)
        exps = np.array([_unpack(k, nv) for k in keys], dtype=np.int64).reshape(len(keys), nv)
        if scaled and keys:
            big = max(max(abs(a), abs(b)) for a, b in self._t.values())
            coeffs = np.array([complex(Fraction(a, big), Fraction(b, big)) for a, b in self._t.values()])
        else:
            coeffs = np.array([complex(Fraction(a, self._den), Fraction(b, self._den))
                               for a, b in self._t.values()])
        return coeffs, exps

    # real / imaginary parts ----------------------------------------------
    def split_re_im(self):
        re = {k: (a, 0) for k, (a, b) in self._t.items() if a}
        im = {k: (b, 0) for k, (a, b) in self._t.items() if b}
        return GaussPoly._raw(self.variables, re, self._den), GaussPoly._raw(self.variables, im, self._den)

    # serialization --------------------------------------------------------
    def to_json_terms(self, variables=None):
        """Terms sorted by graded-lex order (highest first), decimal-string integers."""
        p = self if variables is None else self.with_variables(variables)
        out = []
        nv = p.nvars
        for k in p._sorted_keys():
            a, b = p._t[k]
            re, im = Fraction(a, p._den), Fraction(b, p._den)
            out.append({
                "exps": list(_unpack(k, nv)),
                "re": {"num": str(re.numerator), "den": str(re.denominator)},
                "im": {"num": str(im.numerator), "den": str(im.denominator)},
            })
        return out

    @classmethod
    def from_json_terms(cls, variables, terms):
        d = {}
        for t in terms:
            re = Fraction(int(t["re"]["num"]), int(t["re"]["den"]))
            im = Fraction(int(t["im"]["num"]), int(t["im"]["den"]))
            d[tuple(t["exps"])] = GaussRational(re, im)
        return cls(variables, d)

    def __str__(self):
        if not self._t:
            return "0"
        parts = []
        nv = self.nvars
        for k in self._sorted_keys():
            a, b = self._t[k]
            c = GaussRational(Fraction(a, self._den), Fraction(b, self._den))
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in zip(self.variables, _unpack(k, nv)) if e)
            cs = _fmt_coeff(c)
            if not mono:
                parts.append(cs)
            elif cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append("-" + mono)
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"GaussPoly({self.variables}, {len(self._t)} terms)"


def _fmt_coeff(c):
    if not c.im:
        return str(c.re)
    if not c.re:
        return "I" if c.im == 1 else ("-I" if c.im == -1 else f"{c.im}*I")
    return f"({c.re} + {c.im}*I)".replace("+ -", "- ")


def _bound(point, v):
    try:
        return point[v]
    except KeyError:
        raise KeyError(f"variable {v!r} is not bound") from None


# ---------------------------------------------------------------------------
# operations


def poly_ring(variables):
    """Generators for the given variable names, e.g. ``m, x, y = poly_ring("mxy")``."""
    return GaussPoly.gens(tuple(variables))


def exact_div(p: GaussPoly, d: GaussPoly) -> GaussPoly:
    """Exact quotient ``p / d``; raises :class:`DivisionError` on a remainder."""
    d = p._coerce(d)
    if d.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    nv = p.nvars
    res = _t_divexact(p._t, d._t, nv)
    if res is not None and not res[1]:
        quo, _ = res
        # (P/Dp) / (Q/Dq) = (P/Q) * Dq / Dp
        return GaussPoly._raw(p.variables, {k: (a * d._den, b * d._den) for k, (a, b) in quo.items()}, p._den)
    quo, rem = _t_divexact(p._t, d._t, nv, field=True)
    scale = Fraction(d._den)
    q = GaussPoly(p.variables, {_unpack(k, nv): GaussRational(a * scale / p._den, b * scale / p._den)
                                for k, (a, b) in quo.items()})
    if rem:
        r = GaussPoly(p.variables, {_unpack(k, nv): GaussRational(Fraction(a, p._den), Fraction(b, p._den))
                                    for k, (a, b) in rem.items()})
        raise DivisionError(r, q)
    return q


def split_re_im(p: GaussPoly):
    return p.split_re_im()


def bareiss_det(matrix: Sequence[Sequence[GaussPoly]]) -> GaussPoly:
    """Determinant by fraction-free Bareiss elimination.

    Rows are first scaled to integral form, so every intermediate division
    is exact over ``Z[i][vars]``.
    """
    n = len(matrix)
    if n == 0:
        raise ValueError("empty matrix")
    variables = None
    for row in matrix:
        if len(row) != n:
            raise ValueError("matrix must be square")
        for e in row:
            if isinstance(e, GaussPoly):
                variables = e.variables
                break
    rows = []
    scale = 1
    for row in matrix:
        row = [e if isinstance(e, GaussPoly) else GaussPoly.const(e, variables) for e in row]
        L = 1
        for e in row:
            L = math.lcm(L, e._den)
        scale *= L
        rows.append([{k: (a * (L // e._den), b * (L // e._den)) for k, (a, b) in e._t.items()} for e in row])
    nv = len(variables)
    det = _bareiss_terms(rows, nv)
    return GaussPoly._raw(variables, det, scale)


def _bareiss_terms(M, nv):
    n = len(M)
    M = [list(r) for r in M]
    sign = 1
    prev = {0: (1, 0)}
    for k in range(n - 1):
        cands = [i for i in range(k, n) if M[i][k]]
        if not cands:
            return {}
        piv = min(cands, key=lambda i: (len(M[i][k]), i))
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        pk = M[k][k]
        for i in range(k + 1, n):
            mik = M[i][k]
            for j in range(k + 1, n):
                if mik and M[k][j]:
                    num = _t_sub(_t_mul(pk, M[i][j]), _t_mul(mik, M[k][j]))
                else:
                    num = _t_mul(pk, M[i][j])
                if prev != {0: (1, 0)}:
                    res = _t_divexact(num, prev, nv)
                    if res is None or res[1]:
                        raise ArithmeticError("Bareiss step was not exact; matrix is not integral")
                    num = res[0]
                M[i][j] = num
            M[i][k] = {}
        prev = pk
    det = M[n - 1][n - 1]
    if sign < 0:
        det = {k: (-a, -b) for k, (a, b) in det.items()}
    return det


def cofactor_det(matrix: Sequence[Sequence[GaussPoly]]) -> GaussPoly:
    """Determinant by Leibniz/cofactor expansion (reference for small sizes)."""
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    total = None
    for j in range(n):
        e = matrix[0][j]
        if isinstance(e, GaussPoly) and e.is_zero():
            continue
        minor = [row[:j] + row[j + 1 :] for row in matrix[1:]]
        term = e * cofactor_det(minor)
        term = term if j % 2 == 0 else -term
        total = term if total is None else total + term
    if total is None:
        ref = next(e for row in matrix for e in row if isinstance(e, GaussPoly))
        return GaussPoly.const(0, ref.variables)
    return total


def sylvester_matrix(pA: GaussPoly, pB: GaussPoly, var: str):
    """Sylvester matrix of ``pA`` and ``pB`` viewed as univariate in ``var``."""
    if pA.variables != pB.variables:
        raise ValueError("variable mismatch")
    ca = pA.coefficients_in(var)
    cb = pB.coefficients_in(var)
    n, k = len(ca) - 1, len(cb) - 1
    i = pA.variables.index(var)
    rest = pA.variables[:i] + pA.variables[i + 1 :]
    zero = GaussPoly.const(0, rest)
    size = n + k
    rows = []
    for r in range(k):
        row = [zero] * size
        for d in range(n + 1):
            row[r + d] = ca[n - d]
        rows.append(row)
    for r in range(n):
        row = [zero] * size
        for d in range(k + 1):
            row[r + d] = cb[k - d]
        rows.append(row)
    return rows


def resultant(pA: GaussPoly, pB: GaussPoly, var: str, method="bareiss") -> GaussPoly:
    """Resultant with respect to ``var`` as the Sylvester determinant.

    The result lives in the remaining variables.
    """
    if pA.variables != pB.variables:
        raise ValueError("variable mismatch")
    if pA.is_zero() or pB.is_zero():
        raise ValueError("resultant with the zero polynomial")
    n, k = pA.degree(var), pB.degree(var)
    i = pA.variables.index(var)
    rest = pA.variables[:i] + pA.variables[i + 1 :]
    if n == 0 and k == 0:
        raise ValueError(f"both polynomials are constant in {var!r}")
    if n == 0:
        return pA.with_variables(rest) ** k
    if k == 0:
        return pB.with_variables(rest) ** n
    if method == "modular":
        return modular_resultant(pA, pB, var)
    M = sylvester_matrix(pA, pB, var)
    if method == "cofactor":
        return cofactor_det(M)
    if method != "bareiss":
        raise ValueError(f"unknown method {method!r}")
    return bareiss_det(M)


# ---------------------------------------------------------------------------
# multi-modular resultant
#
# For real inputs the Sylvester determinant is computed modulo primes below
# 2^26 (so int64 products never overflow) at the nodes of a grid in the
# remaining variables, interpolated per prime and lifted by the Chinese
# remainder theorem.  The determinant is a polynomial in the matrix entries,
# so evaluating entries first is always valid; degree and coefficient bounds
# make the result exact.

PRIME_BITS = 26


def _primes(count, below=1 << PRIME_BITS):
    out, c = [], below - 1
    while len(out) < count:
        if c % 2 and all(c % d for d in range(3, math.isqrt(c) + 1, 2)):
            out.append(c)
        c -= 1
    return out


def _matmul_mod(A, B, p):
    """``A @ B mod p`` for int64 arrays with entries in ``[0, p)``."""
    out = np.zeros(A.shape[:-1] + B.shape[1:], dtype=np.int64)
    for s in range(0, A.shape[-1], 64):
        out = (out + A[..., s:s + 64] @ B[s:s + 64]) % p
    return out


def _powmod_vec(x, e, p):
    r = np.ones_like(x)
    x = x % p
    while e:
        if e & 1:
            r = r * x % p
        x = x * x % p
        e >>= 1
    return r


def _det_mod(M, p):
    """Determinants modulo ``p`` of a stack of square matrices ``M[..., n, n]``."""
    M = M.copy()
    P, n = M.shape[0], M.shape[1]
    det = np.ones(P, dtype=np.int64)
    rows = np.arange(P)
    for c in range(n):
        nz = M[:, c:, c] != 0
        has = nz.any(axis=1)
        piv = np.argmax(nz, axis=1) + c
        det[~has] = 0
        swap = has & (piv != c)
        if swap.any():
            r = rows[swap]
            top = M[r, c].copy()
            M[r, c] = M[r, piv[swap]]
            M[r, piv[swap]] = top
            det[swap] = (p - det[swap]) % p
        pv = np.where(has, M[:, c, c], 1)
        det = det * pv % p
        if c == n - 1:
            break
        inv = _powmod_vec(pv, p - 2, p)
        f = M[:, c + 1:, c] * inv[:, None] % p
        M[:, c + 1:, c:] = (M[:, c + 1:, c:] - f[:, :, None] * M[:, None, c, c:] % p) % p
    return det


def _interpolate_axis(V, axis, p, inv):
    """Monomial coefficients from values at ``0, 1, ..., D`` along ``axis``."""
    V = np.moveaxis(V, axis, 0).copy()
    D = V.shape[0] - 1
    for j in range(1, D + 1):       # divided differences, nodes spaced by 1
        V[j:] = (V[j:] - V[j - 1:-1]) * inv[j] % p
    C = np.zeros_like(V)
    C[0] = V[D]
    for k in range(D - 1, -1, -1):  # Horner on the Newton form: C = C * (t - k) + V[k]
        shifted = np.zeros_like(C)
        shifted[1:] = C[:-1]
        C = (shifted - k * C % p + p) % p
        C[0] = (C[0] + V[k]) % p
    return np.moveaxis(C, 0, axis)


def modular_resultant(pA: GaussPoly, pB: GaussPoly, var: str) -> GaussPoly:
    """Resultant of real polynomials by evaluation, interpolation and CRT.

    Agrees exactly with the Sylvester determinant route; intended for
    resultants whose coefficients are large multivariate polynomials.
    """
    if not (pA.is_real() and pB.is_real()):
        raise ValueError("modular resultant needs real coefficients")
    variables = pA.variables
    nv = len(variables)
    iv = variables.index(var)
    rest = variables[:iv] + variables[iv + 1:]
    r = len(rest)
    n, k = pA.degree(var), pB.degree(var)
    if n == 0 or k == 0 or r == 0:
        return resultant(pA, pB, var)

    def split(P):
        coefs = {}
        for key, (a, _) in P._t.items():
            e = _unpack(key, nv)
            coefs.setdefault(e[iv], []).append((e[:iv] + e[iv + 1:], a))
        return coefs

    ca, cb = split(pA), split(pB)
    degA = [pA.degree(v) for v in rest]
    degB = [pB.degree(v) for v in rest]
    D = [k * a + n * b for a, b in zip(degA, degB)]
    norm1 = lambda P: sum(abs(a) for a, _ in P._t.values())
    bound = norm1(pA) ** k * norm1(pB) ** n
    need = bound.bit_length() + 2
    primes = _primes(-(-need // (PRIME_BITS - 1)))
    grid_shape = tuple(d + 1 for d in D)
    size = n + k

    residues = []
    for p in primes:
        # powers of the nodes 0..D_v for every remaining variable
        pw = []
        for v in range(r):
            t = np.arange(D[v] + 1, dtype=np.int64)
            tab = np.ones((D[v] + 1, max(degA[v], degB[v]) + 1), dtype=np.int64)
            for e in range(1, tab.shape[1]):
                tab[:, e] = tab[:, e - 1] * t % p
            pw.append(tab)

        def evaluate(terms):
            dims = tuple(max(degA[v], degB[v]) + 1 for v in range(r))
            C = np.zeros(dims, dtype=np.int64)
            for e, a in terms:
                C[e] = (C[e] + a) % p
            for v in range(r):      # contract one variable at a time
                C = np.moveaxis(_matmul_mod(pw[v], np.moveaxis(C, v, 0).reshape(dims[v], -1), p)
                                .reshape((pw[v].shape[0],) + tuple(np.moveaxis(C, v, 0).shape[1:])), 0, v)
            return C

        EA = {d: evaluate(t) for d, t in ca.items()}
        EB = {d: evaluate(t) for d, t in cb.items()}
        zero = np.zeros(grid_shape, dtype=np.int64)
        M = np.zeros(grid_shape + (size, size), dtype=np.int64)
        for row in range(k):
            for d in range(n + 1):
                M[..., row, row + d] = EA.get(n - d, zero)
        for row in range(n):
            for d in range(k + 1):
                M[..., k + row, row + d] = EB.get(k - d, zero)
        vals = _det_mod(M.reshape(-1, size, size), p).reshape(grid_shape)
        inv = [0] + [pow(j, p - 2, p) for j in range(1, max(D) + 1)]
        inv = np.array(inv, dtype=np.int64)
        for v in range(r):
            vals = _interpolate_axis(vals, v, p, inv)
        residues.append(vals.reshape(-1))

    # Chinese remainder lift to symmetric integers
    R = np.stack(residues)
    coeffs = [0] * R.shape[1]
    modulus = 1
    for i, p in enumerate(primes):
        if i == 0:
            coeffs = [int(c) for c in R[0]]
            modulus = p
            continue
        minv = pow(modulus % p, p - 2, p)
        col = R[i]
        for j in range(len(coeffs)):
            t = (int(col[j]) - coeffs[j]) * minv % p
            coeffs[j] += modulus * t
        modulus *= p
    half = modulus // 2
    terms = {}
    for j, c in enumerate(coeffs):
        if c > half:
            c -= modulus
        if c:
            e = np.unravel_index(j, grid_shape)
            terms[_pack(tuple(int(x) for x in e))] = (c, 0)
    return GaussPoly._raw(rest, terms, pA._den ** k * pB._den ** n)


def leibniz_det(matrix):
    """Permutation-sum determinant; only for tiny test matrices."""
    n = len(matrix)
    total = None
    for perm in permutations(range(n)):
        sign = _perm_sign(perm)
        term = None
        for r, c in enumerate(perm):
            term = matrix[r][c] if term is None else term * matrix[r][c]
        term = term if sign > 0 else -term
        total = term if total is None else total + term
    return total


def _perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def proportional(p: GaussPoly, q: GaussPoly):
    """Return the scalar ``c`` with ``p = c q`` exactly, or ``None``."""
    if p.variables != q.variables:
        raise ValueError("variable mismatch")
    if p.is_zero() or q.is_zero():
        return None
    tp, tq = p.terms(), q.terms()
    if tp.keys() != tq.keys():
        return None
    it = iter(tp)
    e0 = next(it)
    c = tp[e0] / tq[e0]
    for e in tp:
        if tp[e] != c * tq[e]:
            return None
    return c


def from_roots(roots: Iterable, var: str, variables, lead=1) -> GaussPoly:
    """``lead * prod (var - r)`` as a polynomial."""
    X = GaussPoly.var(var, variables)
    p = GaussPoly.const(lead, variables)
    for r in roots:
        p = p * (X - r)
    return p
