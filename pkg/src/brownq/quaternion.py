"""Quaternions in the 2x2 complex representation.

A quaternion is stored as the pair ``(A, B)`` of complex numbers and acts as
the matrix ``((A, i*conj(B)), (i*B, conj(A)))``.  With ``A = x0 + i*x3`` and
``B = x1 + i*x2`` the four real coordinates are available as properties.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ZERO_TOL = 1e-14


@dataclass(frozen=True)
class EigenPair:
    """Eigenvalues of ``Q`` and of ``Q*i`` taken with non-negative imaginary part."""

    g: complex
    gI: complex


@dataclass(frozen=True)
class Quaternion:
    A: complex
    B: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "A", complex(self.A))
        object.__setattr__(self, "B", complex(self.B))

    # constructors -------------------------------------------------------
    @classmethod
    def from_coords(cls, x0, x1, x2, x3):
        return cls(complex(x0, x3), complex(x1, x2))

    @classmethod
    def from_matrix(cls, m, atol=1e-10):
        """Read a quaternion from a 2x2 complex matrix, checking its shape."""
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("expected a 2x2 matrix")
        A = m[0, 0]
        B = m[1, 0] / 1j
        if abs(m[1, 1] - A.conjugate()) > atol or abs(m[0, 1] - 1j * B.conjugate()) > atol:
            raise ValueError("matrix is not of quaternion form")
        return cls(A, B)

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0)

    @classmethod
    def unit_i(cls):
        """The complex unit ``i`` seen as the quaternion ``diag(i, -i)``."""
        return cls(1j, 0.0)

    # coordinates ----------------------------------------------------------
    @property
    def x0(self):
        return self.A.real

    @property
    def x1(self):
        return self.B.real

    @property
    def x2(self):
        return self.B.imag

    @property
    def x3(self):
        return self.A.imag

    def coords(self):
        return (self.x0, self.x1, self.x2, self.x3)

    def matrix(self):
        A, B = self.A, self.B
        return np.array([[A, 1j * B.conjugate()], [1j * B, A.conjugate()]])

    # algebra --------------------------------------------------------------
    def det(self):
        return abs(self.A) ** 2 + abs(self.B) ** 2

    def norm(self):
        return math.hypot(abs(self.A), abs(self.B))

    def conj(self):
        """Quaternion conjugate ``Q*``, which is also the conjugate transpose."""
        return Quaternion(self.A.conjugate(), -self.B)

    def is_zero(self, tol=ZERO_TOL):
        return abs(self.A) <= tol and abs(self.B) <= tol

    def is_complex(self, tol=ZERO_TOL):
        return abs(self.B) <= tol

    def is_real(self, tol=ZERO_TOL):
        return abs(self.B) <= tol and abs(self.A.imag) <= tol

    def __add__(self, other):
        other = _as_quaternion(other)
        return Quaternion(self.A + other.A, self.B + other.B)

    __radd__ = __add__

    def __neg__(self):
        return Quaternion(-self.A, -self.B)

    def __sub__(self, other):
        return self + (-_as_quaternion(other))

    def __rsub__(self, other):
        return _as_quaternion(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.A * other, self.B * other)
        return mul(self, _as_quaternion(other))

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.A * other, self.B * other)
        return mul(_as_quaternion(other), self)

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.A / other, self.B / other)
        return mul(self, inverse(_as_quaternion(other)))

    def __abs__(self):
        return self.norm()


def _as_quaternion(v):
    if isinstance(v, Quaternion):
        return v
    if isinstance(v, (int, float, complex, np.number)):
        return Quaternion(complex(v), 0.0)
    raise TypeError(f"cannot interpret {type(v).__name__} as a quaternion")


def mul(q1: Quaternion, q2: Quaternion) -> Quaternion:
    """Matrix product of two quaternions, returned in (A, B) form."""
    A = q1.A * q2.A - q1.B.conjugate() * q2.B
    B = q1.B * q2.A + q1.A.conjugate() * q2.B
    return Quaternion(A, B)


def inverse(q: Quaternion) -> Quaternion:
    d = q.det()
    if d <= ZERO_TOL ** 2:
        raise ZeroDivisionError("the zero quaternion is not invertible")
    c = q.conj()
    return Quaternion(c.A / d, c.B / d)


def eigen(q: Quaternion) -> EigenPair:
    x0, x1, x2, x3 = q.coords()
    g = complex(x0, math.sqrt(x1 * x1 + x2 * x2 + x3 * x3))
    gI = complex(-x3, math.sqrt(x0 * x0 + x1 * x1 + x2 * x2))
    return EigenPair(g, gI)


def z_epsilon(z, eps) -> Quaternion:
    """The quaternion ``((z, i eps), (i eps, conj z))``."""
    eps = float(eps)
    if not eps > 0:
        raise ValueError("eps must be positive")
    return Quaternion(complex(z), eps)


def diagonalize(q: Quaternion):
    """Return ``(S, g)`` with ``S q S^-1 = diag(g, conj g)``.

    Real quaternions are rejected since their diagonalization is trivial.
    """
    if q.is_real():
        raise ValueError("real quaternions are not diagonalized")
    g = eigen(q).g
    A, B = q.A, q.B
    S = np.array([[1j * B, g - A], [(g - A).conjugate(), 1j * B.conjugate()]])
    # det S = -(|B|^2 + |g-A|^2) vanishes only when Q = diag(g, conj g) already
    if abs(B) ** 2 + abs(g - A) ** 2 <= (1e-12 * max(1.0, abs(g))) ** 2:
        S = np.eye(2, dtype=complex)
    return S, g
