"""Random-matrix laboratory for ``X_n = P_n + i Q_n``.

``P_n`` is diagonal with spectrum rounded from ``mu_p``; ``Q_n = U D U*`` with
``D`` rounded from ``mu_q`` and ``U`` Haar distributed, which models free
position at finite ``n``.  The module computes eigenvalue clouds, Monte
Carlo estimates of the quaternionic Green's function at ``z_eps`` and a
trend-based classification of points of the plane.

Green entries per replica, with ``X_z = z - X`` and ``M = X_z* X_z + eps^2``::

    A = tau[M^-1 X_z*],      B = -eps tau[M^-1]

``tau`` is the normalized trace.  The quaternion ``((A, i conj B), (i B,
conj A))`` is the block trace of the inverse of ``((X_z, i eps), (i eps,
X_z*))``; ``B`` is negative.
"""
from __future__ import annotations

import enum
import hashlib
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .measures import AtomicMeasure, sample_matrix_spectrum
from .quaternion import Quaternion

DEFAULT_LADDER = (0.2, 0.1, 0.05, 0.02, 0.01)


@dataclass(frozen=True)
class EnsembleSpec:
    mu_p: AtomicMeasure
    mu_q: AtomicMeasure
    n: int
    seed: int = 0
    replicas: int = 1

    def __post_init__(self):
        if int(self.n) < 2:
            raise ValueError("n must be at least 2")
        if int(self.replicas) < 1:
            raise ValueError("replicas must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "replicas", int(self.replicas))
        object.__setattr__(self, "seed", int(self.seed))

    def bound(self):
        """Spectral-norm bound ``max|alpha| + max|beta|``."""
        return self.mu_p.bound() + self.mu_q.bound()

    def to_dict(self):
        return {"mu_p": self.mu_p.to_dict(), "mu_q": self.mu_q.to_dict(), "n": self.n,
                "seed": self.seed, "replicas": self.replicas}

    def rng(self, replica: int) -> np.random.Generator:
        """Independent stream for one replica, split from the seed."""
        if not 0 <= replica < self.replicas:
            raise IndexError("replica index out of range")
        child = np.random.SeedSequence(self.seed).spawn(self.replicas)[replica]
        return np.random.Generator(np.random.PCG64(child))


@dataclass
class SpectrumSample:
    eigenvalues: np.ndarray
    spec: EnsembleSpec
    wall_time: float
    replica: int = 0

    def __post_init__(self):
        if len(self.eigenvalues) != self.spec.n:
            raise ValueError("eigenvalue count differs from n")


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from the QR factorization of a complex Ginibre matrix.

    The columns of ``Q`` are rotated by the phases of ``diag(R)`` so that the
    factorization is unique and the law is exactly Haar.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def build_matrix(spec: EnsembleSpec, replica: int = 0) -> np.ndarray:
    """``X = P + i U D U*`` for one replica."""
    rng = spec.rng(replica)
    p = sample_matrix_spectrum(spec.mu_p, spec.n)
    q = sample_matrix_spectrum(spec.mu_q, spec.n)
    U = haar_unitary(spec.n, rng)
    Q = (U * q) @ U.conj().T
    Q = 0.5 * (Q + Q.conj().T)
    X = 1j * Q
    X[np.diag_indices(spec.n)] += p
    return X


def _matrix_hash(X):
    return hashlib.sha256(np.ascontiguousarray(X).tobytes()).hexdigest()[:16]


def sample_spectrum(spec: EnsembleSpec, replica: int = 0) -> SpectrumSample:
    """Eigenvalues of one replica, sorted by real then imaginary part."""
    t0 = time.perf_counter()
    X = build_matrix(spec, replica)
    try:
        ev = np.linalg.eigvals(X)
    except np.linalg.LinAlgError as err:
        raise np.linalg.LinAlgError(f"eigensolver failed for matrix {_matrix_hash(X)}: {err}") from None
    ev = ev[np.lexsort((ev.imag, ev.real))]
    return SpectrumSample(ev, spec, time.perf_counter() - t0, replica)


# ---------------------------------------------------------------------------
# Green's function estimation


def green_entries(X, z, eps_list, method="auto"):
    """Per-replica entries ``(A, B, D)`` for each eps, with ``D`` the lower-right trace.

    ``method`` is ``"cholesky"`` (one Hermitian factorization per eps),
    ``"svd"`` (one decomposition reused across eps) or ``"auto"``, which
    picks the SVD for ladders of three or more rungs.
    """
    eps_list = [float(e) for e in np.atleast_1d(eps_list)]
    if any(e <= 0 for e in eps_list):
        raise ValueError("eps must be positive")
    if method == "auto":
        method = "svd" if len(eps_list) >= 3 else "cholesky"
    n = X.shape[0]
    Xz = -X.copy()
    Xz[np.diag_indices(n)] += z
    out = np.empty((len(eps_list), 3), dtype=complex)
    if method == "svd":
        U, s, Vh = np.linalg.svd(Xz)
        c = np.sum(U.conj() * Vh.conj().T, axis=0)   # diag(U* V)
        for i, e in enumerate(eps_list):
            w = 1 / (s**2 + e**2)
            A = np.sum(s * w * c) / n
            out[i] = (A, -e * w.sum() / n, np.conj(A))
        return out
    if method != "cholesky":
        raise ValueError(f"unknown method {method!r}")
    XzH = Xz.conj().T
    G = XzH @ Xz
    eye = np.eye(n)
    for i, e in enumerate(eps_list):
        M = G + e**2 * eye
        try:
            L = sla.cholesky(M, lower=True, check_finite=False)
        except np.linalg.LinAlgError as err:
            raise np.linalg.LinAlgError(f"Hermitian solve failed at z={z}, eps={e}: {err}") from None
        W = sla.solve_triangular(L, eye, lower=True, check_finite=False)    # M^-1 = W* W
        tr_inv = np.sum(np.abs(W) ** 2) / n
        A = np.sum(W.conj() * (W @ XzH)) / n
        D = np.sum((W @ Xz) * W.conj()) / n
        out[i] = (A, -e * tr_inv, D)
    return out


@dataclass
class GreenEstimate:
    """Replica-averaged quaternionic Green's function at ``z_eps`` on a ladder."""

    z: complex
    eps: tuple
    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    A_se: np.ndarray
    B_se: np.ndarray
    D_se: np.ndarray
    replicas: int

    @property
    def ell(self):
        """``eps / B`` per rung (so that ``ell * B == eps`` holds exactly)."""
        return np.array(self.eps) / self.B

    def quaternion(self, k: int) -> Quaternion:
        return Quaternion(complex(self.A[k]), complex(self.B[k].real))

    def norms(self):
        return np.sqrt(np.abs(self.A) ** 2 + np.abs(self.B) ** 2)

    def to_dict(self):
        rows = []
        for k, e in enumerate(self.eps):
            rows.append({
                "eps": e,
                "A": [self.A[k].real, self.A[k].imag],
                "A_se": self.A_se[k],
                "B": self.B[k].real,
                "B_imag": self.B[k].imag,
                "B_se": self.B_se[k],
                "lower_right": [self.D[k].real, self.D[k].imag],
                "ell": float(e / self.B[k].real),
                "norm": float(self.norms()[k]),
            })
        return {"z": [self.z.real, self.z.imag], "replicas": self.replicas, "ladder": rows}


def _check_ladder(eps):
    eps = tuple(float(e) for e in np.atleast_1d(eps))
    if any(e <= 0 for e in eps):
        raise ValueError("eps must be positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps ladder must be strictly decreasing")
    return eps


def estimate_green(spec: EnsembleSpec, z, eps, method="auto", matrices=None):
    """Monte Carlo estimate of the Green's function at ``z_eps``.

    Parameters
    ----------
    z : complex or sequence of complex
        One point, or several points sharing the replica matrices.
    eps : float or strictly decreasing sequence
    matrices : list of ndarray, optional
        Prebuilt replica matrices, as returned by :func:`build_matrix`.

    Returns
    -------
    GreenEstimate, or a list of them when ``z`` is a sequence.
    """
    single = np.ndim(z) == 0
    zs = [complex(z)] if single else [complex(v) for v in z]
    ladder = _check_ladder(eps)
    R = spec.replicas
    vals = np.empty((len(zs), R, len(ladder), 3), dtype=complex)
    for r in range(R):
        X = matrices[r] if matrices is not None else build_matrix(spec, r)
        for i, zz in enumerate(zs):
            vals[i, r] = green_entries(X, zz, ladder, method)
    out = []
    for i, zz in enumerate(zs):
        v = vals[i]
        mean = v.mean(axis=0)
        se = v.std(axis=0, ddof=1) / math.sqrt(R) if R > 1 else np.zeros(mean.shape)
        out.append(GreenEstimate(zz, ladder, mean[:, 0], mean[:, 1], mean[:, 2],
                                 np.abs(se[:, 0]), np.abs(se[:, 1]), np.abs(se[:, 2]), R))
    return out[0] if single else out


# ---------------------------------------------------------------------------
# classification


class Classification(str, enum.Enum):
    INTERIOR = "INTERIOR"
    EXTERIOR = "EXTERIOR"
    BOUNDARY_LIKE = "BOUNDARY-LIKE"
    DIVERGENT = "DIVERGENT"
    UNRESOLVED = "UNRESOLVED"


@dataclass(frozen=True)
class Thresholds:
    """Trend thresholds for :func:`classify_point`.

    ``divergence_factor`` is the minimal growth of the quaternion norm per
    halving of eps.  ``window`` is the number of final rungs used for the
    log-log slope of ``|B|`` against eps: slope near 0 means ``B``
    stabilizes, slope near 1 means ``B`` vanishes like eps while
    ``ell = eps / B`` stays bounded.
    """

    divergence_factor: float = 1.5
    window: int = 3
    interior_slope: float = 0.25
    exterior_slope: float = 0.75
    max_slope: float = 1.25
    b_floor: float = 1e-12

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in (d or {}).items()})


@dataclass
class PointReport:
    z: complex
    label: Classification
    slope_B: float | None
    slope_ell: float | None
    halving_growth: list
    estimate: GreenEstimate = field(repr=False)

    def to_dict(self):
        return {"z": [self.z.real, self.z.imag], "label": self.label.value,
                "slope_B": self.slope_B, "slope_ell": self.slope_ell,
                "halving_growth": self.halving_growth, "green": self.estimate.to_dict()}


def halving_growth(est: GreenEstimate):
    """Norm growth factor per halving of eps between consecutive rungs."""
    nrm = est.norms()
    eps = np.array(est.eps)
    return [float((nrm[k + 1] / nrm[k]) ** (math.log(2) / math.log(eps[k] / eps[k + 1])))
            for k in range(len(eps) - 1)]


def classify_estimate(est: GreenEstimate, th: Thresholds = Thresholds()) -> PointReport:
    if len(est.eps) < 3:
        raise ValueError("classification needs at least three rungs")
    growth = halving_growth(est)
    b = np.abs(est.B.real)
    if np.all(np.array(growth) >= th.divergence_factor):
        return PointReport(est.z, Classification.DIVERGENT, None, None, growth, est)
    w = min(th.window, len(est.eps))
    if np.any(b[-w:] <= th.b_floor):
        return PointReport(est.z, Classification.UNRESOLVED, None, None, growth, est)
    le = np.log(np.array(est.eps[-w:]))
    slope = float(np.polyfit(le, np.log(b[-w:]), 1)[0])
    slope_ell = 1.0 - slope
    if abs(slope) <= th.interior_slope:
        label = Classification.INTERIOR
    elif th.exterior_slope <= slope <= th.max_slope:
        label = Classification.EXTERIOR
    elif th.interior_slope < slope < th.exterior_slope:
        label = Classification.BOUNDARY_LIKE
    else:
        label = Classification.UNRESOLVED
    return PointReport(est.z, label, slope, slope_ell, growth, est)


def classify_point(spec: EnsembleSpec, z, eps_ladder=DEFAULT_LADDER, th: Thresholds = Thresholds(),
                   matrices=None):
    """Classify ``z`` (or each of several points) from the eps trends."""
    ladder = _check_ladder(eps_ladder)
    if len(ladder) < 3:
        raise ValueError("ladder needs at least three rungs")
    est = estimate_green(spec, z, ladder, matrices=matrices)
    if isinstance(est, list):
        return [classify_estimate(e, th) for e in est]
    return classify_estimate(est, th)
