"""Numerics on U(n) and SU(n): the involution tau, symmetric elements,
conjugacy classes, Haar sampling, the Takagi square root and alcove points.

Unitary matrices are plain complex ``numpy`` arrays. Functions that take a
"Unitary" validate it with :func:`check_unitary`.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, schur

from .config import DEFAULT
from .errors import (ConditioningWarning, FactorizationError,
                     PreconditionError, UnsupportedGroupError,
                     ValidationError)

TWO_PI = 2.0 * math.pi


def check_unitary(u, group="U", tol=DEFAULT.validation):
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {u.shape}")
    n = u.shape[0]
    res = np.linalg.norm(u.conj().T @ u - np.eye(n))
    if res > tol:
        raise ValidationError(f"matrix is not unitary (residual {res:.3e} > {tol:.1e})")
    if group == "SU":
        d = abs(np.linalg.det(u) - 1.0)
        if d > tol:
            raise ValidationError(f"determinant differs from 1 by {d:.3e}")
    elif group != "U":
        raise UnsupportedGroupError(f"unknown group tag {group!r}")
    return u


def check_skew(X, special=False, tol=DEFAULT.identity):
    X = np.asarray(X, dtype=complex)
    res = np.linalg.norm(X + X.conj().T)
    if res > tol:
        raise ValidationError(f"matrix is not skew-Hermitian (residual {res:.3e})")
    if special and abs(np.trace(X)) > tol:
        raise ValidationError("trace of su(n) element is not zero")
    return X


def dagger(u):
    return np.swapaxes(u, -1, -2).conj()


def tau(u):
    """Entrywise complex conjugation."""
    return check_unitary(u).conj()


def tau_minus(u):
    """tau(u^-1), which for a unitary matrix is its transpose."""
    return check_unitary(u).T.copy()


def is_symmetric(u, tol=DEFAULT.symmetric):
    u = np.asarray(u)
    return bool(np.linalg.norm(u.T - u) <= tol)


def inner(X, Y):
    """Ad-invariant scalar product (X|Y) = -Re tr(XY) on u(n)."""
    return -float(np.real(np.trace(X @ Y)))


def ad(u, X):
    return u @ X @ u.conj().T


def commutator(a, b):
    """Group commutator a b a^-1 b^-1."""
    return a @ b @ a.conj().T @ b.conj().T


def skew_part(M):
    return 0.5 * (M - dagger(M))


def lie_basis(n):
    """Orthonormal basis of u(n) for <X, Y> = Re tr(X^H Y), shape (n*n, n, n).

    The same vectors are orthonormal for (X|Y) = -Re tr(XY).
    """
    basis = []
    for k in range(n):
        E = np.zeros((n, n), complex)
        E[k, k] = 1j
        basis.append(E)
    s = 1.0 / math.sqrt(2.0)
    for k in range(n):
        for m in range(k + 1, n):
            E = np.zeros((n, n), complex)
            E[k, m], E[m, k] = s, -s
            basis.append(E)
            F = np.zeros((n, n), complex)
            F[k, m] = F[m, k] = 1j * s
            basis.append(F)
    return np.array(basis)


def lie_coords(X, basis):
    """Coordinates of skew-Hermitian X (shape (..., n, n)) in an orthonormal basis."""
    return np.real(np.einsum("eij,...ij->...e", basis.conj(), X))


# -- conjugacy classes -----------------------------------------------------

def wrap_angle(x):
    """Map angles to (-pi, pi]."""
    y = np.mod(np.asarray(x, float) + math.pi, TWO_PI) - math.pi
    return np.where(y == -math.pi, math.pi, y)


@dataclass(frozen=True)
class ClassSpec:
    """A conjugacy class of U(n) or SU(n), given by its n eigenphases."""

    phases: tuple
    group: str = "U"

    def __post_init__(self):
        ph = np.mod(np.asarray(self.phases, float).ravel(), TWO_PI)
        ph = np.where(np.isclose(ph, TWO_PI, atol=1e-14, rtol=0), 0.0, ph)
        object.__setattr__(self, "phases", tuple(sorted(ph.tolist(), reverse=True)))
        if self.group not in ("U", "SU"):
            raise UnsupportedGroupError(f"unknown group tag {self.group!r}")
        if not self.phases:
            raise ValidationError("a class needs at least one phase")
        if self.group == "SU":
            s = abs(wrap_angle(sum(self.phases)))
            if s > DEFAULT.validation:
                raise ValidationError(f"SU(n) class phases sum to {s:.3e} mod 2pi")

    @property
    def n(self):
        return len(self.phases)

    def diagonal(self):
        return np.diag(np.exp(1j * np.array(self.phases)))

    @classmethod
    def of(cls, u, group="U"):
        return cls(tuple(eigenphases(u)), group)

    @classmethod
    def su2(cls, theta):
        return cls((theta, -theta), "SU")


def eigenphases(u):
    """Eigenphases of a unitary matrix in [0, 2pi), sorted ascending."""
    ev = np.linalg.eigvals(np.asarray(u))
    return np.sort(np.mod(np.angle(ev), TWO_PI))


def unitary_eig(u):
    """u = V diag(exp(i*phases)) V^H with V unitary (complex Schur form)."""
    T, V = schur(np.asarray(u, complex), output="complex")
    ph = np.mod(np.angle(np.diag(T)), TWO_PI)
    return ph, V


def circular_distance(p, q):
    """Squared l2 distance between two phase multisets, optimally cyclically aligned.

    Returns (distance, shift, order) where ``order`` sorts ``p`` ascending and
    ``p[order][k]`` is matched with ``sorted(q)[(k + shift) % n]``. Ties go to
    the lowest shift.
    """
    p = np.mod(np.asarray(p, float), TWO_PI)
    q = np.sort(np.mod(np.asarray(q, float), TWO_PI))
    order = np.argsort(p, kind="stable")
    ps = p[order]
    n = len(ps)
    best = (math.inf, 0)
    for s in range(n):
        d = float(np.sum(wrap_angle(ps - np.roll(q, -s)) ** 2))
        if d < best[0] - 1e-15:
            best = (d, s)
    return best[0], best[1], order


def class_distance(u, spec):
    return circular_distance(eigenphases(u), spec.phases)[0]


def in_class(u, spec, tol=DEFAULT.class_membership):
    return math.sqrt(class_distance(u, spec)) <= tol


def project_to_class(u, spec, gap_tol=1e-8):
    """Replace the eigenphases of u by those of ``spec``, keeping eigenvectors."""
    u = check_unitary(u)
    if spec.n != u.shape[0]:
        raise ValidationError("class dimension does not match matrix")
    ph, V = unitary_eig(u)
    _, shift, order = circular_distance(ph, spec.phases)
    q = np.sort(np.array(spec.phases))
    target = np.empty_like(ph)
    target[order] = np.roll(q, -shift)
    # eigenvalues that nearly coincide but go to different targets make the
    # result depend on an ill-conditioned eigenbasis
    for i in range(len(ph)):
        for j in range(i + 1, len(ph)):
            close = abs(wrap_angle(ph[i] - ph[j])) < gap_tol
            if close and abs(wrap_angle(target[i] - target[j])) > gap_tol:
                warnings.warn("project_to_class: degenerate eigenbasis", ConditioningWarning)
    out = (V * np.exp(1j * target)) @ V.conj().T
    return out


def haar_sample(n, rng):
    """Haar-random element of U(n); ``rng`` is a numpy Generator."""
    if n < 1:
        raise ValidationError("dimension must be positive")
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_sample_su(n, rng):
    u = haar_sample(n, rng)
    det = np.linalg.det(u)
    return u * det ** (-1.0 / n)


def random_skew(n, rng, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (a - a.conj().T)


def random_real_symmetric(n, rng, scale=1.0):
    a = rng.standard_normal((n, n))
    return scale * 0.5 * (a + a.T)


def random_symmetric_unitary(n, rng, scale=1.0):
    """exp(iS) with S random real symmetric."""
    return expm(1j * random_real_symmetric(n, rng, scale))


def random_in_class(spec, rng):
    k = haar_sample(spec.n, rng)
    return k @ spec.diagonal() @ k.conj().T


# -- Takagi square root -----------------------------------------------------

# angles used to mix Re(w) and Im(w); several so that an accidental
# eigenvalue coincidence for one of them is recovered by another
_MIX_ANGLES = (0.7853981633974483 * 0.6180339887, 1.1319, 2.4971, 0.31831)


def symmetric_eig(w, tol=DEFAULT.factorization):
    """w = O diag(exp(i*lam)) O^T for a symmetric unitary w, O real orthogonal.

    Re(w) and Im(w) are commuting real symmetric matrices, so a generic real
    combination of them is diagonalized by a common orthogonal O.
    """
    w = np.asarray(w, complex)
    R, I = w.real, w.imag
    R = 0.5 * (R + R.T)
    I = 0.5 * (I + I.T)
    best = None
    for phi in _MIX_ANGLES:
        _, O = np.linalg.eigh(math.cos(phi) * R + math.sin(phi) * I)
        D = O.T @ w @ O
        off = np.linalg.norm(D - np.diag(np.diag(D)))
        if best is None or off < best[0]:
            best = (off, O, np.diag(D))
        if off <= 1e-13:
            break
    off, O, d = best
    if off > tol:
        raise FactorizationError(f"orthogonal diagonalization residual {off:.3e}")
    lam = np.mod(np.angle(d), TWO_PI)
    return lam, O


def takagi_sqrt(w, tol=DEFAULT.factorization):
    """Symmetric unitary A with A^T A = A^2 = w, half-angles taken in [0, pi)."""
    w = check_unitary(w)
    if not is_symmetric(w, tol):
        raise PreconditionError("takagi_sqrt needs a symmetric unitary matrix")
    lam, O = symmetric_eig(w, tol)
    A = (O * np.exp(0.5j * lam)) @ O.T
    res = np.linalg.norm(A.T @ A - w)
    if res > tol:
        raise FactorizationError(f"takagi residual {res:.3e} > {tol:.1e}")
    return A


# -- alcove ------------------------------------------------------------------

@dataclass(frozen=True)
class AlcovePoint:
    """Canonical SU(n) class representative: theta_1 >= ... >= theta_n,
    sum zero, theta_1 - theta_n <= 2 pi."""

    phases: tuple
    normalization: str = "SU"

    @property
    def angle(self):
        """The SU(2) alcove coordinate theta in [0, pi]."""
        return self.phases[0]


def alcove_project(u, tol=DEFAULT.validation):
    u = np.asarray(u, complex)
    try:
        check_unitary(u, "SU", tol=max(tol, 1e-9))
    except ValidationError as exc:
        raise UnsupportedGroupError(f"alcove_project needs an SU(n) element: {exc}") from None
    n = u.shape[0]
    p = eigenphases(u)
    m = int(round(p.sum() / TWO_PI))
    r = (-m) % n
    q = -(m + r) // n
    lift = p.copy()
    lift[:r] += TWO_PI
    lift += TWO_PI * q
    lift = np.sort(lift)[::-1]
    lift -= lift.mean()  # removes round-off left in the sum
    return AlcovePoint(tuple(float(v) for v in lift))


def su2_angle(u):
    """Alcove angle of an SU(2) matrix from its trace, exact at the ends."""
    t = np.real(np.trace(u)) / 2.0
    return math.acos(min(1.0, max(-1.0, t)))
