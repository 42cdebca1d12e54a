"""The quasi-Hamiltonian space M = (U x U)^g x C_1 x ... x C_l.

Momentum map, diagonal conjugation action, the involution beta, tangent
vectors, the 2-forms of the double and of conjugacy classes, their fused
total, and pointwise checks of the kernel and contraction axioms and of
beta^* omega = -omega.

Internally tangent vectors are handled as per-slot velocity batches of shape
(K, n, n), so a whole Gram matrix of omega is one vectorized evaluation.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import jet
from .config import DEFAULT
from .errors import (ConditioningWarning, IndeterminateError, PreconditionError,
                     SignatureError, ValidationError)
from .jet import Jet
from .liecore import (ClassSpec, check_unitary, circular_distance, dagger,
                      eigenphases, haar_sample, lie_basis, lie_coords,
                      random_in_class, random_skew, unitary_eig, wrap_angle)


@dataclass(frozen=True)
class SurfaceTuple:
    """(a_1, b_1, ..., a_g, b_g, c_1, ..., c_l) with c_j in the class specs[j]."""

    g: int
    l: int
    pairs: tuple
    classes: tuple
    specs: tuple
    group: str = "U"

    def __post_init__(self):
        if self.g < 0 or self.l < 0 or self.g + self.l < 1:
            raise SignatureError("need g, l >= 0 and g + l >= 1")
        pairs = tuple((np.asarray(a, complex), np.asarray(b, complex)) for a, b in self.pairs)
        classes = tuple(np.asarray(c, complex) for c in self.classes)
        if len(pairs) != self.g or len(classes) != self.l or len(self.specs) != self.l:
            raise ValidationError("tuple does not match its (g, l) signature")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "specs", tuple(self.specs))
        n = None
        for m in self.slots():
            check_unitary(m, self.group)
            if n is not None and m.shape[0] != n:
                raise ValidationError("all slots must share one dimension")
            n = m.shape[0]
        for j, (c, spec) in enumerate(zip(classes, self.specs)):
            if spec.n != n:
                raise ValidationError(f"class spec {j} has the wrong dimension")
            d = math.sqrt(circular_distance(eigenphases(c), spec.phases)[0])
            if d > DEFAULT.class_membership:
                raise ValidationError(f"c_{j + 1} is not in its class (distance {d:.2e})")

    @property
    def n(self):
        return self.slots()[0].shape[0]

    def slots(self):
        out = []
        for a, b in self.pairs:
            out += [a, b]
        return out + list(self.classes)

    @classmethod
    def from_slots(cls, g, l, slots, specs=None, group="U"):
        slots = list(slots)
        pairs = [(slots[2 * i], slots[2 * i + 1]) for i in range(g)]
        classes = slots[2 * g:]
        if specs is None:
            specs = [ClassSpec.of(c, group) for c in classes]
        return cls(g, l, tuple(pairs), tuple(classes), tuple(specs), group)

    def with_slots(self, slots):
        return SurfaceTuple.from_slots(self.g, self.l, slots, self.specs, self.group)


# -- slot-level maps, shared by arrays and jets -----------------------------------

def _commutator(a, b):
    return jet.mul(a, b, jet.inv(a), jet.inv(b))


def _times(x, y):
    if x is None:
        return y
    if y is None:
        return x
    return x @ y


def momentum_slots(slots, g, l):
    out = None
    for i in range(g):
        out = _times(out, _commutator(slots[2 * i], slots[2 * i + 1]))
    for j in range(l):
        out = _times(out, slots[2 * g + j])
    return out


def _twisted(suffix, y):
    """tau^-(P) y tau(P); conjugation of y by P^T."""
    if suffix is None:
        return y
    return jet.mul(jet.transpose(suffix), y, jet.conj(suffix))


def beta_slots(slots, g, l):
    out = [None] * (2 * g + l)
    suffix = None
    for j in reversed(range(l)):
        c = slots[2 * g + j]
        out[2 * g + j] = _twisted(suffix, jet.transpose(c))
        suffix = _times(c, suffix)
    for i in reversed(range(g)):
        a, b = slots[2 * i], slots[2 * i + 1]
        out[2 * i] = _twisted(suffix, jet.conj(b))
        out[2 * i + 1] = _twisted(suffix, jet.conj(a))
        suffix = _times(_commutator(a, b), suffix)
    return out


def momentum(x):
    return momentum_slots(x.slots(), x.g, x.l)


def act(u, x):
    u = check_unitary(u)
    ui = u.conj().T
    return x.with_slots([u @ s @ ui for s in x.slots()])


def beta_numeric(x):
    return x.with_slots(beta_slots(x.slots(), x.g, x.l))


# -- tangent vectors --------------------------------------------------------------

@dataclass(frozen=True)
class Tangent:
    """Tangent vector at ``base``: left-trivialized (xi, eta) per pair, so the
    velocity at a is a @ xi; a generator X per class, velocity X c - c X."""

    base: SurfaceTuple
    pair_vecs: tuple
    class_vecs: tuple

    def __post_init__(self):
        if len(self.pair_vecs) != self.base.g or len(self.class_vecs) != self.base.l:
            raise ValidationError("tangent does not match its base signature")

    def velocities(self):
        x = self.base
        out = []
        for (a, b), (xi, eta) in zip(x.pairs, self.pair_vecs):
            out += [a @ xi, b @ eta]
        for c, X in zip(x.classes, self.class_vecs):
            out.append(X @ c - c @ X)
        return out


def _batch(t):
    return [v[None] for v in t.velocities()]


def class_generators(c, delta, gap=1e-9):
    """Minimal-norm skew-Hermitian X with X c - c X = delta, for a batch of
    velocities ``delta`` (K, n, n) tangent to the class of c."""
    ph, V = unitary_eig(c)
    d = np.exp(1j * ph)
    diff = d[None, :] - d[:, None]          # d_m - d_k at [k, m]
    mask = np.abs(diff) > gap
    inv = np.where(mask, 1.0 / np.where(mask, diff, 1.0), 0.0)
    Xp = (dagger(V) @ delta @ V) * inv
    X = V @ Xp @ dagger(V)
    return 0.5 * (X - dagger(X))


def tangent_from_velocities(x, vels):
    """Inverse of :meth:`Tangent.velocities` (classes via minimal-norm generators)."""
    slots = x.slots()
    pv = []
    for i in range(x.g):
        xi = dagger(slots[2 * i]) @ vels[2 * i]
        eta = dagger(slots[2 * i + 1]) @ vels[2 * i + 1]
        pv.append((0.5 * (xi - dagger(xi)), 0.5 * (eta - dagger(eta))))
    cv = [class_generators(c, v[None])[0] for c, v in zip(x.classes, vels[2 * x.g:])]
    return Tangent(x, tuple(pv), tuple(cv))


def random_tangent(x, rng, scale=1.0):
    n = x.n
    pv = tuple((random_skew(n, rng, scale), random_skew(n, rng, scale)) for _ in range(x.g))
    cv = tuple(random_skew(n, rng, scale) for _ in range(x.l))
    return Tangent(x, pv, cv)


def fundamental_velocities(x, X):
    """Velocities of X^# at x for a batch X (K, n, n)."""
    return [X @ s - s @ X for s in x.slots()]


def class_tangent_basis(c, gap=1e-9):
    """Generators spanning T_c C: off-block elementary skew matrices in an
    eigenbasis of c, orthonormal for (.|.)"""
    ph, V = unitary_eig(c)
    n = len(ph)
    s = 1.0 / math.sqrt(2.0)
    gens = []
    for k in range(n):
        for m in range(k + 1, n):
            if abs(np.exp(1j * ph[k]) - np.exp(1j * ph[m])) <= gap:
                continue
            E = np.zeros((n, n), complex)
            E[k, m], E[m, k] = s, -s
            F = np.zeros((n, n), complex)
            F[k, m] = F[m, k] = 1j * s
            gens += [E, F]
    if not gens:
        return np.zeros((0, n, n), complex)
    gens = np.array(gens)
    return V @ gens @ dagger(V)


def tangent_basis(x):
    """Velocity batches spanning T_x M; returns (velocities per slot, dim)."""
    n = x.n
    B = lie_basis(n)
    blocks = []
    for s in x.slots()[:2 * x.g]:
        blocks.append(s @ B)
    for c in x.classes:
        G = class_tangent_basis(c)
        blocks.append(G @ c - c @ G)
    dim = sum(len(b) for b in blocks)
    out = []
    off = 0
    for blk in blocks:
        v = np.zeros((dim, n, n), complex)
        v[off:off + len(blk)] = blk
        out.append(v)
        off += len(blk)
    return out, dim


# -- 2-forms ----------------------------------------------------------------------

def _ip(A, B):
    """(A_i | B_j) = -Re tr(A_i B_j) for batches A (K1,n,n), B (K2,n,n)."""
    return -np.real(np.einsum("aij,bji->ab", A, B))


def _wedge(A1, B2, A2, B1):
    """(A(t1)|B(t2)) - (A(t2)|B(t1)) as a (K1, K2) matrix."""
    return _ip(A1, B2) - _ip(A2, B1).T


def _double_form(a, b, v1, w1, v2, w2):
    ai, bi = dagger(a), dagger(b)
    t1 = 0.5 * _wedge(ai @ v1, w2 @ bi, ai @ v2, w1 @ bi)
    t2 = 0.5 * _wedge(v1 @ ai, bi @ w2, v2 @ ai, bi @ w1)

    def part(a, b, v1, w1, v2, w2):
        ai, bi = dagger(a), dagger(b)
        return _ip(ai @ (bi @ w1) @ a + ai @ v1, bi @ w2 + bi @ (ai @ v2) @ b)

    t3 = 0.5 * (part(a, b, v1, w1, v2, w2) - part(b, a, w1, v1, w2, v2))
    return t1 + t2 + t3


def _class_form(c, X, Y):
    ci = dagger(c)
    return 0.5 * (_ip(c @ X @ ci, Y) - _ip(X, c @ Y @ ci))


def omega_double(a, b, t1, t2):
    """omega_D at (a, b) on left-trivialized pair tangents t = (xi, eta)."""
    (x1, e1), (x2, e2) = t1, t2
    val = _double_form(a, b, (a @ x1)[None], (b @ e1)[None], (a @ x2)[None], (b @ e2)[None])
    return float(val[0, 0])


def omega_class(c, X, Y):
    """omega_C at c on the velocities generated by X and Y."""
    return float(_class_form(c, np.asarray(X)[None], np.asarray(Y)[None])[0, 0])


def form_matrix(x, V1, V2):
    """Fused omega_x evaluated on velocity batches: (K1, K2) matrix.

    Right-associated fusion D_1 * (D_2 * (... * (C_1 * (... * C_l)))); the
    correction for each factor k is 1/2 (mu_k^* theta^L ^ mu_{>k}^* theta^R).
    """
    K1 = V1[0].shape[0]
    slots = x.slots()
    jets = [Jet(s, np.concatenate([p, q])) for s, p, q in zip(slots, V1, V2)]
    total = np.zeros((K1, V2[0].shape[0]))
    factors = []
    for i in range(x.g):
        a, b = jets[2 * i], jets[2 * i + 1]
        total += _double_form(a.val, b.val, a.tan[:K1], b.tan[:K1], a.tan[K1:], b.tan[K1:])
        factors.append(_commutator(a, b))
    for j in range(x.l):
        c = jets[2 * x.g + j]
        gens = class_generators(c.val, c.tan)
        total += _class_form(c.val, gens[:K1], gens[K1:])
        factors.append(c)
    suffix = None
    for f in reversed(factors):
        if suffix is not None:
            thL = dagger(f.val) @ f.tan
            thR = suffix.tan @ dagger(suffix.val)
            total += 0.5 * _wedge(thL[:K1], thR[K1:], thL[K1:], thR[:K1])
        suffix = _times(f, suffix)
    return total


def _check_base(x, *ts):
    for t in ts:
        if t.base is not x:
            same = (t.base.g == x.g and t.base.l == x.l and
                    all(np.array_equal(p, q) for p, q in zip(t.base.slots(), x.slots())))
            if not same:
                raise PreconditionError("tangent is based at a different point")


def omega_fused(x, t1, t2):
    _check_base(x, t1, t2)
    return float(form_matrix(x, _batch(t1), _batch(t2))[0, 0])


# -- beta pullback ------------------------------------------------------------------

def beta_differential(x, vels, mode="fd", h=1e-5):
    """Push velocity batches through d beta at x; returns per-slot batches at beta(x)."""
    slots = x.slots()
    if mode == "analytic":
        jets = [Jet(s, v) for s, v in zip(slots, vels)]
        return [j.tan for j in beta_slots(jets, x.g, x.l)]
    if mode != "fd":
        raise ValueError(f"unknown differential mode {mode!r}")
    if h < 1e-7:
        warnings.warn("finite-difference step is small relative to round-off", ConditioningWarning)
    K = vels[0].shape[0]
    out = [np.zeros((K,) + s.shape, complex) for s in slots]
    t = tangent_from_velocities_batch(x, vels)
    for k in range(K):
        plus, minus = [], []
        for idx, s in enumerate(slots):
            if idx < 2 * x.g:
                xi = t[idx][k]
                plus.append(s @ expm(h * xi))
                minus.append(s @ expm(-h * xi))
            else:
                X = t[idx][k]
                e, ei = expm(h * X), expm(-h * X)
                plus.append(e @ s @ ei)
                minus.append(ei @ s @ e)
        bp = beta_slots(plus, x.g, x.l)
        bm = beta_slots(minus, x.g, x.l)
        for idx in range(len(slots)):
            out[idx][k] = (bp[idx] - bm[idx]) / (2 * h)
    return out


def tangent_from_velocities_batch(x, vels):
    """Per-slot generators: left-trivialized for pairs, minimal-norm for classes."""
    slots = x.slots()
    out = []
    for idx, (s, v) in enumerate(zip(slots, vels)):
        if idx < 2 * x.g:
            xi = dagger(s) @ v
            out.append(0.5 * (xi - dagger(xi)))
        else:
            out.append(class_generators(s, v))
    return out


def beta_pullback_residual(x, t1, t2, mode="fd", h=1e-5):
    """|omega_{beta(x)}(d beta t1, d beta t2) + omega_x(t1, t2)|."""
    _check_base(x, t1, t2)
    V = [np.concatenate([p, q]) for p, q in zip(_batch(t1), _batch(t2))]
    W = beta_differential(x, V, mode=mode, h=h)
    bx = beta_numeric(x)
    wb = form_matrix(bx, [w[:1] for w in W], [w[1:] for w in W])[0, 0]
    wx = form_matrix(x, [v[:1] for v in V], [v[1:] for v in V])[0, 0]
    return abs(wb + wx)


# -- axioms ---------------------------------------------------------------------------

def _moment_velocities(x, vels):
    j = momentum_slots([Jet(s, v) for s, v in zip(x.slots(), vels)], x.g, x.l)
    return j.val, j.tan


def contraction_residuals(x, X):
    """|omega(X^#, t) - 1/2 (theta^L + theta^R | X)(d mu t)| over a basis t of
    T_x M, for a batch X (K, n, n); returns (K, dim) array."""
    T, dim = tangent_basis(x)
    lhs = form_matrix(x, fundamental_velocities(x, X), T)
    mu, dmu = _moment_velocities(x, T)
    mi = dagger(mu)
    rhs = 0.5 * _ip(X, mi @ dmu + dmu @ mi)
    return np.abs(lhs - rhs)


def check_axiom_contraction(x, X):
    X = np.asarray(X, complex)
    if not np.any(X):
        return 0.0
    return float(contraction_residuals(x, X[None]).max(initial=0.0))


@dataclass
class KernelReport:
    computed: int
    predicted: int
    verdict: str          # pass | fail | indeterminate
    dim: int
    singular_values: list
    gap_ratio: float      # smallest singular value kept / largest dropped (inf if none)

    def to_dict(self):
        return {"computed": self.computed, "predicted": self.predicted,
                "verdict": self.verdict, "dim": self.dim, "gap_ratio": self.gap_ratio}


def numerical_nullity(s, rel=DEFAULT.nullity, gap=DEFAULT.gap, total=None):
    """Count singular values below rel * max; ``None`` when one sits in the gap."""
    s = np.asarray(s)
    total = len(s) if total is None else total
    if len(s) == 0:
        return total, math.inf
    scale = max(float(s.max()), 1.0)
    small = s < rel * scale
    ambiguous = (s >= rel * scale) & (s < gap * scale)
    kept = s[~small]
    dropped = s[small]
    ratio = (kept.min() / dropped.max()) if len(kept) and len(dropped) and dropped.max() > 0 else math.inf
    if np.any(ambiguous):
        return None, float(ratio)
    return int(small.sum()) + (total - len(s)), float(ratio)


def check_axiom_kernel(x, rel=DEFAULT.nullity, gap=DEFAULT.gap):
    """Compare the nullity of omega_x with dim{X^# : (Ad mu(x) + 1) X = 0}."""
    T, dim = tangent_basis(x)
    if dim == 0:
        return KernelReport(0, 0, "pass", 0, [], math.inf)
    G = form_matrix(x, T, T)
    s = np.linalg.svd(G, compute_uv=False)
    computed, ratio = numerical_nullity(s, rel, gap)

    n = x.n
    B = lie_basis(n)
    mu = momentum(x)
    adm = lie_coords(mu @ B @ dagger(mu), B).T     # column f = Ad mu (E_f)
    _, sv, vt = np.linalg.svd(adm + np.eye(len(B)))
    null = vt[sv < 1e-8 * max(1.0, sv.max())]
    if len(null):
        Xs = np.tensordot(null, B, 1)
        vel = np.concatenate([v.reshape(len(Xs), -1) for v in fundamental_velocities(x, Xs)], axis=1)
        sv2 = np.linalg.svd(np.concatenate([vel.real, vel.imag], axis=1), compute_uv=False)
        predicted = int((sv2 > 1e-8 * max(1.0, sv2.max())).sum())
    else:
        predicted = 0
    if computed is None:
        verdict = "indeterminate"
        computed = -1
    else:
        verdict = "pass" if computed == predicted else "fail"
    return KernelReport(computed, predicted, verdict, dim, s.tolist(), ratio)


# -- sampling ---------------------------------------------------------------------------

def random_specs(n, l, rng, group="U"):
    specs = []
    for _ in range(l):
        ph = rng.uniform(0, 2 * math.pi, n)
        if group == "SU":
            ph[-1] = -ph[:-1].sum()
        specs.append(ClassSpec(tuple(ph), group))
    return specs


def random_tuple(n, g, l, rng, specs=None, group="U"):
    """A random point of M (mu(x) is generally not the identity)."""
    specs = list(specs) if specs is not None else random_specs(n, l, rng, group)
    slots = []
    for _ in range(2 * g):
        u = haar_sample(n, rng)
        if group == "SU":
            u = u * np.linalg.det(u) ** (-1.0 / n)
        slots.append(u)
    slots += [random_in_class(s, rng) for s in specs]
    return SurfaceTuple.from_slots(g, l, slots, specs, group)


def diagonal_fixed_tuple(n, g, l, rng, specs=None):
    """(r_1, tau(r_1), ..., r_g, tau(r_g), t_1, ..., t_l) in the diagonal torus."""
    specs = list(specs) if specs is not None else random_specs(n, l, rng)
    slots = []
    for _ in range(g):
        r = np.diag(np.exp(1j * rng.uniform(0, 2 * math.pi, n)))
        slots += [r, r.conj()]
    slots += [s.diagonal() for s in specs]
    return SurfaceTuple.from_slots(g, l, slots, specs)


def max_slot_distance(x, y):
    return max(float(np.linalg.norm(p - q)) for p, q in zip(x.slots(), y.slots()))


def beta_residuals(x, u):
    """Residuals of beta^2 = id, beta(u.x) = tau(u).beta(x), mu(beta(x)) = mu(x)^T
    and of class preservation, at one point x and one group element u."""
    from .liecore import class_distance

    bx = beta_numeric(x)
    inv = max_slot_distance(beta_numeric(bx), x)
    eq = max_slot_distance(beta_numeric(act(u, x)), act(u.conj(), bx))
    mom = float(np.linalg.norm(momentum(bx) - momentum(x).T))
    cls = max([math.sqrt(class_distance(c, s)) for c, s in zip(bx.classes, x.specs)],
              default=0.0)
    return {"involution": inv, "equivariance": eq, "momentum": mom, "classes": cls}


__all__ = [
    "SurfaceTuple", "Tangent", "momentum", "act", "beta_numeric", "omega_double",
    "omega_class", "omega_fused", "beta_pullback_residual", "check_axiom_kernel",
    "check_axiom_contraction", "random_tuple", "random_tangent", "diagonal_fixed_tuple",
    "tangent_basis", "form_matrix", "class_generators", "wrap_angle",
]
