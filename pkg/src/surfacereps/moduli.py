"""Exploring mu^-1(1) and Fix(beta): representation finders, isotropy, and
the SU(2) momentum-polytope sampler.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT
from .decomp import Witness, decomposable_chain, _gauge_to_fixed_point
from .errors import IndeterminateError, SignatureError, UnsupportedGroupError, ValidationError
from .liecore import dagger, lie_basis
from .optim import FinderConfig, haar_init, matrix_residual, minimize, spectral_residual, stack
from .qham import SurfaceTuple, beta_numeric, momentum, numerical_nullity


def _signature(specs, g, n):
    specs = list(specs)
    if specs:
        n = specs[0].n
        if any(s.n != n for s in specs):
            raise ValidationError("class specs have different dimensions")
        groups = {s.group for s in specs}
        if len(groups) > 1:
            raise ValidationError("class specs mix group tags")
        group = groups.pop()
    else:
        group = "U"
    if n is None:
        raise ValidationError("dimension needed when no class specs are given")
    if g < 0 or g + len(specs) < 1:
        raise SignatureError("need g >= 0 and g + l >= 1")
    return specs, n, group


def _su_normalize(a):
    n = a.shape[0]
    return a * np.linalg.det(a) ** (-1.0 / n)


# -- unconstrained finder -----------------------------------------------------------------

def representation_residual(specs, g):
    """Residual mu - 1 over params (a_1, b_1, ..., k_1, ..., k_l), c_j = k_j d_j k_j^-1."""
    ds = [s.diagonal() for s in specs]
    n = ds[0].shape[0] if ds else None

    def residual(js):
        slots = list(js[:2 * g]) + [k @ d @ k.inv() for k, d in zip(js[2 * g:], ds)]
        mu = None
        for i in range(g):
            a, b = slots[2 * i], slots[2 * i + 1]
            comm = a @ b @ a.inv() @ b.inv()
            mu = comm if mu is None else mu @ comm
        for c in slots[2 * g:]:
            mu = c if mu is None else mu @ c
        return matrix_residual(mu, np.eye(mu.val.shape[0]))
    return residual


def find_representation(specs, g, cfg=None, n=None):
    """x in mu^-1(1) with c_j in the given classes, or None after all restarts."""
    cfg = cfg or FinderConfig()
    specs, n, group = _signature(specs, g, n)
    P = 2 * g + len(specs)
    res = minimize(representation_residual(specs, g), haar_init(n, P), cfg, P, n)
    if not res.success:
        return None
    p = res.params
    pairs = []
    for i in range(g):
        a, b = p[2 * i], p[2 * i + 1]
        if group == "SU":
            a, b = _su_normalize(a), _su_normalize(b)
        pairs.append((a, b))
    classes = [k @ s.diagonal() @ dagger(k) for k, s in zip(p[2 * g:], specs)]
    return SurfaceTuple(g, len(specs), tuple(pairs), tuple(classes), tuple(specs), group)


# -- beta-fixed finder ------------------------------------------------------------------------

def beta_fixed_residual(specs, g):
    """Residual over params (a_1..a_g, k_1..k_l) with w_j = k_j^T k_j.

    Spectral mismatch of each c_j built by the decomposable chain; for l = 0
    the closing condition v_1 - 1.
    """
    specs = list(specs)
    l = len(specs)

    def residual(js):
        a_list = list(js[:g])
        w_list = [k.T @ k for k in js[g:]]
        pairs, classes, vs = decomposable_chain(a_list, w_list)
        if l == 0:
            return matrix_residual(vs[0], np.eye(vs[0].val.shape[0]))
        return stack([spectral_residual(c, s.phases) for c, s in zip(classes, specs)])
    return residual


def _chain_from_params(p, g, l):
    a_list = list(p[:g])
    w_list = [k.T @ k for k in p[g:]]
    return a_list, w_list


def find_beta_fixed_representation(specs, g, cfg=None, n=None, with_witness=False):
    """x in Fix(beta) and mu^-1(1) with c_j in the given classes, or None."""
    cfg = cfg or FinderConfig()
    specs, n, group = _signature(specs, g, n)
    l = len(specs)
    P = g + l
    res = minimize(beta_fixed_residual(specs, g), haar_init(n, P), cfg, P, n)
    if not res.success:
        return None
    a_list, w_list = _chain_from_params(res.params, g, l)
    if group == "SU":
        a_list = [_su_normalize(a) for a in a_list]
    pairs, classes, vs = decomposable_chain(a_list, w_list)
    x = SurfaceTuple(g, l, tuple(pairs), tuple(classes), tuple(specs), group)
    start = vs[0] if g else w_list[0]
    wit = Witness(tuple(vs), tuple(w_list), dagger(start))
    x, wit = _gauge_to_fixed_point(x, wit)
    return (x, wit) if with_witness else x


@dataclass
class Certificates:
    classes: list            # per-slot class distances
    momentum: float          # |mu(x) - 1|
    beta: float              # |beta(x) - x|, max over slots

    def max(self):
        return max([self.momentum, self.beta] + list(self.classes))

    def to_dict(self):
        return {"classes": self.classes, "momentum": self.momentum, "beta": self.beta}


def certify(x):
    from .liecore import class_distance

    cls = [math.sqrt(class_distance(c, s)) for c, s in zip(x.classes, x.specs)]
    mu = float(np.linalg.norm(momentum(x) - np.eye(x.n)))
    b = max(float(np.linalg.norm(p - q)) for p, q in zip(beta_numeric(x).slots(), x.slots()))
    return Certificates(cls, mu, b)


# -- isotropy ---------------------------------------------------------------------------------

def isotropy_dimension(x, rel=DEFAULT.nullity, gap=DEFAULT.gap):
    """dim of {X in u(n) : [X, s] = 0 for every slot s}."""
    n = x.n
    B = lie_basis(n)
    cols = []
    for s in x.slots():
        C = B @ s - s @ B
        cols.append(C.reshape(len(B), -1))
    M = np.concatenate(cols, axis=1)
    M = np.concatenate([M.real, M.imag], axis=1)
    sv = np.linalg.svd(M, compute_uv=False)
    dim, _ = numerical_nullity(sv, rel, gap, total=len(B))
    if dim is None:
        raise IndeterminateError("isotropy nullity falls in the ambiguous spectrum gap")
    return dim


def is_irreducible(x):
    centre = 0 if x.group == "SU" else 1
    return isotropy_dimension(x) == centre


# -- SU(2) polytope sampling --------------------------------------------------------------------

@dataclass
class PolytopeSample:
    angles: np.ndarray
    source: str
    metadata: dict = field(default_factory=dict)

    @property
    def alcove_points(self):
        from .liecore import AlcovePoint
        return [AlcovePoint((float(t), -float(t))) for t in self.angles]

    def hull(self):
        return float(self.angles.min()), float(self.angles.max())


def _su2_thetas(specs):
    out = []
    for s in specs:
        if s.group != "SU" or s.n != 2:
            raise UnsupportedGroupError("polytope sampling is implemented for SU(2) only")
        t = s.phases[0]
        out.append(min(t, 2 * math.pi - t))
    return np.array(out)


def haar_su2_batch(rng, k):
    q = rng.standard_normal((k, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    a = q[:, 0] + 1j * q[:, 1]
    b = q[:, 2] + 1j * q[:, 3]
    U = np.empty((k, 2, 2), complex)
    U[:, 0, 0], U[:, 0, 1] = a, -b.conj()
    U[:, 1, 0], U[:, 1, 1] = b, a.conj()
    return U


def _diag_batch(theta, k):
    D = np.zeros((k, 2, 2), complex)
    D[:, 0, 0] = np.exp(1j * theta)
    D[:, 1, 1] = np.exp(-1j * theta)
    return D


def _angles(M):
    t = np.real(M[:, 0, 0] + M[:, 1, 1]) / 2
    return np.arccos(np.clip(t, -1.0, 1.0))


def _rot(phi):
    c, s = np.cos(phi), np.sin(phi)
    R = np.empty(phi.shape + (2, 2))
    R[..., 0, 0], R[..., 0, 1] = c, -s
    R[..., 1, 0], R[..., 1, 1] = s, c
    return R


def _sym_su2(phi, psi):
    """R(phi) diag(e^{i psi}, e^{-i psi}) R(phi)^T, batched."""
    R = _rot(phi).astype(complex)
    D = _diag_batch(psi, len(psi))
    return R @ D @ np.swapaxes(R, -1, -2)


def _full_space_batch(thetas, rng, k):
    M = None
    for t in thetas:
        U = haar_su2_batch(rng, k)
        C = U @ _diag_batch(np.full(k, t), k) @ dagger(U)
        M = C if M is None else M @ C
    return _angles(M)


def _beta_fixed_batch(thetas, rng, k):
    """Symmetric chains w_m, ..., w_1 with c_j = w_j w_{j+1}^-1, w_{m+1} = 1.

    Each step draws the class angle psi of w_j uniformly and solves for the
    rotation phi: Re tr(w_j w_{j+1}^-1)/2 = A + B cos 2phi + C sin 2phi,
    evaluated from three values of phi. Draws with no solution are rejected.
    """
    m = len(thetas)
    w = _sym_su2(rng.uniform(0, math.pi, k), np.full(k, thetas[-1]))
    ok = np.ones(k, bool)
    for j in reversed(range(m - 1)):
        if math.sin(thetas[j]) < 1e-12:
            w = math.cos(thetas[j]) * w       # central class: c_j = +-1
            continue
        psi = rng.uniform(0, math.pi, k)
        winv = dagger(w)
        f = [np.real(np.trace(_sym_su2(np.full(k, p), psi) @ winv, axis1=1, axis2=2)) / 2
             for p in (0.0, math.pi / 4, math.pi / 2)]
        A = (f[0] + f[2]) / 2
        Bc = (f[0] - f[2]) / 2
        Cs = f[1] - A
        rho = np.hypot(Bc, Cs)
        target = math.cos(thetas[j])
        ratio = np.divide(target - A, rho, out=np.full(k, 2.0), where=rho > 1e-15)
        ok &= np.abs(ratio) <= 1.0
        alpha = np.arctan2(Cs, Bc)
        sign = np.where(rng.random(k) < 0.5, 1.0, -1.0)
        phi = 0.5 * (alpha + sign * np.arccos(np.clip(ratio, -1.0, 1.0)))
        w = _sym_su2(phi, psi)
    return _angles(w)[ok]


def polytope_sample(specs, count, seed, source="full", batch=50000, max_draws=None):
    """Alcove angles of mu = c_1 ... c_m over C_1 x ... x C_m (SU(2)).

    ``specs`` are the classes of the factors; the cloud describes which final
    class C_{m+1} admits a solution of c_1 ... c_{m+1} = 1.
    """
    specs = list(specs)
    if not specs:
        raise SignatureError("need at least one class")
    thetas = _su2_thetas(specs)
    rng = np.random.default_rng(seed)
    if source not in ("full", "beta"):
        raise ValueError(f"unknown source {source!r}")
    max_draws = max_draws or 200 * count
    out, drawn = [], 0
    have = 0
    while have < count and drawn < max_draws:
        k = min(batch, max(count - have, 1000)) if source == "full" else batch
        pts = (_full_space_batch if source == "full" else _beta_fixed_batch)(thetas, rng, k)
        drawn += k
        out.append(pts)
        have += len(pts)
    angles = np.concatenate(out)[:count] if out else np.zeros(0)
    meta = {"count": int(len(angles)), "draws": int(drawn), "seed": int(seed),
            "signature": {"g": 0, "factors": len(specs)},
            "thetas": [float(t) for t in thetas], "source": source}
    return PolytopeSample(angles, "full-space" if source == "full" else "beta-fixed", meta)


def hausdorff_interval(p, q):
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


# -- SU(2) oracle ----------------------------------------------------------------------------------

def su2_product_interval(t1, t2):
    """Attainable alcove angles of c_1 c_2 for SU(2) classes t1, t2 in [0, pi]."""
    return abs(t1 - t2), min(t1 + t2, 2 * math.pi - t1 - t2)


def su2_oracle_interval(t1, t2, draws, rng, chunk=200000):
    """Brute-force range of the angle of c_1 k c_2 k^-1 over Haar k."""
    lo, hi = math.inf, -math.inf
    D1 = _diag_batch(np.full(1, t1), 1)[0]
    left = draws
    while left > 0:
        k = min(chunk, left)
        U = haar_su2_batch(rng, k)
        C2 = U @ _diag_batch(np.full(k, t2), k) @ dagger(U)
        a = _angles(D1 @ C2)
        lo, hi = min(lo, float(a.min())), max(hi, float(a.max()))
        left -= k
    return lo, hi
