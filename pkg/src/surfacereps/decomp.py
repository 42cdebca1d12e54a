"""Decomposable representations: witnesses, the phi-solver, and samplers.

A witness for x = (a_1, b_1, ..., c_l) is a list of symmetric unitaries
v_1..v_g, w_1..w_l with [a_i, b_i] = v_i v_{i+1}^-1 (v_{g+1} = w_1),
c_j = w_j w_{j+1}^-1 (w_{l+1} = v_1) and conj(a_i) = v_{i+1}^-1 b_i v_{i+1}.
Such an x satisfies beta(x) = v_1^-1 . x, and conversely any phi with
beta(x) = phi . x produces a witness.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import jet
from .config import DEFAULT
from .errors import (CharacterizationError, NoSolutionFound, NotARepresentationError,
                     PreconditionError, SignatureError)
from .liecore import (check_unitary, dagger, haar_sample, is_symmetric,
                      random_symmetric_unitary, unitary_eig)
from .qham import SurfaceTuple, act, beta_numeric, momentum


@dataclass(frozen=True)
class Witness:
    vs: tuple
    ws: tuple
    phi: np.ndarray

    def entries(self):
        return list(self.vs) + list(self.ws)

    @property
    def chain_start(self):
        """v_1, or w_1 when g = 0."""
        return self.vs[0] if self.vs else self.ws[0]


@dataclass
class WitnessReport:
    symmetry: float          # (i)
    chain: float             # (ii)
    twist: float             # (iii)
    phi_gauge: float         # |phi - v_1^-1|, informational
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = max(self.symmetry, self.chain, self.twist) <= self.tol

    def to_dict(self):
        return {"symmetry": self.symmetry, "chain": self.chain, "twist": self.twist,
                "phi_gauge": self.phi_gauge, "tol": self.tol,
                "verdict": "pass" if self.passed else "fail"}


def _require_representation(x, tol):
    res = float(np.linalg.norm(momentum(x) - np.eye(x.n)))
    if res > tol:
        raise NotARepresentationError(f"mu(x) differs from the identity by {res:.3e}")
    return res


def check_witness(x, wit, tol=DEFAULT.representation):
    _require_representation(x, tol)
    g, l = x.g, x.l
    if len(wit.vs) != g or len(wit.ws) != l:
        raise SignatureError("witness does not match the tuple signature")
    ents = wit.entries()
    sym = max(float(np.linalg.norm(e - e.T)) for e in ents)
    nxt = ents[1:] + ents[:1]      # cyclic successor: v_g -> w_1, w_l -> v_1
    chain_res = 0.0
    for i, (a, b) in enumerate(x.pairs):
        comm = a @ b @ dagger(a) @ dagger(b)
        chain_res = max(chain_res, float(np.linalg.norm(comm - ents[i] @ dagger(nxt[i]))))
    for j, c in enumerate(x.classes):
        k = g + j
        chain_res = max(chain_res, float(np.linalg.norm(c - ents[k] @ dagger(nxt[k]))))
    twist = 0.0
    for i, (a, b) in enumerate(x.pairs):
        v = nxt[i]
        twist = max(twist, float(np.linalg.norm(a.conj() - dagger(v) @ b @ v)))
    gauge = float(np.linalg.norm(wit.phi - dagger(wit.chain_start)))
    return WitnessReport(sym, chain_res, twist, gauge, tol)


def beta_orbit_residual(x, phi):
    """max_k |beta(x)_k - phi x_k phi^-1|."""
    pi = dagger(phi)
    return max(float(np.linalg.norm(b - phi @ s @ pi))
               for b, s in zip(beta_numeric(x).slots(), x.slots()))


def suffix_products(x):
    """S_k = x-factor product from factor k on: [a_i,b_i]...[a_g,b_g] c_1...c_l."""
    facs = [a @ b @ dagger(a) @ dagger(b) for a, b in x.pairs] + list(x.classes)
    out = [None] * len(facs)
    acc = np.eye(x.n, dtype=complex)
    for k in reversed(range(len(facs))):
        acc = facs[k] @ acc
        out[k] = acc
    return out


def witness_from_phi(x, phi, tol=DEFAULT.representation):
    phi = check_unitary(phi)
    _require_representation(x, tol)
    if not is_symmetric(phi, tol):
        raise PreconditionError("phi must be symmetric")
    res = beta_orbit_residual(x, phi)
    if res > tol:
        raise CharacterizationError(f"beta(x) is not phi.x (residual {res:.3e})")
    pinv = dagger(phi)
    S = [s @ pinv for s in suffix_products(x)]
    return Witness(tuple(S[:x.g]), tuple(S[x.g:]), phi)


def transform_witness(u, wit):
    """Witness of act(u, x): entries w -> u w u^T, phi -> conj(u) phi conj(u)^T."""
    u = check_unitary(u)
    ub = u.conj()
    return Witness(tuple(u @ v @ u.T for v in wit.vs), tuple(u @ w @ u.T for w in wit.ws),
                   ub @ wit.phi @ ub.T)


# -- phi solver -----------------------------------------------------------------------

@dataclass
class PhiResult:
    phi: np.ndarray
    residual: float          # max_k |beta_k - phi x_k phi^-1|
    symmetry: float
    generic: bool
    reference_slot: int


def _matched_eig(u, ref_vals):
    """Eigenvectors of u ordered to match eigenvalues ref_vals; mismatch distance."""
    ph, W = unitary_eig(u)
    vals = np.exp(1j * ph)
    order = []
    free = list(range(len(vals)))
    for r in ref_vals:
        k = min(free, key=lambda m: abs(vals[m] - r))
        order.append(k)
        free.remove(k)
    return W[:, order], float(np.max(np.abs(vals[order] - ref_vals)))


def _min_gap(vals):
    n = len(vals)
    if n == 1:
        return math.inf
    return min(abs(vals[p] - vals[q]) for p in range(n) for q in range(p + 1, n))


def _phi_torus(x, bx, gap_tol):
    """Fit phi = W diag(d) V^* on the intertwiner torus of one reference slot.

    Returns (slot, phi, conclusive). ``conclusive`` with phi None means no
    intertwiner exists; not conclusive means the torus route does not apply
    (degenerate reference spectrum or a reducible tuple).
    """
    slots, bslots = x.slots(), bx.slots()
    best = None
    for k in reversed(range(len(slots))):
        ph, V = unitary_eig(slots[k])
        vals = np.exp(1j * ph)
        gap = _min_gap(vals)
        if best is None or gap > best[0] + 1e-12:
            best = (gap, k, V, vals)
    gap, k, V, vals = best
    if gap < gap_tol:
        return k, None, False
    W, mism = _matched_eig(bslots[k], vals)
    if mism > 1e-6:
        return k, None, True        # spectra differ: beta(x) is not conjugate to x
    n = x.n
    rows = []
    for s, b in zip(slots, bslots):
        Bk = dagger(W) @ b @ W
        Xk = dagger(V) @ s @ V
        # (B_k)_{pq} d_q - d_p (X_k)_{pq} = 0 as a linear map on d
        M = np.zeros((n, n, n), complex)
        idx = np.arange(n)
        M[:, idx, idx] += Bk
        M[idx, :, idx] -= Xk
        rows.append(M.reshape(n * n, n))
    A = np.concatenate(rows)
    _, sv, vh = np.linalg.svd(A)
    scale = max(1.0, float(sv[0]))
    if sv[-1] > 1e-6 * scale:
        return k, None, True
    if n > 1 and sv[-2] <= 1e-6 * scale:
        return k, None, False       # several intertwiners: reducible tuple
    d = vh[-1].conj()
    if np.min(np.abs(d)) < 1e-8:
        return k, None, True
    d = d / np.abs(d)
    return k, W @ np.diag(d) @ dagger(V), True


def _phi_residual_fn(x, bx):
    from .optim import matrix_residual, stack

    slots, bslots = x.slots(), bx.slots()

    def residual(js):
        phi = js[0]
        parts = [matrix_residual(b @ phi - phi @ s) for s, b in zip(slots, bslots)]
        parts.append(matrix_residual(phi - phi.T))
        return stack(parts)
    return residual


def _phi_fallback(x, bx, cfg):
    from .optim import minimize, haar_init

    res = minimize(_phi_residual_fn(x, bx), haar_init(x.n, 1), cfg, 1, x.n)
    return res.params[0] if res.success else None


def solve_phi(x, tol=DEFAULT.phi, cfg=None, gap_tol=1e-6):
    """A symmetric phi with beta(x) = phi . x, or None if none is found at tol.

    None means "not found by this local method", never a proof that x is not
    decomposable.
    """
    _require_representation(x, max(tol, DEFAULT.representation))
    bx = beta_numeric(x)
    n = x.n
    if n == 1:
        phi = np.eye(1, dtype=complex)
        r = beta_orbit_residual(x, phi)
        return PhiResult(phi, r, 0.0, True, 0) if r <= tol else None
    ref, phi, conclusive = _phi_torus(x, bx, gap_tol)
    generic = conclusive
    if conclusive and phi is None:
        return None
    if not conclusive:
        from .optim import FinderConfig
        cfg = cfg or FinderConfig(max_iters=3000, restarts=4)
        phi = _phi_fallback(x, bx, cfg)
        ref = -1
        if phi is None:
            return None
    r = beta_orbit_residual(x, phi)
    sym = float(np.linalg.norm(phi - phi.T))
    if max(r, sym) > tol:
        return None
    return PhiResult(phi, r, sym, generic, ref)


# -- decomposable chains ----------------------------------------------------------------

def decomposable_chain(a_list, w_list):
    """Build (pairs, classes, vs) from free a_i and symmetric w_j.

    b_i = v_{i+1} conj(a_i) v_{i+1}^-1 and v_i = [a_i, b_i] v_{i+1}, starting
    from v_{g+1} = w_1 (identity when l = 0); c_j = w_j w_{j+1}^-1 and
    c_l = w_l v_1^-1. Works on arrays and jets alike. When l = 0 the closing
    condition v_1 = 1 is left to the caller.
    """
    g, l = len(a_list), len(w_list)
    v_next = w_list[0] if l else None
    pairs = [None] * g
    vs = [None] * g
    for i in reversed(range(g)):
        a = a_list[i]
        b = jet.conj(a) if v_next is None else jet.mul(v_next, jet.conj(a), jet.inv(v_next))
        comm = jet.mul(a, b, jet.inv(a), jet.inv(b))
        v = comm if v_next is None else comm @ v_next
        pairs[i] = (a, b)
        vs[i] = v
        v_next = v
    classes = [w_list[j] @ jet.inv(w_list[j + 1]) for j in range(l - 1)]
    if l:
        v1 = vs[0] if g else w_list[0]
        classes.append(w_list[-1] @ jet.inv(v1))
    return pairs, classes, vs


def _gauge_to_fixed_point(x, wit):
    """Conjugate so that the chain starts at the identity: beta(x') = x'."""
    from .liecore import takagi_sqrt

    A = takagi_sqrt(wit.chain_start, tol=1e-7)
    u = A.conj()
    return act(u, x), transform_witness(u, wit)


def sample_decomposable(n, g, l, rng, specs=None, cfg=None, group="U"):
    """A decomposable tuple with a known witness.

    Without class specs and l >= 1 the construction is exact: w_j = exp(iS_j),
    a_i Haar. With specs, or when l = 0, the beta-fixed finder supplies the
    point and a Haar conjugation moves it off the fixed locus.
    """
    if n < 1 or g < 0 or l < 0 or g + l < 1:
        raise SignatureError("need n >= 1 and g + l >= 1")
    if specs is None and l >= 1:
        a_list = [haar_sample(n, rng) for _ in range(g)]
        w_list = [random_symmetric_unitary(n, rng) for _ in range(l)]
        pairs, classes, vs = decomposable_chain(a_list, w_list)
        slots = [m for p in pairs for m in p] + classes
        x = SurfaceTuple.from_slots(g, l, slots, group="U")
        v1 = vs[0] if g else w_list[0]
        return x, Witness(tuple(vs), tuple(w_list), dagger(v1))
    if n == 1 and specs is None:
        a_list = [haar_sample(1, rng) for _ in range(g)]
        slots = [m for a in a_list for m in (a, a.conj())]
        x = SurfaceTuple.from_slots(g, 0, slots, group="U")
        one = np.eye(1, dtype=complex)
        return x, Witness(tuple(one for _ in range(g)), (), one)
    from .moduli import find_beta_fixed_representation
    from .optim import FinderConfig

    specs = list(specs or [])
    if len(specs) != l:
        raise SignatureError("need one class spec per puncture")
    cfg = cfg or FinderConfig(seed=int(rng.integers(2 ** 31)))
    found = find_beta_fixed_representation(specs, g, cfg, n=n, with_witness=True)
    if found is None:
        raise NoSolutionFound("beta-fixed finder did not converge for these classes")
    x, wit = found
    u = haar_sample(n, rng)
    if x.group == "SU":
        u = u * np.linalg.det(u) ** (-1.0 / n)
    return act(u, x), transform_witness(u, wit)
