"""Least-squares minimization over products of unitary groups.

An objective is a residual map params -> (r, J): ``params`` is a list of P
unitary (n, n) matrices, r a real vector and J its Jacobian with respect to
left-trivialized coordinates, that is along p_k -> p_k exp(t E_f) for the
orthonormal basis E_f of u(n). Residual maps are written once over
:class:`~surfacereps.jet.Jet` values, so J comes from the product rule.

f = |r|^2 is minimized by Riemannian gradient descent with Barzilai-Borwein
step lengths, Armijo backtracking and the exponential retraction. Once f is
below the tolerance a few Gauss-Newton steps take the residual to round-off.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .jet import Jet
from .liecore import dagger, haar_sample, lie_basis, unitary_eig, wrap_angle, circular_distance

OBJECTIVE_FLOOR = 1e-12


@dataclass(frozen=True)
class FinderConfig:
    max_iters: int = 400
    step_init: float = 0.1
    tol_objective: float = 1e-12
    restarts: int = 16
    seed: int = 0
    polish_iters: int = 8

    def __post_init__(self):
        if self.max_iters <= 0 or self.restarts <= 0 or self.step_init <= 0:
            raise ValidationError("finder config fields must be positive")
        if self.tol_objective < OBJECTIVE_FLOOR:
            raise ValidationError(f"tol_objective below the floor {OBJECTIVE_FLOOR:g}")
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")


@dataclass
class RunResult:
    params: list
    objective: float
    iterations: int
    restart: int
    success: bool
    history: list = field(default_factory=list)


# -- jets and retraction --------------------------------------------------------

def seed_jets(params):
    """One jet per parameter, with a velocity block for each basis direction."""
    n = params[0].shape[0]
    B = lie_basis(n)
    m = len(B)
    K = len(params) * m
    out = []
    for i, p in enumerate(params):
        tan = np.zeros((K, n, n), complex)
        tan[i * m:(i + 1) * m] = p @ B
        out.append(Jet(p, tan))
    return out


def expm_skew(X):
    """exp of a batch of skew-Hermitian matrices through eigh of -iX."""
    lam, V = np.linalg.eigh(-1j * X)
    return (V * np.exp(1j * lam)[..., None, :]) @ dagger(V)


def retract(params, coords):
    """p_k -> p_k exp(sum_f coords[k, f] E_f)."""
    n = params[0].shape[0]
    B = lie_basis(n)
    X = np.tensordot(np.reshape(coords, (len(params), len(B))), B, 1)
    E = expm_skew(X)
    return [p @ e for p, e in zip(params, E)]


# -- residual building blocks ------------------------------------------------------

def matrix_residual(M, target=None):
    """Entries of M - target as a real residual; M is a Jet."""
    E = M.val if target is None else M.val - target
    r = np.concatenate([E.real.ravel(), E.imag.ravel()])
    K = len(M.tan)
    T = M.tan.reshape(K, -1)
    J = np.concatenate([T.real, T.imag], axis=1).T
    return r, J


def spectral_residual(c, phases):
    """Aligned eigenphase differences of the jet c against target phases.

    r_k = wrap(theta_k - target_k) after optimal circular alignment, with
    d theta_k = Im(v_k^* c^-1 dc v_k) for unit eigenvectors v_k.
    """
    ph, V = unitary_eig(c.val)
    _, shift, order = circular_distance(ph, phases)
    q = np.sort(np.mod(np.asarray(phases, float), 2 * math.pi))
    ps = np.mod(ph[order], 2 * math.pi)
    r = wrap_angle(ps - np.roll(q, -shift))
    Vo = V[:, order]
    M = dagger(Vo) @ dagger(c.val) @ c.tan @ Vo
    J = np.imag(np.diagonal(M, axis1=1, axis2=2)).T
    return r, J


def stack(parts):
    r = np.concatenate([p[0] for p in parts])
    J = np.concatenate([p[1] for p in parts], axis=0)
    return r, J


def evaluate(residual, params):
    r, J = residual(seed_jets(params))
    return r, J, float(r @ r), 2.0 * (J.T @ r)


def objective_value(residual, params):
    return evaluate(residual, params)[2]


def riemannian_gradient(residual, params):
    """Gradient of |r|^2 in left-trivialized orthonormal coordinates."""
    return evaluate(residual, params)[3]


def fd_gradient(residual, params, h=1e-5):
    """Central finite differences of |r|^2 along each coordinate curve."""
    n = params[0].shape[0]
    K = len(params) * n * n
    g = np.zeros(K)
    for k in range(K):
        e = np.zeros(K)
        e[k] = h
        fp = objective_value(residual, retract(params, e))
        fm = objective_value(residual, retract(params, -e))
        g[k] = (fp - fm) / (2 * h)
    return g


def gradient_check(residual, params, h=1e-5):
    """Relative error between analytic and central-difference gradients."""
    ga = riemannian_gradient(residual, params)
    gf = fd_gradient(residual, params, h)
    scale = max(np.linalg.norm(ga), np.linalg.norm(gf), 1e-300)
    return float(np.linalg.norm(ga - gf) / scale)


# -- descent --------------------------------------------------------------------------

def descend(residual, params, max_iters, step_init, target, c1=1e-4):
    """Gradient descent until f <= target, stagnation or max_iters."""
    r, J, f, g = evaluate(residual, params)
    t = step_init
    history = [f]
    it = 0
    stall = 0
    for it in range(1, max_iters + 1):
        if f <= target:
            break
        gg = float(g @ g)
        if gg < 1e-30:
            break
        while True:
            trial = retract(params, -t * g)
            r2, J2, f2, g2 = evaluate(residual, trial)
            if f2 <= f - c1 * t * gg or t < 1e-14:
                break
            t *= 0.5
        if f2 > f:
            break
        s = -t * g
        y = g2 - g
        sy = float(s @ y)
        t = float(s @ s) / sy if sy > 0 else step_init
        t = min(max(t, 1e-10), 1e3)
        stall = stall + 1 if f - f2 < 1e-12 * f else 0
        params, f, g = trial, f2, g2
        history.append(f)
        if stall >= 20:
            break
    return params, f, it, history


def polish(residual, params, iters):
    """Gauss-Newton steps (minimum-norm least squares) while f decreases."""
    r, J, f, _ = evaluate(residual, params)
    history = []
    for _ in range(iters):
        if f == 0.0:
            break
        step = np.linalg.lstsq(J, -r, rcond=1e-12)[0]
        trial = retract(params, step)
        r2, J2, f2, _ = evaluate(residual, trial)
        if not f2 < f:
            break
        params, r, J, f = trial, r2, J2, f2
        history.append(f)
    return params, f, len(history), history


def minimize(residual, init, cfg, n_params, n, rng_parent=None):
    """Multi-restart minimization; the first success in restart order wins.

    ``init(rng)`` draws a starting parameter list. Each restart uses its own
    child of ``np.random.SeedSequence(cfg.seed)``, so results do not depend on
    how many restarts were attempted before.
    """
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    best = None
    for k, child in enumerate(children):
        rng = np.random.default_rng(child)
        params = init(rng)
        params, f, its, hist = descend(residual, params, cfg.max_iters, cfg.step_init,
                                       cfg.tol_objective)
        if f <= cfg.tol_objective:
            params, f2, its2, hist2 = polish(residual, params, cfg.polish_iters)
            return RunResult(params, f2, its + its2, k, True, hist + hist2)
        if best is None or f < best.objective:
            best = RunResult(params, f, its, k, False, hist)
    return best


def haar_init(n, count):
    def init(rng):
        return [haar_sample(n, rng) for _ in range(count)]
    return init
