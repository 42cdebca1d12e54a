"""The compact Thompson problem: unitary A_j with prescribed spectra of
A_j^T A_j and A_1 ... A_l = 1, related to products of unitaries with
prescribed spectra by explicit constructions in both directions.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT
from .errors import PreconditionError, SignatureError, ValidationError
from .liecore import (ClassSpec, check_unitary, circular_distance, dagger,
                      eigenphases, is_symmetric, takagi_sqrt)
from .optim import FinderConfig


@dataclass(frozen=True)
class ThompsonInstance:
    n: int
    spectra: tuple           # ClassSpec per factor, the exp(i lambda_j)

    def __post_init__(self):
        spectra = tuple(self.spectra)
        if not spectra:
            raise SignatureError("need l >= 1")
        if any(s.n != self.n for s in spectra):
            raise ValidationError("all spectra must have length n")
        object.__setattr__(self, "spectra", spectra)

    @property
    def l(self):
        return len(self.spectra)

    @classmethod
    def from_lambdas(cls, lambdas, group=None):
        lambdas = [np.asarray(lam, float) for lam in lambdas]
        n = len(lambdas[0])
        if group is None:
            group = "SU" if all(abs(math.remainder(lam.sum(), 2 * math.pi)) < 1e-12
                                for lam in lambdas) and n > 1 else "U"
        return cls(n, tuple(ClassSpec(tuple(lam), group) for lam in lambdas))


@dataclass
class ThompsonSolution:
    As: list
    spectral: list           # per-j distance of spec(A_j^T A_j) to exp(i lambda_j)
    product: float           # |A_1 ... A_l - 1|
    tol: float = DEFAULT.certificate

    @property
    def valid(self):
        return max([self.product] + list(self.spectral)) <= self.tol

    def to_dict(self):
        return {"spectral": self.spectral, "product": self.product, "tol": self.tol,
                "verdict": "pass" if self.valid else "fail"}


def _prod(ms, n):
    out = np.eye(n, dtype=complex)
    for m in ms:
        out = out @ m
    return out


def thompson_forward(As, tol=DEFAULT.representation):
    """u_j = (A_{j+1}...A_l)^T (A_j^T A_j) ((A_{j+1}...A_l)^T)^-1."""
    As = [check_unitary(a) for a in As]
    n = As[0].shape[0]
    res = float(np.linalg.norm(_prod(As, n) - np.eye(n)))
    if res > tol:
        raise PreconditionError(f"A_1...A_l differs from 1 by {res:.3e}")
    us = [None] * len(As)
    P = np.eye(n, dtype=complex)            # A_{j+1} ... A_l
    for j in reversed(range(len(As))):
        A = As[j]
        us[j] = P.T @ (A.T @ A) @ P.conj()  # (P^T)^-1 = conj(P) for unitary P
        P = A @ P
    return us


def thompson_backward(ws, tol=DEFAULT.chain_symmetric):
    """A_j from a beta-fixed (w_1, ..., w_l) with w_1 ... w_l = 1."""
    ws = [check_unitary(w) for w in ws]
    n = ws[0].shape[0]
    l = len(ws)
    res = float(np.linalg.norm(_prod(ws, n) - np.eye(n)))
    if res > tol:
        raise PreconditionError(f"w_1...w_l differs from 1 by {res:.3e}")
    if l == 1:
        return [np.eye(n, dtype=complex)]
    As = [None] * l
    P = np.eye(n, dtype=complex)            # A_{j+1} ... A_l
    for j in reversed(range(1, l)):
        m = P.conj() @ ws[j] @ P.T          # ((P^T)^-1) w_j P^T
        if not is_symmetric(m, tol):
            raise PreconditionError(
                f"chain matrix for j = {j + 1} is not symmetric "
                f"(residual {np.linalg.norm(m - m.T):.3e}); input is not beta-fixed")
        As[j] = takagi_sqrt(0.5 * (m + m.T), tol=max(tol, DEFAULT.factorization))
        P = As[j] @ P
    As[0] = dagger(P)
    return As


def certify(As, inst, tol=DEFAULT.certificate):
    n = inst.n
    spectral = [math.sqrt(circular_distance(eigenphases(a.T @ a), s.phases)[0])
                for a, s in zip(As, inst.spectra)]
    product = float(np.linalg.norm(_prod(As, n) - np.eye(n)))
    return ThompsonSolution(list(As), spectral, product, tol)


def solve_thompson(inst, cfg=None, tol=DEFAULT.certificate):
    """Beta-fixed finder, then :func:`thompson_backward`, then certificates.

    Returns None when the finder does not converge; that is a solver verdict,
    not a proof of infeasibility.
    """
    from .moduli import find_beta_fixed_representation

    cfg = cfg or FinderConfig()
    x = find_beta_fixed_representation(inst.spectra, 0, cfg)
    if x is None:
        return None
    sol = certify(thompson_backward(list(x.classes)), inst, tol)
    return sol if sol.valid else None


def solve_unitary_problem(inst, cfg=None):
    """Statement (i): c_j with Spec c_j = exp(i lambda_j) and c_1 ... c_l = 1."""
    from .moduli import find_representation

    return find_representation(inst.spectra, 0, cfg or FinderConfig())
