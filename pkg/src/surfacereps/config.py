"""Tolerance table shared by every module and the CLI.

A single table keeps the suites auditable: the CLI loads overrides from a JSON
file (path from ``--config`` or the ``SURFACEREPS_CONFIG`` environment variable)
and per-flag overrides on top of that.
"""

import json
import os
from dataclasses import asdict, dataclass, fields, replace

CONFIG_ENV = "SURFACEREPS_CONFIG"


@dataclass(frozen=True)
class Tolerances:
    validation: float = 1e-10      # constructor checks: unitarity, det, class sums
    identity: float = 1e-12        # algebraic identities (tau, Ad-invariance)
    factorization: float = 1e-8    # takagi / class membership postconditions
    symmetric: float = 1e-8        # is-symmetric precondition for takagi_sqrt
    chain_symmetric: float = 1e-7  # intermediate matrices in thompson_backward
    beta: float = 1e-11            # beta round trips and compatibilities
    class_membership: float = 1e-8
    form: float = 1e-10            # axiom residuals, analytic pullback
    fd_form: float = 1e-6          # finite-difference pullback residual
    nullity: float = 1e-8          # relative singular-value threshold
    gap: float = 1e-4              # singular values in (nullity, gap) are ambiguous
    representation: float = 1e-8   # |mu(x) - I| for witness checks
    phi: float = 1e-8              # solve_phi acceptance
    objective: float = 1e-10       # finder objective target
    certificate: float = 1e-7      # finder / thompson certificates

    def override(self, **kw):
        unknown = set(kw) - {f.name for f in fields(self)}
        if unknown:
            raise KeyError(f"unknown tolerance keys: {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in kw.items()})

    def to_dict(self):
        return asdict(self)


DEFAULT = Tolerances()


def load_tolerances(path=None):
    """Defaults, overridden by the JSON object at ``path`` (or $SURFACEREPS_CONFIG)."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return DEFAULT
    with open(path) as fh:
        data = json.load(fh)
    return DEFAULT.override(**data.get("tolerances", data))
