"""Surface group representations into U(n): the quasi-Hamiltonian space of
(U x U)^g x C_1 x ... x C_l, its anti-symplectic involution beta,
decomposable representations, and a compact analogue of Thompson's problem.
"""

__version__ = "0.1.0"

from .liecore import ClassSpec, AlcovePoint, takagi_sqrt, tau, tau_minus  # noqa: E402
from .qham import SurfaceTuple, Tangent, momentum, act, beta_numeric  # noqa: E402
from .decomp import (Witness, check_witness, witness_from_phi, solve_phi,  # noqa: E402
                     transform_witness, sample_decomposable)
from .optim import FinderConfig  # noqa: E402
from .moduli import (find_representation, find_beta_fixed_representation,  # noqa: E402
                     isotropy_dimension, polytope_sample)
from .thompson import (ThompsonInstance, ThompsonSolution, thompson_forward,  # noqa: E402
                       thompson_backward, solve_thompson)
