"""heavyedge: spectral-edge statistics laboratory for heavy-tailed random
matrices.

Construct matrix ensembles with exactly controlled power tails, split them
into small/large/compensator parts, compute top eigenpairs, evaluate the
analytic edge laws, and check simulation against prediction by Monte Carlo.
"""

__version__ = "0.1.0"

from . import decomposition, ensembles, experiments, limit_laws, spectral, tail_laws
from .errors import DomainError

__all__ = [
    "DomainError",
    "__version__",
    "decomposition",
    "ensembles",
    "experiments",
    "limit_laws",
    "spectral",
    "tail_laws",
]
