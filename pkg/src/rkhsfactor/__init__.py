"""Finite-sample factorization of invariant subspaces in reproducing kernel Hilbert spaces.

Modules
-------
kernels      catalog kernels, sample sets, PSD / CNP tests
samplespace  the sampled RKHS, subspaces and their kernels
multcheck    multiplier symbols, defect kernels, multiplication operators
beurling     partially isometric multipliers representing invariant subspaces
leech        Leech factorization and the nested-subspace pipeline
coeffmodel   truncated power-series model and root functions
cli          scenario runner (``rkhsfactor`` console script)
"""

from .errors import *  # noqa: F401,F403
from .kernels import (
    KernelMatrix,
    KernelSpec,
    SampleSet,
    cnp_factor,
    evaluate,
    hadamard_quotient,
    is_cnp,
    is_psd,
    schur_product,
)
from .samplespace import (
    PointwiseConstraintSpec,
    Subspace,
    subspace_from_constraints,
    subspace_kernel,
)
from .multcheck import MultiplierSymbol, blaschke_symbol, classify, multiplication_operator
from .beurling import connecting_partial_isometry, synthesize, verify_representation
from .leech import arias_pipeline, solve

__version__ = "0.1.0"
