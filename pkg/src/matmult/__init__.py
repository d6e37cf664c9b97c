"""matmult: moments of random matrix-valued multiplicative functions.

A random matrix-valued multiplicative function attaches i.i.d. random d x d
matrices f(p) to the primes and extends to squarefree n by the ascending
product f(n) = f(p_1) ... f(p_r). This package computes moments of the
partial sums S_f(x) = sum_{n<=x} f(n): exactly through symmetric-power
lifts of the transfer operator A -> E[X* A X] and a squarefree sieve,
asymptotically through Selberg-Delange expansion constants, stochastically
through reproducible Monte Carlo, and it brackets the joint spectral radius
that governs the higher moments.
"""

from .errors import (
    CapExceededError,
    IllConditionedError,
    IntegrityError,
    InvariantError,
    LawFormatError,
    MatmultError,
)
from .jsr import JsrBounds, RadiusLadder, gripenberg, rho_2k, rho_ladder, spectral_radius
from .law import (
    MatrixLaw,
    ValidationReport,
    atom_indices,
    hs_norm_sq,
    law_from_dict,
    load_law,
    sample,
    validate_law,
)
from .lift import (
    CharPoly,
    LiftedOperator,
    MomentSequence,
    SpectralData,
    build_transfer,
    char_poly,
    exact_moment_sequence,
    lift_dim,
    minimal_recurrence_length,
    spectral_decompose,
    verify_recurrence,
)
from .moments import (
    MomentReport,
    brute_force_moment,
    exact_second_moment,
    mc_moment,
    mc_partial_sum,
    square_tuple_sum,
)
from .selberg import (
    EULER_GAMMA,
    AsymptoticExpansion,
    EulerProductValue,
    euler_F,
    euler_P,
    euler_P_s,
    euler_product_at,
    expansion_constants,
    gamma_complex,
    predict_second_moment,
    recip_gamma,
)
from .sieve import SieveTable, build_sieve, primes_up_to, sum_omega_power, sum_z_omega

__version__ = "0.1.0"

__all__ = [
    "AsymptoticExpansion",
    "CapExceededError",
    "CharPoly",
    "EULER_GAMMA",
    "EulerProductValue",
    "IllConditionedError",
    "IntegrityError",
    "InvariantError",
    "JsrBounds",
    "LawFormatError",
    "LiftedOperator",
    "MatmultError",
    "MatrixLaw",
    "MomentReport",
    "MomentSequence",
    "RadiusLadder",
    "SieveTable",
    "SpectralData",
    "ValidationReport",
    "atom_indices",
    "brute_force_moment",
    "build_sieve",
    "build_transfer",
    "char_poly",
    "euler_F",
    "euler_P",
    "euler_P_s",
    "euler_product_at",
    "exact_moment_sequence",
    "exact_second_moment",
    "expansion_constants",
    "gamma_complex",
    "gripenberg",
    "hs_norm_sq",
    "law_from_dict",
    "lift_dim",
    "load_law",
    "mc_moment",
    "mc_partial_sum",
    "minimal_recurrence_length",
    "predict_second_moment",
    "primes_up_to",
    "recip_gamma",
    "rho_2k",
    "rho_ladder",
    "sample",
    "spectral_decompose",
    "spectral_radius",
    "square_tuple_sum",
    "sum_omega_power",
    "sum_z_omega",
    "validate_law",
    "verify_recurrence",
]
