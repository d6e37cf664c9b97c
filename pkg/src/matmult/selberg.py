"""Euler products, the reciprocal gamma function, and Selberg-Delange
second-moment predictions.

Notation: P(s, z) = prod_p (1 + z p^{-s})(1 - p^{-s})^z converges for
Re s > 1/2 and P(z) = P(1, z); F(z) = P(z) / Gamma(z). Partial sums of
mu^2(n) z^omega(n) grow like F(z) x (log x)^{z-1}, and the two-term
refinement adds ((gamma z - 1) P(z) + P_s(z)) / Gamma(z - 1) times
x (log x)^{z-2}, with P_s the s-derivative of P at s = 1. Feeding a lift's
spectral data through those formulas yields the explicit constants C_{i,m}
of the second-moment expansion

    E || sum_{n<=x} f(n) ||_HS^2  ~  x * sum_{i,m} C_{i,m} (log x)^{lambda_i - m},

plus a (log log x)^{d_max} correction when the lift is defective.

Truncation orders above m = 2 would need Taylor data of ((s-1) zeta(s))^z
and are deliberately unsupported.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import IntegrityError, InvariantError
from .lift import SpectralData
from .sieve import primes_up_to

EULER_GAMMA = 0.57721566490153286061

DEFAULT_PRIME_BOUND = 10**7
MIN_PRIME_BOUND = 100


@lru_cache(maxsize=8)
def _primes_f64(bound: int) -> np.ndarray:
    p = primes_up_to(bound).astype(np.float64)
    p.setflags(write=False)
    return p


@lru_cache(maxsize=8)
def _log_primes(bound: int) -> np.ndarray:
    lp = np.log(_primes_f64(bound))
    lp.setflags(write=False)
    return lp


@lru_cache(maxsize=8)
def _mertens_logsum(bound: int) -> float:
    """sum_{p<=bound} log(1 - 1/p)."""
    return float(np.sum(np.log1p(-1.0 / _primes_f64(bound))))


@dataclass(frozen=True)
class EulerProductValue:
    """A truncated Euler product with a rigorous bound on the dropped tail."""

    value: complex
    tail_bound: float
    prime_bound: int


def _check_bound(z: complex, prime_bound: int):
    if prime_bound < MIN_PRIME_BOUND:
        raise InvariantError(f"prime_bound must be >= {MIN_PRIME_BOUND}")
    if prime_bound < 4 * (1 + abs(z)):
        raise InvariantError("prime_bound too small for this |z| (tail bound invalid)")


def _zero_factor_prime(z: complex, primes: np.ndarray) -> bool:
    """True when 1 + z/p vanishes for some sieved prime, i.e. z = -p."""
    w = -z
    if w.imag != 0.0 or w.real < 2 or w.real != round(w.real):
        return False
    p = int(w.real)
    i = np.searchsorted(primes, p)
    return i < len(primes) and primes[i] == p


def euler_P(z: complex, prime_bound: int = DEFAULT_PRIME_BOUND) -> EulerProductValue:
    """P(z) = prod_{p <= prime_bound} (1 + z/p)(1 - 1/p)^z, principal logs.

    The tail beyond the bound is controlled by
    |log factor| <= (|z|^2 + |z|)/p^2 and sum_{p > B} p^{-2} < 1/(B-1),
    giving tail_bound = |value| * (exp((|z|^2+|z|)/(B-1)) - 1), which
    shrinks monotonically as the bound grows.
    """
    z = complex(z)
    _check_bound(z, prime_bound)
    primes = _primes_f64(prime_bound)
    if _zero_factor_prime(z, primes):
        return EulerProductValue(value=0j, tail_bound=0.0, prime_bound=prime_bound)
    logsum = complex(np.sum(np.log(1.0 + z / primes))) + z * _mertens_logsum(prime_bound)
    value = cmath.exp(logsum)
    tail = abs(value) * math.expm1((abs(z) ** 2 + abs(z)) / (prime_bound - 1))
    return EulerProductValue(value=value, tail_bound=tail, prime_bound=prime_bound)


def euler_P_s(z: complex, prime_bound: int = DEFAULT_PRIME_BOUND) -> EulerProductValue:
    """d/ds P(s, z) at s = 1, in logarithmic-derivative form.

    P_s(z) = P(z) * sum_p z (log p)/p [ 1/(1 - 1/p) - 1/(1 + z/p) ].
    """
    z = complex(z)
    _check_bound(z, prime_bound)
    primes = _primes_f64(prime_bound)
    if _zero_factor_prime(z, primes):
        # P has a zero factor; the derivative of the product is dominated by
        # the surviving factors times the derivative of the vanishing one.
        raise InvariantError("P_s is not evaluated at z = -p (P has a zero factor)")
    p_val = euler_P(z, prime_bound)
    logs = _log_primes(prime_bound)
    bracket = 1.0 / (1.0 - 1.0 / primes) - 1.0 / (1.0 + z / primes)
    deriv_sum = z * complex(np.sum(logs / primes * bracket))
    value = p_val.value * deriv_sum
    b = float(prime_bound)
    tail_sum = 2.0 * abs(z) * (1.0 + abs(z)) * (math.log(b) + 1.0) / b
    tail = (
        abs(p_val.value) * tail_sum
        + abs(deriv_sum) * p_val.tail_bound
        + p_val.tail_bound * tail_sum
    )
    return EulerProductValue(value=value, tail_bound=tail, prime_bound=prime_bound)


def euler_product_at(s: float, z: complex, prime_bound: int = 10**5) -> complex:
    """P(s, z) truncated at prime_bound, for Re s > 1/2 (no tail bound)."""
    if s <= 0.5:
        raise InvariantError("Euler product only converges for s > 1/2")
    z = complex(z)
    primes = _primes_f64(prime_bound)
    ps = primes**(-float(s))
    return cmath.exp(
        complex(np.sum(np.log(1.0 + z * ps))) + z * complex(np.sum(np.log1p(-ps)))
    )


_LANCZOS_G = 7.0
_LANCZOS_COEFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_gamma_pole(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == round(z.real)


def gamma_complex(z: complex) -> complex:
    """Gamma(z) by the Lanczos approximation (g=7, 9 terms), with reflection.

    Accurate to at least 12 significant digits on |Re z| <= 10, |Im z| <= 10.
    At the poles z = 0, -1, -2, ... returns complex infinity so that
    1/Gamma = 0 stays representable.
    """
    z = complex(z)
    if _is_gamma_pole(z):
        return complex(math.inf, 0.0)
    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * gamma_complex(1.0 - z))
    z -= 1.0
    acc = _LANCZOS_COEFS[0]
    for i, coef in enumerate(_LANCZOS_COEFS[1:], start=1):
        acc += coef / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * cmath.exp(-t) * acc


def recip_gamma(z: complex) -> complex:
    """1 / Gamma(z); exactly 0 at the poles of Gamma."""
    z = complex(z)
    if _is_gamma_pole(z):
        return 0j
    return 1.0 / gamma_complex(z)


def euler_F(z: complex, prime_bound: int = DEFAULT_PRIME_BOUND) -> EulerProductValue:
    """F(z) = P(z) / Gamma(z) with the tail bound scaled through 1/Gamma."""
    p = euler_P(z, prime_bound)
    rg = recip_gamma(z)
    return EulerProductValue(
        value=p.value * rg, tail_bound=p.tail_bound * abs(rg), prime_bound=prime_bound
    )


@dataclass(frozen=True)
class AsymptoticExpansion:
    """Second-moment expansion constants.

    ``terms`` holds (lambda_i, m, C_{i,m}) main terms for m <= N;
    ``defective_terms`` holds (lambda_j, d_max, C'_j) entries contributing
    x (log x)^{lambda_j - 1} (log log x)^{d_max}. Conjugate eigenvalue pairs
    carry conjugate constants, so evaluations are real after pair summation.
    """

    terms: tuple
    defective_terms: tuple
    N: int
    error_exponent: float


def expansion_constants(
    spectral: SpectralData, N: int, prime_bound: int = DEFAULT_PRIME_BOUND
) -> AsymptoticExpansion:
    """Constants C_{i,1} = beta_i F(lambda_i) and, for N=2,
    C_{i,2} = beta_i ((gamma lambda_i - 1) P(lambda_i) + P_s(lambda_i)) / Gamma(lambda_i - 1),
    for the non-defective part of the spectrum; defective eigenvalues of top
    degree contribute C'_j = b_j lambda_j^{d_max} F(lambda_j).
    """
    if N not in (1, 2):
        raise InvariantError("only expansion orders N=1 and N=2 are supported")
    main_idx = spectral.L1
    terms = []
    for i in main_idx:
        lam = complex(spectral.lambdas[i])
        beta = complex(spectral.betas[i])
        p_val = euler_P(lam, prime_bound)
        terms.append((lam, 1, beta * p_val.value * recip_gamma(lam)))
        if N == 2:
            ps_val = euler_P_s(lam, prime_bound)
            c2 = (
                beta
                * ((EULER_GAMMA * lam - 1.0) * p_val.value + ps_val.value)
                * recip_gamma(lam - 1.0)
            )
            terms.append((lam, 2, c2))
    defective = []
    for j in spectral.L2_prime:
        lam = complex(spectral.lambdas[j])
        b = complex(spectral.g_polys[j][spectral.degrees[j]])
        f_val = euler_P(lam, prime_bound).value * recip_gamma(lam)
        defective.append((lam, spectral.d_max, b * lam**spectral.d_max * f_val))
    lam1 = complex(spectral.lambdas[0])
    return AsymptoticExpansion(
        terms=tuple(terms),
        defective_terms=tuple(defective),
        N=N,
        error_exponent=lam1.real - N - 1,
    )


def predict_second_moment(exp: AsymptoticExpansion, x: float) -> float:
    """Evaluate the expansion at x >= 2.

    (log x)^lambda means exp(lambda * ln(log x)) with the positive real base
    log x; for x in [2, e) the inner logarithm is negative, which is fine.
    The imaginary residue after conjugate-pair summation must stay below
    1e-10 relative, otherwise the expansion is inconsistent.
    """
    if x < 2:
        raise InvariantError("predictions require x >= 2")
    log_x = math.log(x)
    loglog = math.log(log_x)
    total = 0j
    for lam, m, c in exp.terms:
        total += c * cmath.exp((lam - m) * loglog)
    for lam, dmax, c in exp.defective_terms:
        total += c * cmath.exp((lam - 1.0) * loglog) * loglog**dmax
    value = x * total
    if abs(value.imag) > 1e-10 * max(1.0, abs(value)):
        raise IntegrityError(
            f"prediction at x={x:g} has imaginary residue {value.imag:.3g}"
        )
    return value.real
