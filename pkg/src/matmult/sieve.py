"""Squarefree sieving: mu^2(n), omega(n), largest prime factors and the
histogram N_{x,r} = #{n <= x squarefree : omega(n) = r}.

The histogram turns sums over squarefree n into tiny sums over r, e.g.
sum_{n<=x} mu^2(n) z^omega(n) = sum_r N_{x,r} z^r, which is how the exact
second moments and the Selberg-Delange comparisons are evaluated.

Memory: roughly 6 bytes per integer up to x (1 byte omega, 1 byte
squarefree flag, 4 bytes largest prime factor), so the default cap of 1e8
costs about 600 MB.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError, IntegrityError, InvariantError

DEFAULT_SIEVE_CAP = 10**8


def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n, ascending (classic boolean sieve)."""
    if n < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


@dataclass(frozen=True)
class SieveTable:
    """Per-n arrays for 0..x_max (index 0 unused) plus the omega histogram."""

    x_max: int
    omega: np.ndarray
    squarefree: np.ndarray
    largest_prime_factor: np.ndarray
    hist: np.ndarray

    def __post_init__(self):
        for arr in (self.omega, self.squarefree, self.largest_prime_factor, self.hist):
            arr.setflags(write=False)

    @property
    def squarefree_count(self) -> int:
        return int(self.hist.sum())


def build_sieve(x: int, cap: int = DEFAULT_SIEVE_CAP) -> SieveTable:
    """Sieve omega(n), mu^2(n) and the largest prime factor for all n <= x."""
    if x < 1:
        raise InvariantError("x must be >= 1")
    if x > cap:
        raise CapExceededError(f"x={x} exceeds the sieve cap {cap}")
    omega = np.zeros(x + 1, dtype=np.uint8)
    lpf = np.zeros(x + 1, dtype=np.int32)
    lpf[1:2] = 1
    squarefree = np.ones(x + 1, dtype=bool)
    squarefree[0] = False
    for p in primes_up_to(x):
        omega[p::p] += 1
        lpf[p::p] = p
        if p * p <= x:
            squarefree[p * p :: p * p] = False
    counts = np.bincount(omega[1:][squarefree[1:]])
    hist = counts.astype(np.int64)

    if hist[0] != 1:
        raise IntegrityError("N_{x,0} must count exactly n=1")
    max_omega = int(omega.max()) if x >= 2 else 0
    if 2**max_omega > x:
        raise IntegrityError("omega exceeds log2(x); sieve is corrupt")
    if x >= 10**4:
        density = hist.sum() / x
        if not 0.59 <= density <= 0.62:
            raise IntegrityError(f"squarefree density {density:.4f} outside [0.59, 0.62]")
    return SieveTable(
        x_max=x, omega=omega, squarefree=squarefree, largest_prime_factor=lpf, hist=hist
    )


def sum_z_omega(table: SieveTable, z: complex) -> complex:
    """sum_{n<=x} mu^2(n) z^omega(n), contracted through the histogram."""
    r = np.arange(len(table.hist))
    return complex(np.sum(table.hist * np.asarray(z, dtype=np.complex128) ** r))


def sum_omega_power(table: SieveTable, z: complex, r: int) -> complex:
    """sum_{n<=x} mu^2(n) omega(n)^r z^omega(n) for 0 <= r <= 6."""
    if not 0 <= r <= 6:
        raise InvariantError("r must be between 0 and 6")
    s = np.arange(len(table.hist), dtype=np.float64)
    return complex(np.sum(table.hist * s**r * np.asarray(z, dtype=np.complex128) ** s))
