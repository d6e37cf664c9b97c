"""Moments of the partial sums S_f(x) = sum_{n<=x} f(n) of a random
matrix-valued multiplicative function.

f is supported on squarefree n, f(p) are i.i.d. draws from a law, and
f(n) = f(p_1) ... f(p_r) over the ascending prime factorization, realized
by the right-multiplication chain f(n) = f(n / P(n)) f(P(n)) with P(n) the
largest prime factor; f(1) is the identity (empty product).

Four evaluation routes live here:

* ``exact_second_moment``: E||S_f(x)||_HS^2 = sum_r N_{x,r} a_r exactly,
  because the contribution of a squarefree n depends only on omega(n).
* ``mc_moment`` / ``mc_partial_sum``: Monte Carlo for any even order 2k,
  with counter-based draws keyed by (seed, trial, prime) so runs are
  reproducible and trials independent; identical inputs give bit-identical
  reports regardless of chunking or thread count.
* ``brute_force_moment``: exact tiny-x oracle enumerating every assignment
  of atoms to the primes <= x with product weights.
* ``square_tuple_sum``: the combinatorial sum over squarefree 2k-tuples with
  square product that controls higher moments; for the scalar Rademacher
  law it equals the exact 2k-th moment.

Per trial the Monte Carlo path stores f(n) for every squarefree n <= x
(d^2 * 16 bytes per stored n, about 64 MB for d=2 at x = 1e6). Above the
``memo_bytes`` cap it falls back to a streaming mode that recomputes each
f(n) from the factorization chain in bounded blocks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import CapExceededError, InvariantError
from .law import MatrixLaw, hs_norm_sq
from .lift import MomentSequence
from .sieve import SieveTable, primes_up_to

DEFAULT_MEMO_BYTES = 512 * 1024**2
DEFAULT_CHUNK_BYTES = 256 * 1024**2
BRUTE_FORCE_CAP = 10**7
SQUARE_TUPLE_BUDGET = 10**8


@dataclass(frozen=True)
class MomentReport:
    """One Monte Carlo moment evaluation with its provenance."""

    x: int
    k: int
    mc_estimate: float
    mc_stderr: float
    trials: int
    seed: int
    exact: float | None = None
    predicted: float | None = None


def exact_second_moment(table: SieveTable, seq: MomentSequence) -> float:
    """sum_r N_{x,r} a_r (compensated summation).

    Equals E||S_f(x)||_HS^2 when the law is mean zero: independence across
    primes then kills every off-diagonal term of the double sum, and the
    diagonal contribution of a squarefree n depends only on omega(n).
    """
    if seq.k != 1:
        raise InvariantError("exact second moments need a k=1 moment sequence")
    hist = table.hist
    if len(seq) < len(hist):
        raise InvariantError(
            f"moment sequence covers n <= {len(seq) - 1} but omega reaches {len(hist) - 1}"
        )
    return math.fsum(int(hist[r]) * seq.values[r] for r in range(len(hist)))


class _ChainPlan:
    """Factorization chains of the squarefree integers in a sieve table.

    Composites are layered by omega(n): the parent n / P(n) of an
    omega = w integer has omega = w - 1, so each wave only needs the
    previous ones and resolves with one batched matrix product.
    """

    def __init__(self, table: SieveTable):
        squarefree_n = np.flatnonzero(table.squarefree).astype(np.int64)
        squarefree_n = squarefree_n[squarefree_n >= 2]
        lpf = table.largest_prime_factor[squarefree_n].astype(np.int64)
        prime_mask = lpf == squarefree_n
        self.squarefree = squarefree_n
        self.primes = squarefree_n[prime_mask]
        self.prime_pos = np.flatnonzero(prime_mask)

        omega = table.omega[squarefree_n]
        self.waves = []
        for w in range(2, int(omega.max(initial=1)) + 1):
            sel = np.flatnonzero(omega == w)
            comp = squarefree_n[sel]
            comp_lpf = lpf[sel]
            parent_pos = np.searchsorted(squarefree_n, comp // comp_lpf)
            factor_rank = np.searchsorted(self.primes, comp_lpf)
            self.waves.append((sel, parent_pos, factor_rank))

    @property
    def n_squarefree(self) -> int:
        return len(self.squarefree)

    @property
    def n_primes(self) -> int:
        return len(self.primes)


def _draw_factor_matrices(law: MatrixLaw, seed: int, trials, n_primes: int) -> np.ndarray:
    """f(p) draws of shape (len(trials), n_primes, d, d), keyed (seed, trial, prime).

    Real laws come back as float64 (a pure relabelling: complex products of
    real matrices carry exact zero imaginary parts), which roughly halves
    the Monte Carlo memory traffic.
    """
    idx = np.empty((len(trials), n_primes), dtype=np.int64)
    for row, trial in enumerate(trials):
        u = rng.uniforms(seed, int(trial), n_primes)
        idx[row] = np.minimum(
            np.searchsorted(law._cum_weights, u, side="right"), law.n_atoms - 1
        )
    atoms = law.atoms.real if law.field_flag == "REAL" else law.atoms
    return atoms[idx]


def _sums_memoized(law, plan, fp) -> np.ndarray:
    """S_f(x) per trial, storing f(n) for every squarefree n."""
    c = fp.shape[0]
    d = law.dim
    values = np.empty((plan.n_squarefree, c, d, d), dtype=fp.dtype)
    values[plan.prime_pos] = fp.transpose(1, 0, 2, 3)
    for child, parent, rank in plan.waves:
        values[child] = np.matmul(values[parent], fp[:, rank].transpose(1, 0, 2, 3))
    total = values.sum(axis=0)
    total += np.eye(d)
    return total


def _sums_streaming(law, plan, fp, table, block: int = 8192) -> np.ndarray:
    """S_f(x) per trial without the per-n memo.

    Each block of squarefree n is factored by peeling largest prime factors,
    then f(n) is rebuilt left-to-right over ascending factors (shorter
    factorizations are identity-padded, which is exact)."""
    c = fp.shape[0]
    d = law.dim
    lpf = table.largest_prime_factor
    eye = np.eye(d, dtype=fp.dtype)
    total = np.tile(eye, (c, 1, 1))  # f(1)
    for lo in range(0, plan.n_squarefree, block):
        ns = plan.squarefree[lo : lo + block]
        cols_desc = []
        work = ns.copy()
        while np.any(work > 1):
            p = np.where(work > 1, lpf[work], 0).astype(np.int64)
            cols_desc.append(p)
            work = work // np.maximum(p, 1)
        acc = None
        for col in reversed(cols_desc):
            has = col > 0
            ranks = np.searchsorted(plan.primes, np.where(has, col, 2))
            mats = fp[:, ranks].transpose(1, 0, 2, 3).copy()  # (B, c, d, d)
            mats[~has] = eye
            if acc is None:
                acc = mats
            else:
                acc = np.matmul(acc, mats)
        if acc is not None:
            total += acc.sum(axis=0)
    return total


def _partial_sums(
    law: MatrixLaw,
    table: SieveTable,
    seed: int,
    trials,
    plan: _ChainPlan | None = None,
    memo_bytes: int = DEFAULT_MEMO_BYTES,
) -> np.ndarray:
    """S_f(x) for the given trial indices, shape (len(trials), d, d)."""
    if plan is None:
        plan = _ChainPlan(table)
    d = law.dim
    if plan.n_squarefree == 0:  # x = 1: only f(1) survives
        dtype = np.float64 if law.field_flag == "REAL" else np.complex128
        return np.tile(np.eye(d, dtype=dtype), (len(trials), 1, 1))
    fp = _draw_factor_matrices(law, seed, trials, plan.n_primes)
    if plan.n_squarefree * d * d * fp.itemsize * fp.shape[0] <= memo_bytes:
        return _sums_memoized(law, plan, fp)
    return _sums_streaming(law, plan, fp, table)


def mc_partial_sum(
    law: MatrixLaw,
    table: SieveTable,
    seed: int,
    trial_index: int,
    memo_bytes: int = DEFAULT_MEMO_BYTES,
) -> np.ndarray:
    """One realization of S_f(x) = sum_{n<=x, squarefree} f(n), with f(1) = I.

    Draws one i.i.d. matrix per prime p <= x from the law (stream keyed by
    (seed, trial_index, prime)) and assembles every squarefree f(n) through
    the chain f(n) = f(n / P(n)) f(P(n)).
    """
    return _partial_sums(law, table, seed, [trial_index], memo_bytes=memo_bytes)[0]


def _resolve_threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("MATMULT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def mc_moment(
    law: MatrixLaw,
    table: SieveTable,
    k: int,
    trials: int,
    seed: int,
    memo_bytes: int = DEFAULT_MEMO_BYTES,
    chunk_bytes: int = DEFAULT_CHUNK_BYTES,
    threads: int | None = None,
) -> MomentReport:
    """Monte Carlo estimate of E||S_f(x)||_HS^{2k} with its standard error.

    Deterministic given (law, x, k, trials, seed): trials are keyed streams,
    chunking only splits the trial axis, and the reduction runs in trial
    order, so thread count and chunk size never change the result.
    """
    if trials < 2:
        raise InvariantError("need at least 2 trials for a standard error")
    if k < 1:
        raise InvariantError("k must be >= 1")
    plan = _ChainPlan(table)
    d = law.dim
    itemsize = 8 if law.field_flag == "REAL" else 16
    per_trial = max(plan.n_squarefree, 1) * d * d * itemsize
    chunk = int(min(trials, max(1, chunk_bytes // per_trial)))
    starts = list(range(0, trials, chunk))

    def run(start):
        idx = range(start, min(start + chunk, trials))
        sums = _partial_sums(law, table, seed, idx, plan=plan, memo_bytes=memo_bytes)
        return hs_norm_sq(sums) ** k

    n_workers = min(_resolve_threads(threads), len(starts))
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            pieces = list(pool.map(run, starts))
    else:
        pieces = [run(s) for s in starts]
    vals = np.concatenate(pieces)
    est = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(trials))
    return MomentReport(
        x=table.x_max, k=k, mc_estimate=est, mc_stderr=stderr, trials=trials, seed=seed
    )


def _squarefree_factor_ranks(x: int, primes) -> list:
    """(n, prime ranks) for every squarefree n <= x, ranks ascending."""
    out = []
    for n in range(1, x + 1):
        m = n
        ranks = []
        squarefree = True
        for i, p in enumerate(primes):
            p = int(p)
            if m % p == 0:
                m //= p
                if m % p == 0:
                    squarefree = False
                    break
                ranks.append(i)
        if squarefree and m == 1:
            out.append((n, ranks))
    return out


def brute_force_moment(law: MatrixLaw, x: int, k: int) -> float:
    """Exact E||S_f(x)||_HS^{2k} by enumerating all atom assignments.

    Every one of the m^pi(x) maps {p <= x} -> atoms is enumerated with its
    product weight; requires x <= 13 and m^pi(x) <= 1e7.
    """
    if x < 1 or x > 13:
        raise InvariantError("brute force enumeration is limited to 1 <= x <= 13")
    if k < 1:
        raise InvariantError("k must be >= 1")
    primes = [int(p) for p in primes_up_to(x)]
    n_p = len(primes)
    m = law.n_atoms
    total_assignments = m**n_p
    if total_assignments > BRUTE_FORCE_CAP:
        raise CapExceededError(
            f"{m}^{n_p} = {total_assignments} assignments exceed the cap {BRUTE_FORCE_CAP}"
        )
    factors = _squarefree_factor_ranks(x, primes)
    d = law.dim
    eye = np.eye(d, dtype=np.complex128)
    chunk = 1 << 15
    pieces = []
    for lo in range(0, total_assignments, chunk):
        idx_flat = np.arange(lo, min(lo + chunk, total_assignments))
        digits = np.empty((len(idx_flat), max(n_p, 1)), dtype=np.int64)
        rem = idx_flat.copy()
        for j in range(n_p - 1, -1, -1):
            digits[:, j] = rem % m
            rem //= m
        if n_p:
            w = np.prod(law.weights[digits[:, :n_p]], axis=1)
        else:
            w = np.ones(len(idx_flat))
        s = np.tile(eye, (len(idx_flat), 1, 1))
        for n, ranks in factors:
            if n == 1:
                continue
            f = law.atoms[digits[:, ranks[0]]]
            for r in ranks[1:]:
                f = np.einsum("bij,bjk->bik", f, law.atoms[digits[:, r]])
            s += f
        pieces.append(float(np.dot(w, hs_norm_sq(s) ** k)))
    return math.fsum(pieces)


def square_tuple_sum(x: int, k: int, m_weight: int) -> float:
    """sum over squarefree n_1 .. n_{2k} <= x with square product of
    m^{(omega(n_1) + ... + omega(n_{2k})) / 2}.

    A product of squarefree numbers is a square exactly when every prime
    divides an even number of them, so each n is encoded as a parity mask
    over the primes <= x and tuples are matched by XOR; halves of length k
    are enumerated and combined through a mask histogram.
    """
    if x < 1:
        raise InvariantError("x must be >= 1")
    if k < 1:
        raise InvariantError("k must be >= 1")
    if m_weight < 1:
        raise InvariantError("m_weight must be a positive integer")
    if float(x) ** (2 * k) > SQUARE_TUPLE_BUDGET:
        raise CapExceededError(
            f"x^(2k) = {float(x) ** (2 * k):g} exceeds the enumeration budget"
        )
    primes = [int(p) for p in primes_up_to(x)]
    masks = []
    omegas = []
    for n in range(1, x + 1):
        m = n
        mask = 0
        squarefree = True
        for i, p in enumerate(primes):
            if m % p == 0:
                m //= p
                if m % p == 0:
                    squarefree = False
                    break
                mask |= 1 << i
        if squarefree:
            masks.append(mask)
            omegas.append(bin(mask).count("1"))
    masks_arr = np.array(masks, dtype=np.int64)
    half_w = math.sqrt(m_weight) ** np.array(omegas)

    acc_mask = np.zeros(1, dtype=np.int64)
    acc_w = np.ones(1)
    for _ in range(k):
        acc_mask = (acc_mask[:, None] ^ masks_arr[None, :]).ravel()
        acc_w = (acc_w[:, None] * half_w[None, :]).ravel()
        if len(acc_mask) > 4 * 10**6:
            raise CapExceededError("half-tuple enumeration exceeds the memory guard")
    hist = np.bincount(acc_mask, weights=acc_w, minlength=1 << len(primes))
    return float(np.dot(hist, hist))
