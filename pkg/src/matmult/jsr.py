"""Spectral 2k-radii and joint-spectral-radius bracketing.

The spectral s-radius of a law is rho_s = lim_n E[||X_1...X_n||_HS^s]^{1/(sn)};
for even s = 2k it equals lambda_1^{1/2k} where lambda_1 is the leading
eigenvalue of the k-th symmetric-power lift of the transfer operator. It
increases in s and, for the uniform law on a finite set S, converges to the
joint spectral radius

    rho_inf(S) = lim_k sup { ||A_{i_1} ... A_{i_k}||^{1/k} : A_i in S },

which is norm-independent. ``gripenberg`` brackets rho_inf by branch and
bound: spectral radii of visited products certify the lower bound, the
pruning quantity min over prefixes of ||prefix||_HS^{1/len} certifies the
upper bound. Shrinking the gap parameter delta explores more products and
tightens both sides; at frontier exhaustion the bracket width is at most
delta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError, IntegrityError, InvariantError
from .law import MatrixLaw
from .lift import build_transfer, exact_moment_sequence

DEFAULT_DELTA = 1e-3
DEFAULT_MAX_DEPTH = 16
DEFAULT_NODE_BUDGET = 10**7


def spectral_radius(a: np.ndarray) -> float:
    """max |eigenvalue| of a square matrix."""
    return float(np.max(np.abs(np.linalg.eigvals(a))))


@dataclass(frozen=True)
class JsrBounds:
    """Certified bracket lower <= rho_inf <= upper from branch and bound."""

    lower: float
    upper: float
    depth: int
    delta: float
    complete: bool

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise IntegrityError("joint spectral radius bounds must be finite")
        if self.lower > self.upper + 1e-12:
            raise IntegrityError(f"lower bound {self.lower} exceeds upper bound {self.upper}")


@dataclass(frozen=True)
class RadiusLadder:
    """rho_{2k} for k = 1..k_max, plus optional finite-n probe values."""

    rho_values: tuple
    probes: dict | None = None


def rho_2k(law: MatrixLaw, k: int, dim_cap: int = 2000) -> float:
    """rho_{2k} = lambda_1^{1/2k} from the k-th lift's leading eigenvalue.

    The leading eigenvalue must be real and non-negative (the lift comes
    from a completely positive map); violations raise IntegrityError.
    """
    op = build_transfer(law, k, flavor="complex", dim_cap=dim_cap)
    lams = np.linalg.eigvals(op.rep)
    lead = lams[int(np.argmax(lams.real))]
    scale = 1.0 + float(np.max(np.abs(lams)))
    if abs(lead.imag) > 1e-10 * scale or lead.real < -1e-10 * scale:
        raise IntegrityError(
            f"leading eigenvalue {lead:.6g} is not real non-negative; investigate the law"
        )
    if float(np.max(np.abs(lams))) > lead.real + 1e-10 * scale:
        raise IntegrityError(
            "an eigenvalue has larger modulus than the leading real eigenvalue; investigate"
        )
    return max(lead.real, 0.0) ** (1.0 / (2 * k))


def _canonical_sign(w: np.ndarray) -> bytes:
    """Byte key identifying w up to sign (products +-W bound rho identically)."""
    flat = w.ravel()
    nz = np.flatnonzero(flat != 0)
    if len(nz):
        v = flat[nz[0]]
        if v.real < 0 or (v.real == 0 and v.imag < 0):
            w = -w
    return w.tobytes()


def gripenberg(
    atoms,
    delta: float = DEFAULT_DELTA,
    max_depth: int = DEFAULT_MAX_DEPTH,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> JsrBounds:
    """Bracket the joint spectral radius of a finite matrix set.

    Breadth-first over products: every visited product W of length n updates
    lower = max rho(W)^{1/n}; a product is kept for extension only while
    sigma(W) = min over prefixes of ||prefix||_HS^{1/len} stays above
    lower + delta (each level prunes against the level's final lower bound,
    so the result is schedule-independent). The upper bound is
    max(lower + delta, max sigma over the surviving frontier); it equals
    lower + delta when the frontier dies out.

    If the node budget is exhausted the best valid bounds so far are
    returned flagged incomplete.
    """
    mats = [np.asarray(a, dtype=np.complex128) for a in atoms]
    if not mats:
        raise InvariantError("need a non-empty set of matrices")
    shape = mats[0].shape
    if any(m.shape != shape or m.ndim != 2 or m.shape[0] != m.shape[1] for m in mats):
        raise InvariantError("all matrices must be square and share a dimension")
    if delta <= 0:
        raise InvariantError("delta must be positive")

    lower = 0.0
    visited = 0
    frontier = []
    seen = {}
    for m in mats:
        visited += 1
        lower = max(lower, spectral_radius(m))
        sigma = float(np.linalg.norm(m))
        key = _canonical_sign(m)
        if key not in seen or seen[key][0] < sigma:
            seen[key] = (sigma, m)
    frontier = [(sig, m) for sig, m in seen.values() if sig > lower + delta]
    depth = 1
    complete = True

    while frontier and depth < max_depth:
        if visited + len(frontier) * len(mats) > node_budget:
            complete = False
            break
        depth += 1
        children = {}
        for sigma, w in frontier:
            for a in mats:
                prod = w @ a
                key = _canonical_sign(prod)
                sig = min(sigma, float(np.linalg.norm(prod)) ** (1.0 / depth))
                prev = children.get(key)
                if prev is None or prev[0] < sig:
                    children[key] = (sig, prod)
        visited += len(children)
        for _, prod in children.values():
            lower = max(lower, spectral_radius(prod) ** (1.0 / depth))
        frontier = [(sig, w) for sig, w in children.values() if sig > lower + delta]

    if frontier:
        upper = max(lower + delta, max(sig for sig, _ in frontier))
    else:
        upper = lower + delta
    return JsrBounds(lower=lower, upper=upper, depth=depth, delta=delta, complete=complete)


def rho_ladder(
    law: MatrixLaw, k_max: int, n_probe: int | None = None, dim_cap: int = 2000
) -> RadiusLadder:
    """rho_2, rho_4, ..., rho_{2 k_max}, monotone non-decreasing.

    With ``n_probe`` set, also reports the finite-n values a_n^{1/(2kn)} at
    n = n_probe for each k, which converge to rho_{2k} from the moment
    sequence side (Gelfand-style).
    """
    if k_max < 1:
        raise InvariantError("k_max must be >= 1")
    values = tuple(rho_2k(law, k, dim_cap=dim_cap) for k in range(1, k_max + 1))
    probes = None
    if n_probe is not None:
        if n_probe < 1:
            raise InvariantError("n_probe must be >= 1")
        probes = {}
        for k in range(1, k_max + 1):
            op = build_transfer(law, k, flavor="complex", dim_cap=dim_cap)
            seq = exact_moment_sequence(op, n_probe)
            a_n = seq.values[n_probe]
            probes[2 * k] = float(a_n ** (1.0 / (2 * k * n_probe))) if a_n > 0 else 0.0
    return RadiusLadder(rho_values=values, probes=probes)
