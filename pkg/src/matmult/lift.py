"""Transfer operators on matrix space and their symmetric-power lifts.

For a law X on d x d matrices, the transfer operator sends A to E[X* A X].
Its k-th symmetric-power lift is the restriction of

    v  ->  E[ (X*)^{tensor k}  v  X^{tensor k} ]

to the symmetric subspace Sym^k(W), where W is either all of C^{dxd}
(COMPLEX flavor, dim d^2) or the complex-symmetric matrices (REAL flavor,
dim d(d+1)/2, valid when the law is real-valued). The lift is an l x l
matrix with l = binom(k + dim W - 1, k).

The Hilbert-Schmidt moment sequence

    a_n = E || X_1 ... X_n ||_HS^{2k}

equals the trace functional applied to the n-th iterate of the lift on the
coordinates of I_d^{tensor k}, so (a_n) satisfies the linear recurrence
given by the lift's characteristic polynomial. ``spectral_decompose`` fits
the unique polynomials g_i with a_n = sum_i g_i(n) lambda_i^n, which feed
the Selberg-Delange constants in :mod:`matmult.selberg`.

Basis convention: Sym^k(W) is indexed by non-decreasing index multisets over
a basis of W, embedded in W^{tensor k} as the sum over distinct arrangements
(so coordinates of a symmetric tensor are read off at the sorted word, and
the trace functional carries the multinomial arrangement count).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError, IllConditionedError, IntegrityError, InvariantError
from .law import MatrixLaw

DEFAULT_DIM_CAP = 2000
_EINSUM_LETTERS = "abcdefgh"

REAL = "REAL"
COMPLEX = "COMPLEX"


def flavor_space_dim(d: int, flavor: str) -> int:
    """Dimension of the underlying matrix space W for one tensor factor."""
    if flavor == COMPLEX:
        return d * d
    if flavor == REAL:
        return d * (d + 1) // 2
    raise InvariantError(f"unknown flavor {flavor!r}")


def lift_dim(d: int, k: int, flavor: str) -> int:
    """l = binom(k + dim W - 1, k)."""
    return math.comb(k + flavor_space_dim(d, flavor) - 1, k)


def _flavor_basis(d: int, flavor: str):
    """Basis matrices of W plus the coordinates of I_d and the entrywise traces.

    COMPLEX: matrix units e_ij in lexicographic (i, j) order.
    REAL: e_ii, and e_ij + e_ji for i < j, in lexicographic (i, j) order
    (for d = 2 this is [[1,0],[0,0]], [[0,1],[1,0]], [[0,0],[0,1]]).
    """
    mats = []
    iota = []
    traces = []
    if flavor == COMPLEX:
        for i in range(d):
            for j in range(d):
                m = np.zeros((d, d), dtype=np.complex128)
                m[i, j] = 1.0
                mats.append(m)
                iota.append(1.0 if i == j else 0.0)
                traces.append(1.0 if i == j else 0.0)
    else:
        for i in range(d):
            for j in range(i, d):
                m = np.zeros((d, d), dtype=np.complex128)
                if i == j:
                    m[i, i] = 1.0
                    iota.append(1.0)
                    traces.append(1.0)
                else:
                    m[i, j] = 1.0
                    m[j, i] = 1.0
                    iota.append(0.0)
                    traces.append(0.0)
                mats.append(m)
    return np.array(mats), np.array(iota), np.array(traces)


def _coeff_matrix(atom: np.ndarray, d: int, flavor: str) -> np.ndarray:
    """Matrix K of w -> A* w A on the flavor basis (columns are images)."""
    if flavor == COMPLEX:
        # K[(a,b),(i,j)] = conj(A[i,a]) * A[j,b] since (A* e_ij A)_{ab} has that value.
        return np.einsum("ia,jb->abij", atom.conj(), atom).reshape(d * d, d * d)
    a = atom.real
    mats, _, _ = _flavor_basis(d, REAL)
    dim = mats.shape[0]
    imgs = np.einsum("pi,bij,jq->bpq", a.T, mats, a)
    cols = np.empty((dim, dim), dtype=np.complex128)
    pairs = [(i, j) for i in range(d) for j in range(i, d)]
    for c in range(dim):
        cols[:, c] = [imgs[c, i, j] for (i, j) in pairs]
    return cols


def _multiset_mult(s) -> int:
    """Number of distinct arrangements of the multiset s."""
    n = math.factorial(len(s))
    for _, grp in itertools.groupby(s):
        n //= math.factorial(sum(1 for _ in grp))
    return n


@dataclass(frozen=True)
class LiftedOperator:
    """Symmetric-power lift of the transfer operator of a law."""

    dim: int
    k: int
    field_flavor: str
    basis: tuple
    rep: np.ndarray
    l: int
    identity_vec: np.ndarray
    trace_vec: np.ndarray

    def __post_init__(self):
        expected = lift_dim(self.dim, self.k, self.field_flavor)
        if self.l != expected or self.rep.shape != (self.l, self.l):
            raise InvariantError(
                f"lift dimension {self.rep.shape} does not match binomial formula l={expected}"
            )
        if not np.all(np.isfinite(self.rep.view(np.float64))):
            raise InvariantError("lift matrix has non-finite entries")
        for arr in (self.rep, self.identity_vec, self.trace_vec):
            arr.setflags(write=False)


def build_transfer(
    law: MatrixLaw,
    k: int,
    flavor: str = "auto",
    dim_cap: int = DEFAULT_DIM_CAP,
) -> LiftedOperator:
    """Build the k-th symmetric-power lift of A -> E[X* A X].

    For k=1 COMPLEX the result is exactly the d^2 x d^2 matrix of
    A -> sum_i p_i B_i* A B_i in the matrix-unit basis.
    """
    if k < 1:
        raise InvariantError("k must be a positive integer")
    flavor = flavor.upper()
    if flavor == "AUTO":
        flavor = REAL if law.field_flag == REAL else COMPLEX
    if flavor == REAL and law.field_flag != REAL:
        raise InvariantError("REAL flavor requires a law with real atoms")
    d = law.dim
    big_dim = flavor_space_dim(d, flavor)
    l = lift_dim(d, k, flavor)
    if l > dim_cap:
        raise CapExceededError(f"lift dimension l={l} exceeds cap {dim_cap}")
    n_words = big_dim**k
    if l * n_words > 5e7:
        raise CapExceededError(
            f"symmetrization workspace {l}x{n_words} exceeds the memory guard"
        )

    msets = list(itertools.combinations_with_replacement(range(big_dim), k))
    radix = big_dim ** np.arange(k - 1, -1, -1)
    sorted_pos = np.array([int(np.dot(s, radix)) for s in msets])

    # Arrangement indicator of each multiset inside the word basis.
    embed = np.zeros((l, n_words))
    for c, s in enumerate(msets):
        for w in set(itertools.permutations(s)):
            embed[c, int(np.dot(w, radix))] = 1.0

    ins = _EINSUM_LETTERS[:k]
    outs = ins.upper()
    subs = (
        "z" + ins + "," + ",".join(o + i for o, i in zip(outs, ins)) + "->z" + outs
    )
    tensor_shape = (l,) + (big_dim,) * k

    rep = np.zeros((l, l), dtype=np.complex128)
    v0 = embed.reshape(tensor_shape).astype(np.complex128)
    for atom, p in zip(law.atoms, law.weights):
        kmat = _coeff_matrix(atom, d, flavor)
        lifted = np.einsum(subs, v0, *([kmat] * k), optimize=True)
        rep += p * lifted.reshape(l, n_words)[:, sorted_pos].T

    _, iota, traces = _flavor_basis(d, flavor)
    identity_vec = np.array([np.prod(iota[list(s)]) for s in msets], dtype=np.complex128)
    trace_vec = np.array(
        [_multiset_mult(s) * np.prod(traces[list(s)]) for s in msets],
        dtype=np.complex128,
    )
    return LiftedOperator(
        dim=d,
        k=k,
        field_flavor=flavor,
        basis=tuple(msets),
        rep=rep,
        l=l,
        identity_vec=identity_vec,
        trace_vec=trace_vec,
    )


@dataclass(frozen=True)
class CharPoly:
    """Monic characteristic polynomial x^l + c_1 x^{l-1} + ... + c_l."""

    coeffs: np.ndarray  # (c_1, ..., c_l)

    @property
    def l(self) -> int:
        return len(self.coeffs)

    def __call__(self, x):
        return np.polyval(np.concatenate(([1.0], self.coeffs)), x)


def char_poly(op: LiftedOperator, tol: float = 1e-8) -> CharPoly:
    """Characteristic polynomial via the Faddeev-LeVerrier trace recursion.

    Coefficients stay exact for integer lifts, which keeps recurrence
    residuals bit-stable. The result is validated against the computed
    eigenvalues: |p(lambda)| <= tol * (1 + |lambda|)^l.
    """
    a = op.rep
    l = op.l
    coeffs = np.empty(l, dtype=np.complex128)
    n = np.zeros_like(a)
    c = 1.0 + 0.0j
    eye = np.eye(l)
    for j in range(1, l + 1):
        n = a @ (n + c * eye)
        c = -np.trace(n) / j
        coeffs[j - 1] = c
    if not np.all(np.isfinite(coeffs.view(np.float64))):
        raise IntegrityError("characteristic polynomial overflowed to non-finite coefficients")
    cp = CharPoly(coeffs=coeffs)
    lams = np.linalg.eigvals(a)
    bound = tol * (1.0 + np.abs(lams)) ** l
    vals = np.abs(cp(lams))
    if np.any(vals > bound):
        worst = int(np.argmax(vals / bound))
        raise IntegrityError(
            f"characteristic polynomial fails eigenvalue check at lambda={lams[worst]:.6g}: "
            f"|p|={vals[worst]:.3g} > {bound[worst]:.3g}"
        )
    return cp


@dataclass(frozen=True)
class MomentSequence:
    """a_n = E ||X_1 ... X_n||_HS^{2k} for n = 0 .. N; a_0 = d^k."""

    k: int
    dim: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        scale = max(1.0, float(np.max(np.abs(vals))) if len(vals) else 1.0)
        if np.any(vals < -1e-9 * scale):
            raise InvariantError("moment sequence has a negative entry")
        if len(vals) and vals[0] != float(self.dim**self.k):
            raise InvariantError(f"a_0 = {vals[0]!r} but should be d^k = {self.dim ** self.k}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)


def exact_moment_sequence(op: LiftedOperator, n_max: int) -> MomentSequence:
    """a_0 .. a_{n_max} by iterating the lift on the identity coordinates."""
    if n_max < 0:
        raise InvariantError("n_max must be >= 0")
    v = op.identity_vec.astype(np.complex128)
    out = np.empty(n_max + 1)
    for n in range(n_max + 1):
        if n:
            v = op.rep @ v
        if not np.all(np.isfinite(v.view(np.float64))):
            raise InvariantError(f"moment iteration became non-finite at n={n}")
        a = complex(np.dot(op.trace_vec, v))
        if abs(a.imag) > 1e-10 * max(1.0, abs(a.real)):
            raise IntegrityError(f"moment a_{n} has imaginary residue {a.imag:.3g}")
        out[n] = a.real
    return MomentSequence(k=op.k, dim=op.dim, values=out)


def verify_recurrence(seq: MomentSequence, cp: CharPoly) -> np.ndarray:
    """Relative residuals |a_{n+l} + c_1 a_{n+l-1} + ... + c_l a_n| / max(1, a_{n+l})."""
    a = seq.values
    l = cp.l
    if len(a) < l + 1:
        raise InvariantError(f"sequence of length {len(a)} is too short for recurrence length {l}")
    full = np.concatenate(([1.0 + 0.0j], cp.coeffs))
    res = np.empty(len(a) - l)
    for n in range(len(res)):
        window = a[n : n + l + 1][::-1]  # a_{n+l}, a_{n+l-1}, ..., a_n
        res[n] = abs(np.dot(full, window)) / max(1.0, a[n + l])
    return res


@dataclass(frozen=True)
class SpectralData:
    """Distinct eigenvalues of a lift plus the fitted weight polynomials.

    ``lambdas`` are sorted by descending real part (ties by descending
    imaginary part). ``g_polys[i]`` holds ascending coefficients of g_i with
    a_n = sum_i g_i(n) lambda_i^n and deg g_i < mults[i]; ``betas[i]`` is the
    constant coefficient (the scalar weight alpha_i * Tr(v_i) when the lift
    is diagonalizable). ``R`` is the largest real part among eigenvalues with
    deg g_i > 0 (None when every degree is 0); L1/L2/L3 collect the indices
    with real part above / at / below R, d_max the top degree on L2 and
    L2_prime its attaining set.
    """

    lambdas: np.ndarray
    mults: tuple
    betas: np.ndarray
    g_polys: tuple
    degrees: tuple
    R: float | None
    L1: tuple
    L2: tuple
    L2_prime: tuple
    L3: tuple
    d_max: int

    def evaluate(self, n) -> np.ndarray:
        """Reconstruct a_n = sum_i g_i(n) lambda_i^n (real part)."""
        n = np.asarray(n, dtype=np.float64)
        total = np.zeros(n.shape, dtype=np.complex128)
        for lam, g in zip(self.lambdas, self.g_polys):
            total += np.polyval(g[::-1], n) * lam**n
        return total.real

    @property
    def leading_coeffs(self) -> np.ndarray:
        return np.array([g[deg] for g, deg in zip(self.g_polys, self.degrees)])


def _cluster_eigenvalues(lams: np.ndarray, radius: float):
    """Union-find clustering of eigenvalues within ``radius``."""
    t = len(lams)
    parent = list(range(t))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(t):
        for j in range(i + 1, t):
            if abs(lams[i] - lams[j]) <= radius:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups = {}
    for i in range(t):
        groups.setdefault(find(i), []).append(i)
    reps = [(np.mean(lams[idx]), len(idx)) for idx in groups.values()]
    reps.sort(key=lambda p: (-p[0].real, -p[0].imag))
    return reps


def spectral_decompose(
    op: LiftedOperator,
    seq: MomentSequence,
    cluster_radius: float | None = None,
    cond_cap: float = 1e12,
    recon_tol: float = 1e-8,
    degree_tol: float = 1e-7,
) -> SpectralData:
    """Cluster the lift's eigenvalues and fit a_n = sum_i g_i(n) lambda_i^n.

    The g_i come from solving the confluent Vandermonde system on
    n = 0 .. l-1, which is exactly what makes them unique; eigenvectors are
    never needed. Raises IllConditionedError when the system's condition
    number exceeds ``cond_cap`` (advice: tighten the law's entries or pass an
    explicit ``cluster_radius`` if eigenvalue clustering looks ambiguous).
    """
    l = op.l
    if len(seq) < l:
        raise InvariantError(f"need at least l={l} moment values, got {len(seq)}")
    lams = np.linalg.eigvals(op.rep)
    scale = float(np.max(np.abs(lams))) if l else 0.0
    radius = cluster_radius if cluster_radius is not None else 1e-8 * (1.0 + scale)
    clusters = _cluster_eigenvalues(lams, radius)

    cols = []
    meta = []
    ns = np.arange(l, dtype=np.float64)
    for lam, mult in clusters:
        powers = lam**ns
        for q in range(mult):
            cols.append((ns**q) * powers)
            meta.append((lam, q))
    vand = np.array(cols).T
    cond = np.linalg.cond(vand)
    if cond > cond_cap:
        raise IllConditionedError(
            f"confluent Vandermonde condition number {cond:.3g} exceeds {cond_cap:.3g}; "
            "eigenvalue clustering may be ambiguous (try a different cluster_radius) "
            "or the problem needs higher precision"
        )
    sol = np.linalg.solve(vand, seq.values[:l].astype(np.complex128))

    g_polys = []
    degrees = []
    pos = 0
    for lam, mult in clusters:
        g = sol[pos : pos + mult]
        pos += mult
        gscale = max(1.0, float(np.max(np.abs(g))))
        deg = 0
        for q in range(mult - 1, -1, -1):
            if abs(g[q]) > degree_tol * gscale:
                deg = q
                break
        g_polys.append(g)
        degrees.append(deg)

    lam_arr = np.array([lam for lam, _ in clusters])
    mults = tuple(int(m) for _, m in clusters)
    betas = np.array([g[0] for g in g_polys])

    _check_conjugate_pairs(lam_arr, mults, g_polys, radius)

    defective = [i for i in range(len(clusters)) if degrees[i] > 0]
    if defective:
        big_r = max(lam_arr[i].real for i in defective)
        l1 = tuple(i for i in range(len(clusters)) if lam_arr[i].real > big_r + radius)
        l2 = tuple(
            i for i in range(len(clusters)) if abs(lam_arr[i].real - big_r) <= radius
        )
        l3 = tuple(i for i in range(len(clusters)) if lam_arr[i].real < big_r - radius)
        d_max = max(degrees[i] for i in l2)
        l2p = tuple(i for i in l2 if degrees[i] == d_max)
        big_r_out: float | None = float(big_r)
    else:
        big_r_out = None
        l1 = tuple(range(len(clusters)))
        l2 = ()
        l2p = ()
        l3 = ()
        d_max = 0

    sd = SpectralData(
        lambdas=lam_arr,
        mults=mults,
        betas=betas,
        g_polys=tuple(g_polys),
        degrees=tuple(degrees),
        R=big_r_out,
        L1=l1,
        L2=l2,
        L2_prime=l2p,
        L3=l3,
        d_max=d_max,
    )

    check_n = min(len(seq) - 1, 2 * l)
    recon = sd.evaluate(np.arange(check_n + 1))
    err = np.abs(recon - seq.values[: check_n + 1]) / np.maximum(
        1.0, np.abs(seq.values[: check_n + 1])
    )
    if np.any(err > recon_tol):
        raise IllConditionedError(
            f"spectral reconstruction misses a_n by {float(np.max(err)):.3g} "
            f"(tolerance {recon_tol:g}); eigenvalue clustering may be ambiguous"
        )
    return sd


def _check_conjugate_pairs(lams, mults, g_polys, radius):
    """Non-real eigenvalues must pair up with conjugate multiplicities/weights."""
    tol = max(radius, 1e-8)
    for i, lam in enumerate(lams):
        if abs(lam.imag) <= tol:
            continue
        match = None
        for j, other in enumerate(lams):
            if abs(other - lam.conjugate()) <= tol:
                match = j
                break
        if match is None or mults[match] != mults[i]:
            raise IntegrityError(
                f"eigenvalue {lam:.6g} lacks a conjugate partner; investigate the lift"
            )
        gi, gj = g_polys[i], g_polys[match]
        gscale = max(1.0, float(np.max(np.abs(gi))))
        if np.max(np.abs(gi - gj.conjugate())) > 1e-6 * gscale:
            raise IntegrityError(
                f"weights of conjugate eigenvalues {lam:.6g} are not conjugate; investigate"
            )


def minimal_recurrence_length(seq: MomentSequence, tol: float = 1e-8) -> int | None:
    """Shortest linear recurrence the sequence satisfies, by a Hankel rank test.

    Reports the smallest r such that a least-squares fit of
    a_{n+r} = -(c_1 a_{n+r-1} + ... + c_r a_n) leaves relative residuals
    below ``tol`` on all available n, or None if no r up to len(seq)//2 works.
    This is a numerical report, not an optimality certificate.
    """
    a = seq.values
    for r in range(1, len(a) // 2 + 1):
        rows = len(a) - r
        lhs = np.empty((rows, r))
        for n in range(rows):
            lhs[n] = a[n : n + r][::-1]
        rhs = -a[r:]
        coef, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
        resid = np.abs(lhs @ coef - rhs) / np.maximum(1.0, np.abs(a[r:]))
        if np.max(resid) <= tol:
            return r
    return None
