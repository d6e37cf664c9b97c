"""Finitely supported probability laws on complex d x d matrices.

A law is an ordered list of atom matrices B_1 .. B_m with strictly positive
weights p_1 .. p_m summing to one. Laws are loaded from ``.law.json`` files:

    {"dim": d,
     "atoms": [ [[ [re, im], ... d entries ], ... d rows ], ... m atoms ],
     "weights": ["1/8", ...]}

Complex entries are [re, im] pairs; weights may be floats or exact fraction
strings such as "1/8" (preferred, parsed exactly). Atom order is preserved.

A law is immutable after construction and safe to share across threads.
Sampling is counter-based: the atom drawn for a (seed, index) pair is a pure
function of those two integers, identical across runs and platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import rng
from .errors import InvariantError, LawFormatError

WEIGHT_SUM_TOL = 1e-12
REAL_ENTRY_TOL = 1e-14
SYMMETRY_MATCH_TOL = 1e-14

# Stream id reserved for law sampling, far away from the Monte Carlo
# per-trial streams (which are numbered 0, 1, 2, ...).
_SAMPLE_STREAM = 1 << 62


def hs_norm_sq(a: np.ndarray) -> np.ndarray:
    """Squared Hilbert-Schmidt (Frobenius) norm over the last two axes."""
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return np.sum(a.real * a.real + a.imag * a.imag, axis=(-2, -1))
    return np.sum(a * a, axis=(-2, -1))


@dataclass(frozen=True)
class MatrixLaw:
    """Finitely supported law: ``atoms`` of shape (m, d, d), ``weights`` (m,)."""

    dim: int
    atoms: np.ndarray
    weights: np.ndarray
    field_flag: str = field(init=False)
    _cum_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=np.complex128)
        weights = np.asarray(self.weights, dtype=np.float64)
        if atoms.ndim != 3 or atoms.shape[1] != atoms.shape[2]:
            raise InvariantError(f"atoms must have shape (m, d, d), got {atoms.shape}")
        d = int(self.dim)
        if d < 1 or atoms.shape[1] != d:
            raise InvariantError(f"atom dimension {atoms.shape[1]}x{atoms.shape[2]} does not match dim={d}")
        if weights.ndim != 1 or weights.shape[0] != atoms.shape[0]:
            raise InvariantError("need exactly one weight per atom")
        if atoms.shape[0] == 0:
            raise InvariantError("a law needs at least one atom")
        if not np.all(weights > 0):
            raise InvariantError("all weights must be strictly positive")
        total = float(weights.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise InvariantError(f"weights sum to {total!r}, not 1 within {WEIGHT_SUM_TOL}")
        if not np.all(np.isfinite(atoms.view(np.float64))):
            raise InvariantError("atom entries must be finite")
        flag = "REAL" if np.max(np.abs(atoms.imag)) <= REAL_ENTRY_TOL else "COMPLEX"
        atoms.setflags(write=False)
        weights.setflags(write=False)
        cum = np.cumsum(weights)
        cum.setflags(write=False)
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "field_flag", flag)
        object.__setattr__(self, "_cum_weights", cum)

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[0]

    def real_atoms(self) -> np.ndarray:
        """The atoms as a real array; only valid when field_flag == 'REAL'."""
        if self.field_flag != "REAL":
            raise InvariantError("law has complex atoms")
        return self.atoms.real


@dataclass(frozen=True)
class ValidationReport:
    """Sanity summary for a law: mean matrix, centering/symmetry flags, E||X||^2."""

    mean: np.ndarray
    is_mean_zero: bool
    is_symmetric_law: bool
    second_hs_moment: float


def _parse_weight(w) -> float:
    if isinstance(w, str):
        try:
            return float(Fraction(w))
        except (ValueError, ZeroDivisionError) as exc:
            raise LawFormatError(f"cannot parse weight {w!r} as a fraction") from exc
    if isinstance(w, (int, float)) and not isinstance(w, bool):
        return float(w)
    raise LawFormatError(f"weight {w!r} is neither a number nor a fraction string")


def _parse_entry(e) -> complex:
    if (
        isinstance(e, (list, tuple))
        and len(e) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in e)
    ):
        return complex(e[0], e[1])
    raise LawFormatError(f"matrix entry {e!r} is not a [re, im] pair")


def law_from_dict(obj) -> MatrixLaw:
    """Build a MatrixLaw from a decoded law-file dictionary."""
    if not isinstance(obj, dict):
        raise LawFormatError("law file must contain a JSON object")
    try:
        d = obj["dim"]
        raw_atoms = obj["atoms"]
        raw_weights = obj["weights"]
    except KeyError as exc:
        raise LawFormatError(f"law file is missing key {exc.args[0]!r}") from exc
    if not isinstance(d, int) or d < 1:
        raise LawFormatError(f"dim must be a positive integer, got {d!r}")
    if not isinstance(raw_atoms, list) or not raw_atoms:
        raise LawFormatError("atoms must be a non-empty list")
    atoms = np.empty((len(raw_atoms), d, d), dtype=np.complex128)
    for a, rows in enumerate(raw_atoms):
        if not isinstance(rows, list) or len(rows) != d or any(len(r) != d for r in rows):
            raise LawFormatError(f"atom {a} is not a {d}x{d} matrix")
        for i, row in enumerate(rows):
            for j, entry in enumerate(row):
                atoms[a, i, j] = _parse_entry(entry)
    if not isinstance(raw_weights, list):
        raise LawFormatError("weights must be a list")
    weights = np.array([_parse_weight(w) for w in raw_weights], dtype=np.float64)
    return MatrixLaw(dim=d, atoms=atoms, weights=weights)


def load_law(path) -> MatrixLaw:
    """Load and validate a law file; atom order is preserved from the file."""
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LawFormatError(f"{path}: not valid JSON ({exc})") from exc
    return law_from_dict(obj)


def validate_law(law: MatrixLaw, tol: float = 1e-12) -> ValidationReport:
    """Compute the mean, mean-zero / symmetric-law flags and E||X||_HS^2.

    The law is symmetric when the weighted atom multiset is invariant under
    B -> -B; atoms are matched to negated atoms by exact-within-1e-14 entry
    comparison with equal weights. Symmetry implies mean zero, so the flag
    combination (symmetric, not mean zero) cannot occur.
    """
    mean = np.einsum("a,aij->ij", law.weights, law.atoms)
    is_mean_zero = float(np.sqrt(hs_norm_sq(mean))) <= tol
    second = float(np.dot(law.weights, hs_norm_sq(law.atoms)))

    unmatched = set(range(law.n_atoms))
    symmetric = True
    for i in range(law.n_atoms):
        if i not in unmatched:
            continue
        target = -law.atoms[i]
        partner = None
        for j in unmatched:
            if (
                np.max(np.abs(law.atoms[j] - target)) <= SYMMETRY_MATCH_TOL
                and abs(law.weights[j] - law.weights[i]) <= 1e-15
            ):
                partner = j
                break
        if partner is None:
            symmetric = False
            break
        unmatched.discard(i)
        unmatched.discard(partner)
    mean.setflags(write=False)
    return ValidationReport(
        mean=mean,
        is_mean_zero=is_mean_zero,
        is_symmetric_law=symmetric,
        second_hs_moment=second,
    )


def atom_indices(law: MatrixLaw, seed: int, start: int, count: int) -> np.ndarray:
    """Indices of the atoms drawn at positions start..start+count-1 of the law's
    sampling stream for this seed."""
    u = rng.uniforms(seed, _SAMPLE_STREAM, count, start=start)
    idx = np.searchsorted(law._cum_weights, u, side="right")
    return np.minimum(idx, law.n_atoms - 1)


def sample(law: MatrixLaw, seed: int, index: int) -> np.ndarray:
    """The atom drawn at position ``index``; pure in (law, seed, index)."""
    return law.atoms[int(atom_indices(law, seed, index, 1)[0])]
