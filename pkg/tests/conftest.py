"""Shared fixtures: reference laws, cached sieve tables, brute-force oracles."""

from pathlib import Path

import numpy as np
import pytest

import matmult as mm

LAWS_DIR = Path(__file__).resolve().parent.parent / "laws"


@pytest.fixture(scope="session")
def sl2_law():
    return mm.load_law(LAWS_DIR / "sl2.law.json")


@pytest.fixture(scope="session")
def rademacher_law():
    return mm.load_law(LAWS_DIR / "rademacher1d.law.json")


@pytest.fixture(scope="session")
def jordan_law():
    return mm.load_law(LAWS_DIR / "jordan_shear.law.json")


@pytest.fixture(scope="session")
def identity2_law():
    return mm.MatrixLaw(dim=2, atoms=np.eye(2, dtype=complex)[None], weights=np.array([1.0]))


@pytest.fixture(scope="session")
def zero2_law():
    return mm.MatrixLaw(dim=2, atoms=np.zeros((1, 2, 2), dtype=complex), weights=np.array([1.0]))


@pytest.fixture(scope="session")
def tables():
    """Lazy per-session cache of sieve tables keyed by x."""
    cache = {}

    def get(x):
        if x not in cache:
            cache[x] = mm.build_sieve(x)
        return cache[x]

    return get


def random_real_law(rng, d=None, n_atoms=None, max_d=3, max_atoms=4):
    """A random finitely supported real law with entries in [-1, 1]."""
    d = d if d is not None else int(rng.integers(1, max_d + 1))
    m = n_atoms if n_atoms is not None else int(rng.integers(1, max_atoms + 1))
    atoms = rng.uniform(-1.0, 1.0, size=(m, d, d)).astype(complex)
    w = rng.uniform(0.1, 1.0, size=m)
    w /= w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    return mm.MatrixLaw(dim=d, atoms=atoms, weights=w)


def random_complex_law(rng, d=None, n_atoms=None, max_d=2, max_atoms=3):
    d = d if d is not None else int(rng.integers(1, max_d + 1))
    m = n_atoms if n_atoms is not None else int(rng.integers(1, max_atoms + 1))
    atoms = rng.uniform(-1, 1, size=(m, d, d)) + 1j * rng.uniform(-1, 1, size=(m, d, d))
    w = rng.uniform(0.1, 1.0, size=m)
    w /= w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    return mm.MatrixLaw(dim=d, atoms=atoms, weights=w)


def word_moment(law, k, n):
    """E ||X_1 ... X_n||_HS^{2k} by enumerating all m^n atom words.

    Independent of the lift machinery: direct products with product weights.
    """
    if n == 0:
        return float(law.dim**k)
    m = law.n_atoms
    idx = np.indices((m,) * n).reshape(n, -1).T
    w = np.prod(law.weights[idx], axis=1)
    prod = law.atoms[idx[:, 0]]
    for t in range(1, n):
        prod = prod @ law.atoms[idx[:, t]]
    return float(np.dot(w, mm.hs_norm_sq(prod) ** k))
