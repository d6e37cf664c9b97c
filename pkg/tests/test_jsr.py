import itertools
import math

import numpy as np
import pytest

import matmult as mm
from matmult.errors import IntegrityError, InvariantError


def test_identity_set_collapses_within_delta():
    bounds = mm.gripenberg([np.eye(2)], delta=0.05, max_depth=16)
    assert bounds.lower == pytest.approx(1.0, abs=1e-12)
    assert bounds.upper <= 1.0 + bounds.delta + 1e-12
    assert bounds.complete


def test_disjoint_diagonal_set_collapses_to_3():
    s = [np.diag([2.0, 0.0]), np.diag([0.0, 3.0])]
    bounds = mm.gripenberg(s, delta=1e-3)
    assert bounds.lower == pytest.approx(3.0, abs=1e-9)
    assert bounds.upper <= 3.0 + bounds.delta + 1e-9
    # brute-force all words of length <= 4: the singleton already attains it
    best = max(
        mm.spectral_radius(np.linalg.multi_dot(w) if len(w) > 1 else w[0]) ** (1 / len(w))
        for n in range(1, 5)
        for w in itertools.product(s, repeat=n)
    )
    assert best == pytest.approx(3.0, abs=1e-9)


def test_sl2_bracket(sl2_law):
    bounds = mm.gripenberg(sl2_law.atoms, delta=0.01, max_depth=12)
    assert bounds.lower <= 1.34809 <= bounds.upper
    assert bounds.upper - bounds.lower <= 0.02
    assert bounds.complete


def test_sl2_sharp_lower_bound_at_small_delta(sl2_law):
    # at delta = 1e-3 the search finds the optimal 8-letter product, whose
    # normalized spectral radius ((11 + sqrt(117))/2)^(1/8) is the JSR
    bounds = mm.gripenberg(sl2_law.atoms, delta=1e-3, max_depth=12)
    champion = ((11 + math.sqrt(117)) / 2) ** (1 / 8)
    assert bounds.lower == pytest.approx(champion, abs=1e-9)
    assert bounds.upper - bounds.lower <= 1e-3 + 1e-12


def test_delta_refinement_never_worsens_bounds(sl2_law):
    coarse = mm.gripenberg(sl2_law.atoms, delta=0.02, max_depth=10)
    fine = mm.gripenberg(sl2_law.atoms, delta=0.005, max_depth=10)
    assert fine.lower >= coarse.lower - 1e-12
    assert fine.upper <= coarse.upper + 1e-12


def test_lower_bound_at_least_single_atom_radius(sl2_law):
    sets = [
        list(sl2_law.atoms),
        [np.diag([2.0, 0.0]), np.diag([0.0, 3.0])],
        [np.array([[0.0, 1.0], [1.0, 0.0]])],
    ]
    for s in sets:
        bounds = mm.gripenberg(s, delta=0.01, max_depth=8)
        assert bounds.lower >= max(mm.spectral_radius(a) for a in s) - 1e-12
        assert bounds.lower <= bounds.upper


def test_node_budget_flags_incomplete(sl2_law):
    bounds = mm.gripenberg(sl2_law.atoms, delta=1e-4, max_depth=12, node_budget=20)
    assert not bounds.complete
    assert bounds.lower <= 1.34810 <= bounds.upper


def test_bad_inputs():
    with pytest.raises(InvariantError):
        mm.gripenberg([], delta=0.1)
    with pytest.raises(InvariantError):
        mm.gripenberg([np.eye(2)], delta=0.0)
    with pytest.raises(InvariantError):
        mm.gripenberg([np.eye(2), np.eye(3)], delta=0.1)


def test_rho_2k_identity_and_rademacher(identity2_law, rademacher_law):
    for k in (1, 2, 3):
        assert mm.rho_2k(identity2_law, k) == pytest.approx(1.0, abs=1e-12)
        assert mm.rho_2k(rademacher_law, k) == pytest.approx(1.0, abs=1e-12)


def test_rho_2k_deterministic_diag():
    law = mm.MatrixLaw(
        dim=2, atoms=np.diag([2.0, 3.0])[None].astype(complex), weights=np.array([1.0])
    )
    assert mm.rho_2k(law, 1) == pytest.approx(3.0, abs=1e-10)


def test_sl2_rho2(sl2_law):
    assert mm.rho_2k(sl2_law, 1) == pytest.approx(math.sqrt((3 + math.sqrt(3)) / 4), abs=1e-12)


def test_ladder_monotone_and_below_jsr_upper(sl2_law):
    ladder = mm.rho_ladder(sl2_law, 3)
    vals = ladder.rho_values
    assert vals[0] <= vals[1] <= vals[2]
    bounds = mm.gripenberg(sl2_law.atoms, delta=0.01, max_depth=12)
    assert all(v <= bounds.upper + 1e-9 for v in vals)


def test_rho_2k_below_gripenberg_upper_across_corpus(sl2_law, identity2_law):
    cases = [
        (sl2_law, sl2_law.atoms),
        (identity2_law, identity2_law.atoms),
    ]
    for law, atoms in cases:
        upper = mm.gripenberg(atoms, delta=0.01, max_depth=10).upper
        for k in (1, 2):
            assert mm.rho_2k(law, k) <= upper + 1e-9


def test_probe_converges_to_spectral_radius():
    law = mm.MatrixLaw(
        dim=2, atoms=np.diag([2.0, 3.0])[None].astype(complex), weights=np.array([1.0])
    )
    ladder = mm.rho_ladder(law, 1, n_probe=50)
    assert ladder.probes[2] == pytest.approx(3.0, rel=0.05)
