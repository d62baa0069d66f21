import random
from fractions import Fraction

import numpy as np
import pytest

from orbitzeta.bch import MAX_DEGREE, bch_associative, bch_lie_terms, left_bracket_to_assoc
from orbitzeta.coadjoint import adjoint_action_matrix, all_orbits
from orbitzeta.errors import HypothesisViolation, SeriesDegreeExceeded
from orbitzeta.liealg import abelian
from orbitzeta.oracle import (
    FiniteQuotientGroup,
    bch_degrees,
    bch_multiply,
    conjugacy_class_count,
    is_associative_sample,
    kirillov_verify,
)


def test_low_degree_bch_terms():
    Z = bch_associative(3)
    assert Z[(0, 1)] == Fraction(1, 2) and Z[(1, 0)] == Fraction(-1, 2)
    # 1/12 [X, [X, Y]] - 1/12 [Y, [X, Y]]
    assert Z[(0, 0, 1)] == Fraction(1, 12)
    assert Z[(0, 1, 0)] == Fraction(-1, 6)
    assert Z[(1, 1, 0)] == Fraction(1, 12)


@pytest.mark.parametrize("d", range(2, MAX_DEGREE + 1))
def test_lie_form_reproduces_associative_terms(d):
    assoc = {w: c for w, c in bch_associative(MAX_DEGREE).items() if len(w) == d}
    rebuilt: dict = {}
    for word, coeff in bch_lie_terms(MAX_DEGREE)[d]:
        for w, c in left_bracket_to_assoc(word).items():
            rebuilt[w] = rebuilt.get(w, 0) + coeff * c
    rebuilt = {w: c for w, c in rebuilt.items() if c}
    assert rebuilt == assoc


def test_bch_degrees():
    assert bch_degrees(1, 3, 2) == [2, 3]
    assert bch_degrees(1, 5, 2) == [2]
    with pytest.raises(SeriesDegreeExceeded):
        bch_degrees(1, 3, 6)


def test_abelian_group_law_is_addition():
    G = FiniteQuotientGroup(abelian(3, 2), 2)
    assert tuple(G.multiply([[4, 5]], [[7, 8]])[0]) == (2, 4)


@pytest.mark.parametrize("fixture,k", [("sl2_p3", 2), ("sl2_p5", 2), ("sl2_p3_u2", 3)])
def test_group_axioms(request, fixture, k):
    L = request.getfixturevalue(fixture)
    assert is_associative_sample(L, k, samples=3000, seed=1)
    G = FiniteQuotientGroup(L, k)
    rng = np.random.default_rng(0)
    X = rng.integers(0, G.mod, size=(200, 3))
    assert np.array_equal(G.multiply(X, G.inverse(X)), np.zeros_like(X))
    assert np.array_equal(G.multiply(X, np.zeros_like(X)), X)


def _matmul(A, B, mod):
    n = len(A)
    return [[sum(A[i][t] * B[t][j] for t in range(n)) % mod for j in range(n)] for i in range(n)]


@pytest.mark.parametrize("fixture,k", [("sl2_p3", 2), ("sl2_p5", 2), ("sl2_p3_u2", 3)])
def test_adjoint_representation_is_a_homomorphism(request, fixture, k):
    """exp(ad(x*y)) = exp(ad x) exp(ad y) mod p^k: the BCH law seen through matrices."""
    L = request.getfixturevalue(fixture)
    rng = random.Random(2)
    mod = L.p**k
    for _ in range(50):
        x = [rng.randrange(mod) for _ in range(3)]
        y = [rng.randrange(mod) for _ in range(3)]
        xy = bch_multiply(L, x, y, k)
        lhs = adjoint_action_matrix(L, xy, k)
        rhs = _matmul(adjoint_action_matrix(L, x, k), adjoint_action_matrix(L, y, k), mod)
        assert lhs == rhs


def test_class_count_equals_orbit_count(sl2_p3):
    assert conjugacy_class_count(sl2_p3, 2) == len(all_orbits(sl2_p3, 2)) == 105


def test_kirillov_verify_small(sl2_p5):
    checks = kirillov_verify(sl2_p5, 1, sample_pairs=200)
    assert all(c["pass"] for c in checks), checks
    assert {c["check"] for c in checks} == {"class_function", "orthonormality", "degree_square_sum",
                                            "orbit_class_count"}


def test_kirillov_verify_needs_u2_at_p3(sl2_p3):
    with pytest.raises(HypothesisViolation):
        kirillov_verify(sl2_p3, 2)
