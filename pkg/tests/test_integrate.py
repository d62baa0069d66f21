import random
from fractions import Fraction

import pytest

from orbitzeta.arith import INF
from orbitzeta.coadjoint import CharacterHandle, normalize
from orbitzeta.integrate import (
    ConeIndex,
    box_measure_formula,
    cone_and_alpha,
    direct_radical_counts,
    integral_check,
    lattice_cells,
    lattice_integral_zeta,
    measure_of_character_box,
)
from orbitzeta.liealg import psi_matrix
from orbitzeta.matnf import DivisorProfile, index_exponent, profile


def test_cone_examples():
    assert cone_and_alpha(DivisorProfile((0, INF, INF, INF), (INF, INF, INF)), 5) == ConeIndex(0, 0)
    assert cone_and_alpha(DivisorProfile((0, 1, 2, INF), (1, 1, INF)), 3) == ConeIndex(2, 4)
    assert cone_and_alpha(DivisorProfile((0, 0, 0, 0), (0, 0, 0)), 4) == ConeIndex(3, 12)


def test_every_cell_has_one_cone(sl2_p3):
    for cell in lattice_cells(sl2_p3, 2):
        prof = profile(psi_matrix(sl2_p3, cell.a), 3)
        cone = cone_and_alpha(prof, cell.j)
        assert cone.alpha_val == index_exponent(prof.dvals, cell.j)


def test_cell_weights_sum_to_domain_measure(sl2_p3):
    # mu(L* minus pL*) * mu(z : 1 <= v(z) <= e)
    e, p, n = 3, 3, 3
    total = sum(c.weight for c in lattice_cells(sl2_p3, e))
    expected = sum(Fraction(p**n - 1, p**n) * Fraction(p - 1, p) * Fraction(1, p**j) for j in range(1, e + 1))
    assert total == expected


@pytest.mark.parametrize("e", [1, 2, 3])
def test_integral_equals_direct_counts(sl2_p3, e):
    res = lattice_integral_zeta(sl2_p3, e)
    direct = direct_radical_counts(sl2_p3, e)
    # every coefficient agrees here; only the certified ones are guaranteed in general
    assert res.poly == direct
    assert res.certified_degree == e - 1


def test_integral_values(sl2_p3):
    res = lattice_integral_zeta(sl2_p3, 2)
    assert res.poly.coeffs == (26, 0, 702)
    assert lattice_integral_zeta(sl2_p3, 2, ("W1", (0, 0, 0))).poly == res.poly


def test_abelian_integral(abelian3):
    res = lattice_integral_zeta(abelian3, 1)
    assert res.poly.coeffs == (26,)
    assert res.certified_degree is None


@pytest.mark.parametrize("g", [(1, 0, 0), (3, 0, 0), (3, 3, 6), (0, 9, 1)])
def test_twisted_branches(sl2_p3, g):
    out = integral_check(sl2_p3, 2, g)
    assert out["pass"]


def test_measure_examples(sl2_p3):
    assert measure_of_character_box(sl2_p3, CharacterHandle(3, (1, 0, 0), 1), 2) == Fraction(2, 243)
    assert measure_of_character_box(sl2_p3, CharacterHandle(3, (1, 2, 0), 2), 3) == Fraction(2, 3 * 3**8)
    assert measure_of_character_box(sl2_p3, CharacterHandle(3, (0, 0, 0), 0), 2) == 0
    with pytest.raises(ValueError):
        measure_of_character_box(sl2_p3, CharacterHandle(3, (1, 0, 0), 2), 2)


def test_measure_sampled(sl2_p3):
    rng = random.Random(11)
    for _ in range(6):
        k = rng.randint(1, 2)
        w = normalize([rng.randrange(3**k) for _ in range(3)], k, 3)
        if w.trivial:
            continue
        assert measure_of_character_box(sl2_p3, w, 3) == box_measure_formula(3, 3, w.k)
