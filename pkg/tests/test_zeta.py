import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import scan_level
from orbitzeta.errors import NoFit, NotPerfect, ResourceCapExceeded
from orbitzeta.liealg import LieAlgebra
from orbitzeta.zeta import (
    _lift_count,
    count_by_radical_at_level,
    count_levels,
    default_max_den,
    equivariant_count,
    fit_rational,
    lambda_exact,
    lambda_lower_bounds,
    orbit_truncation,
    orbits_by_degree,
    twisted_mu_direct,
    twisted_mu_galois,
)
from orbitzeta.arith import vector_valuation

heisenberg = LieAlgebra.from_brackets(3, 3, {(0, 1): (0, 0, 3)}, name="heisenberg")


@settings(max_examples=200)
@given(st.sampled_from([3, 5]), st.integers(1, 2), st.data())
def test_lift_count_against_enumeration(p, n, data):
    k = data.draw(st.integers(1, 3))
    j = data.draw(st.integers(1, k))
    t = data.draw(st.integers(0, k))
    c = data.draw(st.integers(0, p**k))
    g = tuple(data.draw(st.integers(0, p**3)) for _ in range(n))
    brute = sum(
        1 for b in product(range(p ** (k - j)), repeat=n)
        if (c + p**j * sum(x * y for x, y in zip(b, g))) % p**t == 0
    )
    assert _lift_count(c, j, k, t, vector_valuation(g, p), n, p) == brute


@pytest.mark.parametrize("fixture,k_max", [("sl2_p3", 4), ("sl2_p5", 3), ("sl2_p3_u2", 4)])
def test_level_counts_match_scan(request, fixture, k_max):
    L = request.getfixturevalue(fixture)
    counts = count_levels(L, k_max)
    for k in range(1, k_max + 1):
        assert dict(counts.total[k]) == dict(scan_level(L, k)[0])


def test_level_counts_non_perfect():
    counts = count_levels(heisenberg, 3)
    for k in range(1, 4):
        assert dict(counts.total[k]) == dict(scan_level(heisenberg, k)[0])


@pytest.mark.parametrize("g", [(0, 0, 0), (1, 0, 0), (3, 0, 0), (3, 9, 6), (9, 0, 27), (2, 5, 1)])
def test_twisted_counts_match_scan(sl2_p3, sl2_p3_u2, g):
    for L in (sl2_p3, sl2_p3_u2):
        counts = count_levels(L, 3, g=g)
        for k in range(1, 4):
            _, kill, near = scan_level(L, k, g)
            assert dict(counts.kill[k]) == dict(kill)
            assert dict(counts.near[k]) == dict(near)


def test_count_by_radical_examples(sl2_p3):
    assert count_by_radical_at_level(sl2_p3, 0) == {0: 1}
    assert count_by_radical_at_level(sl2_p3, 1) == {0: 26}
    assert count_by_radical_at_level(sl2_p3, 2) == {2: 702}


def test_lambda_closed_forms(sl2_p3, sl2_p5, sl2_p3_u2):
    for L in (sl2_p3, sl2_p5):
        p = L.p
        assert lambda_exact(L, 4).values == [p**3] + [(p**3 - 1) * p**i for i in range(1, 5)]
    assert lambda_exact(sl2_p3_u2, 3).values == [729] + [3 ** (i + 3) * 26 for i in range(1, 4)]


def test_lambda_stabilizes(sl2_p3, sl2_p3_u2):
    for L in (sl2_p3, sl2_p3_u2):
        assert lambda_exact(L, 2).values == lambda_exact(L, 2, extra_levels=1).values


def test_lambda_requires_perfect(abelian3):
    with pytest.raises(NotPerfect):
        lambda_exact(abelian3, 1)
    table = lambda_lower_bounds(heisenberg, 1, 2)
    assert table.status == ["LowerBoundAtLevel(2)"] * 2
    assert table.values[0] >= 1


def test_resource_cap(sl2_p3):
    with pytest.raises(ResourceCapExceeded):
        count_levels(sl2_p3, 3, node_cap=10)


def test_worker_pool_gives_identical_counts(sl2_p3):
    one = count_levels(sl2_p3, 3, g=(3, 0, 0))
    two = count_levels(sl2_p3, 3, g=(3, 0, 0), workers=2)
    assert one.total == two.total and one.kill == two.kill and one.near == two.near


# -- fitting ----------------------------------------------------------------


def test_fit_examples():
    fit = fit_rational([27, 78, 234, 702, 2106, 6318], max_den=2)
    assert (fit.numerator, fit.denominator) == ((27, -3), (1, -3))
    fit = fit_rational([5] * 8, max_den=3)
    assert (fit.numerator, fit.denominator) == ((5,), (1, -1))
    fit = fit_rational([1, 2, 4, 8, 16, 32], max_den=2)
    assert (fit.numerator, fit.denominator) == ((1,), (1, -2))
    assert fit_rational([1, 2, 4, 8], max_den=1).denominator == (1, -2)


def test_fit_predicts_held_out(sl2_p3):
    lam = lambda_exact(sl2_p3, 5).values
    fit = fit_rational(lam[:-1], max_den=default_max_den(len(lam) - 1))
    assert fit.series(len(lam)) == lam


def test_no_fit():
    with pytest.raises(NoFit):
        fit_rational([1, 0, 0, 1, 0, 5, 7, 1], max_den=1)
    with pytest.raises(ValueError):
        fit_rational([1, 2], max_den=2)


@settings(max_examples=60)
@given(st.lists(st.integers(-9, 9), min_size=1, max_size=3),
       st.lists(st.integers(-3, 3), min_size=1, max_size=2))
def test_fit_recovers_rational_functions(P, Qtail):
    Q = [1] + Qtail
    coeffs = []
    for i in range(14):
        s = Fraction(P[i]) if i < len(P) else Fraction(0)
        s -= sum(Q[j] * coeffs[i - j] for j in range(1, min(i, len(Q) - 1) + 1))
        coeffs.append(s)
    fit = fit_rational(coeffs, max_den=3)
    assert fit.series(14) == coeffs
    assert len(fit.denominator) - 1 + len(fit.numerator) - 1 <= len(Q) - 1 + len(P) - 1


# -- twisted sums -------------------------------------------------------------


def test_twisted_at_zero(sl2_p3, sl2_p3_u2):
    for L in (sl2_p3, sl2_p3_u2):
        mu = twisted_mu_galois(L, (0, 0, 0), 2)
        lam = lambda_exact(L, 2).values
        assert [mu.coeff(i) for i in range(3)] == [L.p**i * lam[i] for i in range(3)]


def test_twisted_routes_agree(sl2_p3):
    orbits = orbits_by_degree(sl2_p3, 2)
    rng = random.Random(5)
    for _ in range(8):
        v = rng.randint(0, 2)
        g = tuple(3**v * rng.randrange(27) for _ in range(3))
        direct = twisted_mu_direct(sl2_p3, g, 2, orbits=orbits)
        assert direct.coeffs == twisted_mu_galois(sl2_p3, g, 2).coeffs
    assert twisted_mu_direct(sl2_p3, (3, 0, 0), 2, orbits=orbits).coeffs == (27, -9, 0)


def test_deeply_divisible_g_acts_like_zero(sl2_p3):
    # every character of degree <= p^2 has level <= 5
    assert twisted_mu_galois(sl2_p3, (3**5, 0, 2 * 3**5), 2) == twisted_mu_galois(sl2_p3, (0, 0, 0), 2)


def test_linear_character_sum_vanishes_off_derived_subgroup(sl2_p3):
    # degree-1 characters are those of L / [L, L] = L / pL
    assert twisted_mu_galois(sl2_p3, (1, 0, 0), 1).coeff(0) == 0
    assert twisted_mu_galois(sl2_p3, (3, 6, 0), 1).coeff(0) == 27


# -- equivariant ------------------------------------------------------------


def test_equivariant_partition(sl2_p3):
    swap = sl2_p3.automorphisms["swap"]
    classes = equivariant_count(sl2_p3, [swap], 2)
    total = None
    for poly in classes.values():
        total = poly if total is None else total + poly
    assert total == orbit_truncation(sl2_p3, 2)
    assert classes[frozenset({1})].coeffs == (3, 6)
