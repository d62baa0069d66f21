import cmath
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbitzeta.arith import (
    INF,
    CycloValue,
    PrimeContext,
    cyclo_canonical,
    d_function,
    d_valuation,
    galois_orbit_sum,
    phi_degree,
    valuation,
)
from orbitzeta.errors import LevelOverflow

primes = st.sampled_from([3, 5, 7])


def numeric(z: CycloValue) -> complex:
    """Evaluate at theta = exp(2 pi i / p^m): independent of the reduction rules."""
    theta = cmath.exp(2j * cmath.pi / z.p**z.level)
    return sum(c * theta**i for i, c in enumerate(z.coeffs))


def test_infinity_behaviour():
    assert INF > 10**100
    assert INF + 3 is INF
    assert min(4, INF) == 4
    with pytest.raises(ArithmeticError):
        INF - INF


def test_valuation_examples():
    assert valuation(54, 3) == 3
    assert valuation(-54, 3) == 3
    assert valuation(7, 3) == 0
    assert valuation(0, 5) is INF


def test_prime_context_rejects_bad_primes():
    with pytest.raises(ValueError):
        PrimeContext(2)
    with pytest.raises(ValueError):
        PrimeContext(9)
    assert PrimeContext(5).display(INF) == "inf"


def test_d_function():
    assert d_function(9, 3, 3) == 3
    assert d_function(3, 9, 3) == 0
    assert d_function(5, 0, 3) == 0
    assert d_function(2, 4, 3) == Fraction(1, 2)
    assert d_valuation(5, 2) == 3
    assert d_valuation(1, 2) is INF
    assert d_valuation(INF, INF) is INF


@given(primes, st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_valuation_is_multiplicative(p, a, b):
    assert valuation(a * b, p) == valuation(a, p) + valuation(b, p)


@given(primes, st.integers(1, 3), st.integers(0, 10**4))
def test_root_power_is_a_root_of_unity(p, m, e):
    z = CycloValue.root_power(p, m, e)
    assert abs(numeric(z) - cmath.exp(2j * cmath.pi * e / p**m)) < 1e-9
    assert z ** (p**m) == 1


@settings(max_examples=50)
@given(primes, st.integers(1, 2), st.lists(st.integers(-5, 5), min_size=1, max_size=30),
       st.lists(st.integers(-5, 5), min_size=1, max_size=30))
def test_ring_operations_match_numeric(p, m, f, g):
    a = CycloValue.from_polynomial(p, m, f)
    b = CycloValue.from_polynomial(p, m, g)
    assert abs(numeric(a * b) - numeric(a) * numeric(b)) < 1e-6
    assert abs(numeric(a + b) - numeric(a) - numeric(b)) < 1e-6
    assert abs(numeric(a.conjugate()) - numeric(a).conjugate()) < 1e-6


@given(primes, st.integers(1, 3), st.integers(0, 10**4))
def test_galois_orbit_sum_matches_explicit_sum(p, m, c):
    total = CycloValue.integer(p, 0, m)
    for u in range(1, p**m):
        if u % p:
            total = total + CycloValue.root_power(p, m, c * u)
    assert total.is_rational()
    assert total.rational_part() == galois_orbit_sum(m, c, p)


def test_galois_orbit_sum_values():
    assert galois_orbit_sum(1, 0, 3) == 2
    assert galois_orbit_sum(1, 1, 3) == -1
    assert galois_orbit_sum(2, 1, 3) == 0
    assert galois_orbit_sum(2, 3, 3) == -3


def test_embedding_and_rational_equality():
    z = CycloValue.root_power(3, 1, 1)
    assert z.embed(2) == CycloValue.root_power(3, 2, 3)
    assert CycloValue.integer(5, 7, 2) == 7
    assert hash(CycloValue.integer(5, 7, 2)) == hash(CycloValue.integer(5, 7, 0))
    assert phi_degree(3, 2) == 6


def test_sum_of_all_roots_vanishes():
    for p in (3, 5):
        for m in (1, 2):
            assert CycloValue.from_histogram(p, m, [1] * p**m) == 0


def test_canonical_level_overflow():
    ctx = PrimeContext(3, e_max=2)
    assert cyclo_canonical(ctx, 2, 10) == CycloValue.root_power(3, 2, 1)
    with pytest.raises(LevelOverflow):
        cyclo_canonical(ctx, 3, 1)
