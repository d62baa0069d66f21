"""Baker-Campbell-Hausdorff coefficients in left-normed bracket form.

The homogeneous parts Z_d of log(exp X exp Y) are computed in the free
associative algebra on {X, Y} with exact rationals, then converted to Lie
form with the Dynkin-Specht-Wever map: if P is a Lie polynomial of degree d,
then P = (1/d) * sum_w coeff_w * [...[[w1, w2], w3], ..., wd].
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial

MAX_DEGREE = 6

Word = tuple  # tuple of 0 (X) and 1 (Y)


def _mul(A: dict, B: dict, max_deg: int) -> dict:
    out: dict = {}
    for u, a in A.items():
        for v, b in B.items():
            if len(u) + len(v) <= max_deg:
                w = u + v
                out[w] = out.get(w, 0) + a * b
    return {w: c for w, c in out.items() if c}


@lru_cache(maxsize=None)
def bch_associative(max_deg: int = MAX_DEGREE) -> dict:
    """log(exp X exp Y) up to ``max_deg`` as {word: Fraction}."""
    # exp X exp Y - 1 = sum_{a+b>=1} X^a Y^b / (a! b!)
    W: dict = {}
    for a in range(max_deg + 1):
        for b in range(max_deg + 1 - a):
            if a + b:
                W[(0,) * a + (1,) * b] = Fraction(1, factorial(a) * factorial(b))
    log: dict = {}
    power = {(): Fraction(1)}
    for m in range(1, max_deg + 1):
        power = _mul(power, W, max_deg)
        coef = Fraction((-1) ** (m + 1), m)
        for w, c in power.items():
            log[w] = log.get(w, 0) + coef * c
    return {w: c for w, c in log.items() if c}


@lru_cache(maxsize=None)
def bch_lie_terms(max_deg: int = MAX_DEGREE) -> dict:
    """{degree: ((word, coeff), ...)} with Z_d = sum coeff * leftbracket(word)."""
    assoc = bch_associative(max_deg)
    out: dict = {}
    for d in range(1, max_deg + 1):
        if d == 1:
            out[1] = (((0,), Fraction(1)), ((1,), Fraction(1)))
            continue
        acc: dict = {}
        for w, c in assoc.items():
            if len(w) != d or w[0] == w[1]:
                continue  # [[x, x], ...] = 0
            acc[w] = acc.get(w, 0) + c / d
        out[d] = tuple(sorted((w, c) for w, c in acc.items() if c))
    return out


def left_bracket_to_assoc(word: Word) -> dict:
    """Expand [...[[w1, w2], w3], ...] into the free associative algebra."""
    poly = {(word[0],): 1}
    for letter in word[1:]:
        new: dict = {}
        for w, c in poly.items():
            for key, s in ((w + (letter,), c), ((letter,) + w, -c)):
                new[key] = new.get(key, 0) + s
        poly = {w: c for w, c in new.items() if c}
    return poly


def denominator_valuation_bound(d: int, p: int) -> int:
    """Upper bound on v_p of the denominators occurring in degree d."""
    return (d - 1) // (p - 1)
