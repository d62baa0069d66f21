"""Lattice-sum evaluation of the p-adic integrals behind the zeta series.

The domain is W = (L* minus pL*) x (pZ_p minus 0) with Haar measure normalized
by mu(Z_p^n) = 1.  A pair (a, z) with v(z) = j defines the character
``a / z`` of level j.  Every integrand used here depends on a only mod p**j
and on z only through j, so the cells are (a mod p**j primitive, j) with
weight p**(-n j) * (1 - 1/p) * p**(-j); polynomials are kept in the formal
variable t (one cell contributes one monomial).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .coadjoint import CharacterHandle
from .errors import ResourceCapExceeded
from .liealg import LieAlgebra, psi_matrix, require_uniform
from .matnf import DivisorProfile, cone_index, profile, quotient_index_exponent
from .zeta import ZetaPolynomial

CELL_CAP = 2 * 10**6


@dataclass(frozen=True)
class LatticeCell:
    a: tuple  # residue mod p**j
    j: int
    weight: Fraction


@dataclass(frozen=True)
class ConeIndex:
    j: int
    alpha_val: int


@dataclass(frozen=True)
class IntegralResult:
    poly: ZetaPolynomial
    e: int
    certified_degree: Optional[int]  # coefficients up to this t-degree are exact; None if no bound
    tail_min_degree: Optional[int]

    def certified(self) -> ZetaPolynomial:
        if self.certified_degree is None:
            return self.poly
        return self.poly.truncate(self.certified_degree)


def cone_and_alpha(prof: DivisorProfile, z_val: int) -> ConeIndex:
    """Cone W_j containing (a, z) and the valuation of alpha(a, z) = D(z^j, h_j)."""
    j = cone_index(prof.hvals, z_val)
    alpha = 0 if j == 0 else j * z_val - prof.hvals[j]
    if alpha != quotient_index_exponent(prof, z_val):
        raise AssertionError("unreachable: quotient_index_exponent re-derives the cone")
    return ConeIndex(j, alpha)


def _primitive_residues(p: int, n: int, j: int):
    for a in product(range(p**j), repeat=n):
        if any(x % p for x in a):
            yield a


def lattice_cells(alg: LieAlgebra, e: int, cap: int = CELL_CAP):
    """Cells (a mod p^j, j) for j = 1..e; a primitive."""
    p, n = alg.p, alg.n
    total = sum(p ** (n * j) for j in range(1, e + 1))
    if total > cap:
        raise ResourceCapExceeded(f"{total} lattice cells exceed cap {cap}")
    for j in range(1, e + 1):
        w = Fraction(1, p ** (n * j)) * Fraction(p - 1, p) * Fraction(1, p**j)
        for a in _primitive_residues(p, n, j):
            yield LatticeCell(a, j, w)


def _restriction_holds(restriction, a, j, p) -> bool:
    if restriction is None or restriction == "none":
        return True
    kind, g = restriction
    c = sum(x * y for x, y in zip(a, g))
    if kind == "W1":
        return c % p**j == 0
    if kind == "W2-W1":
        return c % p ** (j - 1) == 0 and c % p**j != 0
    raise ValueError(f"unknown restriction {kind!r}")


def lattice_integral_zeta(alg: LieAlgebra, e: int, restriction=None, cap: int = CELL_CAP) -> IntegralResult:
    """p/(p-1) * sum over cells of weight * p^((n+1) j) * t^alphaVal.

    ``restriction`` is None, ("W1", g) for a(g) = 0 mod z, or ("W2-W1", g)
    for p a(g) = 0 mod z but not a(g) = 0 mod z.  For a perfect algebra the
    coefficient of t^c is certified for c + m(L) <= e.
    """
    if e < 1:
        raise ValueError("e must be >= 1")
    rep = require_uniform(alg)
    p, n = alg.p, alg.n
    coeffs: dict = {}
    factor = Fraction(p, p - 1)
    for cell in lattice_cells(alg, e, cap):
        if not _restriction_holds(restriction, cell.a, cell.j, p):
            continue
        cone = cone_and_alpha(profile(psi_matrix(alg, cell.a), p), cell.j)
        contrib = factor * cell.weight * p ** ((n + 1) * cell.j)
        coeffs[cone.alpha_val] = coeffs.get(cone.alpha_val, 0) + contrib
    top = max(coeffs, default=0)
    poly = ZetaPolynomial.of(coeffs.get(c, 0) for c in range(top + 1))
    if rep.perfect:
        cert = e - rep.m_l
        return IntegralResult(poly, e, cert, cert + 1)
    return IntegralResult(poly, e, None, None)


def measure_of_character_box(alg: LieAlgebra, w: CharacterHandle, e: int) -> Fraction:
    """Haar measure of {(a, z) in W : a / z = w}, counted on level-e cells.

    A level-e cell is (a mod p^e, z mod p^e) with 1 <= v(z) <= e - 1; with
    z = p^k u the character a / z is Phi_k(u^-1 a mod p^k).  Needs o(w) < p^e.
    """
    p, n, k = alg.p, alg.n, w.k
    if w.trivial:
        return Fraction(0)
    if not 1 <= k <= e - 1:
        raise ValueError(f"need 1 <= k <= e - 1 for a box at level e, got k={k}, e={e}")
    if p ** (n * e) > CELL_CAP:
        raise ResourceCapExceeded(f"p^(n e) = {p ** (n * e)} cells exceed cap {CELL_CAP}")
    mod = p**e
    A = np.indices((mod,) * n, dtype=np.int64).reshape(n, -1).T
    target = np.array(w.a, dtype=np.int64)
    count = 0
    for z in range(p, mod, p):
        zk = 0
        while z % p ** (zk + 1) == 0:
            zk += 1
        if zk != k:
            continue
        u = (z // p**k) % p**k
        # a / z = w  <=>  a = u a_w mod p^k
        hit = np.all((A - u * target) % p**k == 0, axis=1)
        count += int(hit.sum())
    return Fraction(count, p ** (e * (n + 1)))


def box_measure_formula(p: int, n: int, k: int) -> Fraction:
    return Fraction(p - 1, p) * Fraction(1, p ** (k * (n + 1)))


def direct_radical_counts(alg: LieAlgebra, e: int) -> ZetaPolynomial:
    """sum over characters of level 1..e of t^radExp, by the residue tree."""
    from .zeta import count_levels

    counts = count_levels(alg, e).total
    acc: dict = {}
    for k in range(1, e + 1):
        for r, c in counts[k].items():
            acc[r] = acc.get(r, 0) + c
    top = max(acc, default=0)
    return ZetaPolynomial.of(acc.get(c, 0) for c in range(top + 1))


def integral_check(alg: LieAlgebra, e: int, g: Optional[Sequence[int]] = None) -> dict:
    """Compare certified integral coefficients with direct counts (and twisted branches if g is given)."""
    from .zeta import count_levels

    res = lattice_integral_zeta(alg, e)
    direct = direct_radical_counts(alg, e)
    deg = res.certified_degree if res.certified_degree is not None else -1
    rows = []
    for c in range(deg + 1):
        rows.append({"degree": c, "integral": res.poly.coeff(c), "direct": direct.coeff(c)})
    out = {"e": e, "certified_degree": res.certified_degree, "tail_min_degree": res.tail_min_degree,
           "coefficients": rows, "pass": all(r["integral"] == r["direct"] for r in rows)}
    if g is not None:
        counts = count_levels(alg, e, g=g)
        for label, store in (("W1", counts.kill), ("W2-W1", counts.near)):
            r2 = lattice_integral_zeta(alg, e, (label, tuple(g)))
            twisted_rows = []
            for c in range(deg + 1):
                d = sum(store[k].get(c, 0) for k in range(1, e + 1))
                twisted_rows.append({"degree": c, "integral": r2.poly.coeff(c), "direct": d})
            out[label] = twisted_rows
            out["pass"] = out["pass"] and all(r["integral"] == r["direct"] for r in twisted_rows)
    return out
