"""Character-degree counts, zeta truncations, twisted sums and rational fits.

Counting works on primitive dual vectors ``a`` mod p**k (characters of exact
order p**k).  The radical exponent of ``a`` at level k is
``sum(max(k - d, 0))`` over the elementary divisor valuations d of Psi(a);
divisors below the current depth j are already determined by ``a mod p**j``,
so a residue class can be closed once every divisor that can be finite is
known.  All lifts of a closed class then share one exponent per level.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd, lcm
from typing import Iterable, Optional, Sequence

import numpy as np

from .arith import INF, CycloValue, vector_valuation
from .coadjoint import (
    all_orbits,
    classify_orbit_by_k,
    is_automorphism,
    kirillov_character_value,
    level_orbits,
)
from .errors import MismatchWithGaloisRoute, NoFit, NotAutomorphism, ResourceCapExceeded
from .liealg import LieAlgebra, psi_matrix, require_perfect, require_uniform
from .matnf import elementary_divisor_valuations

NODE_CAP = 5 * 10**6


# ---------------------------------------------------------------------------
# containers


@dataclass
class LambdaTable:
    p: int
    values: list
    status: list  # "Exact" or "LowerBoundAtLevel(k)"

    def rows(self) -> list[tuple]:
        return [(i, v, s) for i, (v, s) in enumerate(zip(self.values, self.status))]


@dataclass(frozen=True)
class ZetaPolynomial:
    """Truncated series sum coeffs[i] * t**i, t = p**-s, exact rational coefficients."""

    coeffs: tuple

    @classmethod
    def of(cls, coeffs: Iterable) -> ZetaPolynomial:
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        return cls(tuple(c))

    def __add__(self, other: ZetaPolynomial) -> ZetaPolynomial:
        m = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (m - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (m - len(other.coeffs))
        return ZetaPolynomial.of(x + y for x, y in zip(a, b))

    def coeff(self, i: int) -> Fraction:
        return self.coeffs[i] if i < len(self.coeffs) else Fraction(0)

    def truncate(self, degree: int) -> ZetaPolynomial:
        return ZetaPolynomial.of(self.coeffs[: degree + 1])


@dataclass(frozen=True)
class RationalFit:
    numerator: tuple  # integer coefficients, lowest degree first
    denominator: tuple
    validation: int  # supplied coefficients matched beyond the ones solved for

    def series(self, length: int) -> list[Fraction]:
        """Power-series expansion of numerator/denominator."""
        q0 = Fraction(self.denominator[0])
        out: list[Fraction] = []
        for i in range(length):
            s = Fraction(self.numerator[i]) if i < len(self.numerator) else Fraction(0)
            for j in range(1, min(i, len(self.denominator) - 1) + 1):
                s -= self.denominator[j] * out[i - j]
            out.append(s / q0)
        return out


# ---------------------------------------------------------------------------
# branch and bound over residues


def _lift_count(c: int, j: int, k: int, t: int, g_val, n: int, p: int) -> int:
    """#{b mod p^(k-j) : c + p^j <b, g> = 0 mod p^t}, for t <= k, g of content p^g_val."""
    if t <= j:
        return p ** (n * (k - j)) if c % p**t == 0 else 0
    if c % p**j:
        return 0
    s = t - j
    cp = (-(c // p**j)) % p**s
    m = s if g_val is INF else min(g_val, s)
    if cp % p**m:
        return 0
    # <b, g> mod p^s is uniform on p^m Z / p^s Z
    return p ** (n * s - (s - m)) * p ** (n * (k - t))


@dataclass
class LevelCounts:
    """Per-level counts of primitive vectors by radical exponent.

    ``total[k]`` maps exponent -> count; with a twisting element g, ``kill[k]``
    counts those with <a, g> = 0 mod p^k and ``near[k]`` those with
    <a, g> = 0 mod p^(k-1) but not mod p^k.
    """

    k_max: int
    total: dict = field(default_factory=dict)
    kill: dict = field(default_factory=dict)
    near: dict = field(default_factory=dict)
    nodes: int = 0

    def merge(self, other: LevelCounts) -> None:
        for name in ("total", "kill", "near"):
            mine, theirs = getattr(self, name), getattr(other, name)
            for k, cnt in theirs.items():
                mine.setdefault(k, Counter()).update(cnt)
        self.nodes += other.nodes


def _explore(alg: LieAlgebra, roots, k_max: int, g, node_cap: int) -> LevelCounts:
    p, n = alg.p, alg.n
    r = alg.generic_psi_rank()
    out = LevelCounts(k_max)
    for k in range(1, k_max + 1):
        out.total[k] = Counter()
        if g is not None:
            out.kill[k] = Counter()
            out.near[k] = Counter()
    g_val = vector_valuation(g, p) if g is not None else INF
    stack = [(tuple(a), 1) for a in roots]
    while stack:
        a, j = stack.pop()
        out.nodes += 1
        if out.nodes > node_cap:
            raise ResourceCapExceeded(f"branch-and-bound exceeded {node_cap} residue classes")
        dv = elementary_divisor_valuations(psi_matrix(alg, a), p, cap=j)[:r]
        known = [d for d in dv if d < j]
        rexp = sum(j - d for d in known)
        out.total[j][rexp] += 1
        c = sum(x * y for x, y in zip(a, g)) if g is not None else 0
        if g is not None:
            if c % p**j == 0:
                out.kill[j][rexp] += 1
            elif c % p ** (j - 1) == 0:
                out.near[j][rexp] += 1
        if len(known) == len(dv):
            # closed: every possibly-finite divisor is known
            for k in range(j + 1, k_max + 1):
                rk = sum(k - d for d in known)
                out.total[k][rk] += p ** (n * (k - j))
                if g is not None:
                    n1 = _lift_count(c, j, k, k, g_val, n, p)
                    n12 = _lift_count(c, j, k, k - 1, g_val, n, p)
                    if n1:
                        out.kill[k][rk] += n1
                    if n12 - n1:
                        out.near[k][rk] += n12 - n1
        elif j < k_max:
            step = p**j
            for b in product(range(p), repeat=n):
                stack.append((tuple(x + step * y for x, y in zip(a, b)), j + 1))
    return out


def _level_one_roots(p: int, n: int) -> list[tuple]:
    return [a for a in product(range(p), repeat=n) if any(a)]


def _explore_chunk(args):
    alg, roots, k_max, g, cap = args
    return _explore(alg, roots, k_max, g, cap)


def count_levels(
    alg: LieAlgebra,
    k_max: int,
    g: Optional[Sequence[int]] = None,
    node_cap: int = NODE_CAP,
    workers: int = 1,
) -> LevelCounts:
    """Branch-and-bound counts for every level 1..k_max."""
    require_uniform(alg)
    roots = _level_one_roots(alg.p, alg.n)
    if k_max < 1:
        return LevelCounts(k_max)
    g = tuple(int(x) for x in g) if g is not None else None
    if workers <= 1 or len(roots) < 2 * workers:
        return _explore(alg, roots, k_max, g, node_cap)
    chunks = [roots[i::workers] for i in range(workers)]
    result = LevelCounts(k_max)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_explore_chunk, [(alg, ch, k_max, g, node_cap) for ch in chunks]):
            result.merge(part)
    return result


def count_by_radical_at_level(alg: LieAlgebra, k: int, **kw) -> dict:
    """{radical exponent: number of primitive a mod p^k}."""
    if k == 0:
        return {0: 1}
    counts = count_levels(alg, k, **kw)
    return dict(sorted(counts.total[k].items()))


# ---------------------------------------------------------------------------
# lambda_i


def lambda_from_counts(p: int, counts: dict, i_max: int, m_l: int, extra: int = 0) -> list[int]:
    """lambda_i = [i == 0] + sum_{k <= 2i + m(L) + extra} count_k(2i) / p^(2i).

    ``counts`` maps level -> {exponent: count}.
    """
    out = []
    for i in range(i_max + 1):
        num = 1 if i == 0 else 0
        for k in range(1, 2 * i + m_l + extra + 1):
            num += counts.get(k, {}).get(2 * i, 0)
        q, r = divmod(num, p ** (2 * i))
        if r:
            raise ArithmeticError(f"orbit count for i={i} is not integral: {num}/{p ** (2 * i)}")
        out.append(q)
    return out


def lambda_exact(alg: LieAlgebra, i_max: int, extra_levels: int = 0, counts=None, **kw) -> LambdaTable:
    """Exact lambda_0..lambda_imax for a perfect uniform algebra.

    A character of order p^k and degree p^i has k <= 2i + m(L), so levels up
    to 2*i_max + m(L) suffice; ``extra_levels`` widens the window (the answer
    must not change).
    """
    rep = require_perfect(alg)
    k_max = 2 * i_max + rep.m_l + extra_levels
    if counts is None:
        counts = count_levels(alg, k_max, **kw).total
    values = lambda_from_counts(alg.p, counts, i_max, rep.m_l, extra_levels)
    return LambdaTable(alg.p, values, ["Exact"] * len(values))


def lambda_lower_bounds(alg: LieAlgebra, i_max: int, level: int, **kw) -> LambdaTable:
    """Orbit counts from levels <= ``level`` only; for algebras that are not perfect."""
    require_uniform(alg)
    counts = count_levels(alg, level, **kw).total
    values = []
    for i in range(i_max + 1):
        num = (1 if i == 0 else 0) + sum(counts.get(k, {}).get(2 * i, 0) for k in range(1, level + 1))
        values.append(num // alg.p ** (2 * i))
    return LambdaTable(alg.p, values, [f"LowerBoundAtLevel({level})"] * len(values))


def zeta_character_polynomial(table: LambdaTable) -> ZetaPolynomial:
    return ZetaPolynomial.of(table.values)


# ---------------------------------------------------------------------------
# rational fitting


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> Optional[list[Fraction]]:
    """A solution of rows @ x = rhs (free variables set to 0), or None."""
    m = len(rows)
    ncols = len(rows[0]) if rows else 0
    A = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, m) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    if any(A[i][-1] != 0 for i in range(r, m)):
        return None
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = A[i][-1]
    return x


def fit_rational(coeffs: Sequence, max_den: int = 6, max_num: Optional[int] = None,
                 min_validation: int = 2) -> RationalFit:
    """Smallest P/Q (deg Q <= max_den, Q(0) = 1 before scaling) matching the series.

    Candidates are tried by increasing deg P + deg Q, then deg Q.  For each,
    Q is the solution of the Hankel system c_i + sum q_j c_(i-j) = 0 for
    deg P < i < len(coeffs); at least ``min_validation`` of those equations
    must be left over after the ones that determine Q.
    """
    c = [Fraction(x) for x in coeffs]
    N = len(c)
    if N < 2 * max_den + 2:
        raise ValueError(f"need at least {2 * max_den + 2} coefficients for max_den={max_den}")
    if max_num is None:
        max_num = max_den
    cands = sorted(((r, s) for r in range(max_den + 1) for s in range(max_num + 1)),
                   key=lambda rs: (rs[0] + rs[1], rs[0]))
    for r, s in cands:
        eqs = list(range(s + 1, N))
        if len(eqs) - r < min_validation:
            continue
        rows = [[c[i - j] if i - j >= 0 else Fraction(0) for j in range(1, r + 1)] for i in eqs]
        rhs = [-c[i] for i in eqs]
        if r:
            q = _solve_exact(rows, rhs)
            if q is None:
                continue
        else:
            if any(c[i] != 0 for i in eqs):
                continue
            q = []
        Q = [Fraction(1)] + q
        # numerator: first s+1 coefficients of C * Q (the rest vanish)
        P = [sum(Q[j] * c[i - j] for j in range(len(Q)) if i - j >= 0) for i in range(s + 1)]
        # the solver may leave free variables; confirm the whole tail vanishes
        full = [sum(Q[j] * c[i - j] for j in range(len(Q)) if i - j >= 0) for i in range(N)]
        if any(full[i] != 0 for i in range(s + 1, N)):
            continue
        while len(P) > 1 and P[-1] == 0:
            P.pop()
        while len(Q) > 1 and Q[-1] == 0:
            Q.pop()
        scale = lcm(*(x.denominator for x in P + Q))
        Pi = [int(x * scale) for x in P]
        Qi = [int(x * scale) for x in Q]
        g = 0
        for x in Pi + Qi:
            g = gcd(g, x)
        if g:
            Pi = [x // g for x in Pi]
            Qi = [x // g for x in Qi]
        if Qi[0] < 0:
            Pi = [-x for x in Pi]
            Qi = [-x for x in Qi]
        return RationalFit(tuple(Pi), tuple(Qi), validation=len(eqs) - r)
    raise NoFit(f"no rational function with denominator degree <= {max_den} fits {N} coefficients")


def default_max_den(n_coeffs: int, cap: int = 6) -> int:
    return max(0, min(cap, (n_coeffs - 2) // 2))


# ---------------------------------------------------------------------------
# twisted sums


def twisted_mu_galois(alg: LieAlgebra, g: Sequence[int], i_max: int, counts: Optional[LevelCounts] = None,
                      **kw) -> ZetaPolynomial:
    """mu_i(g) from Galois-orbit sums: characters killing g count fully,
    those with w(g) of order p count -1/(p-1), the rest cancel."""
    rep = require_perfect(alg)
    p = alg.p
    k_max = 2 * i_max + rep.m_l
    if counts is None:
        counts = count_levels(alg, k_max, g=g, **kw)
    out = []
    for i in range(i_max + 1):
        s = Fraction(1 if i == 0 else 0)
        for k in range(1, 2 * i + rep.m_l + 1):
            s += counts.kill[k].get(2 * i, 0)
            s -= Fraction(counts.near[k].get(2 * i, 0), p - 1)
        out.append(s / p**i)
    return ZetaPolynomial(tuple(out))


def characters_with_exponent(alg: LieAlgebra, k: int, rexp: int, node_cap: int = NODE_CAP) -> np.ndarray:
    """All primitive a mod p^k with radical exponent ``rexp``, pruned by the residue tree."""
    p, n = alg.p, alg.n
    r = alg.generic_psi_rank()
    found = []
    stack = [(a, 1) for a in _level_one_roots(p, n)]
    nodes = 0
    while stack:
        a, j = stack.pop()
        nodes += 1
        if nodes > node_cap:
            raise ResourceCapExceeded(f"enumeration exceeded {node_cap} residue classes")
        dv = elementary_divisor_valuations(psi_matrix(alg, a), p, cap=j)[:r]
        known = [d for d in dv if d < j]
        closed = len(known) == len(dv)
        if j == k:
            if sum(j - d for d in known) == rexp:
                found.append(np.array([a], dtype=np.int64))
            continue
        if closed:
            if sum(k - d for d in known) == rexp:
                B = np.indices((p ** (k - j),) * n, dtype=np.int64).reshape(n, -1).T
                found.append(np.array(a, dtype=np.int64) + p**j * B)
            continue
        step = p**j
        for b in product(range(p), repeat=n):
            stack.append((tuple(x + step * y for x, y in zip(a, b)), j + 1))
    if not found:
        return np.zeros((0, n), dtype=np.int64)
    return np.concatenate(found)


def orbits_by_degree(alg: LieAlgebra, i_max: int) -> dict:
    """{i: [orbits of size p^(2i) at every level <= 2i + m(L)]}, trivial orbit under i = 0."""
    rep = require_perfect(alg)
    out: dict = {}
    for i in range(i_max + 1):
        bucket = []
        if i == 0:
            bucket.extend(all_orbits(alg, 0))
        for k in range(1, 2 * i + rep.m_l + 1):
            vecs = characters_with_exponent(alg, k, 2 * i)
            if len(vecs):
                bucket.extend(level_orbits(alg, k, vecs))
        out[i] = bucket
    return out


def twisted_mu_direct(alg: LieAlgebra, g: Sequence[int], i_max: int, orbits: Optional[dict] = None,
                      check: bool = True) -> ZetaPolynomial:
    """mu_i(g) as the sum of Kirillov character values over orbits of size p^(2i)."""
    p = alg.p
    if orbits is None:
        orbits = orbits_by_degree(alg, i_max)
    out = []
    for i in range(i_max + 1):
        level = max((o.rep.k for o in orbits[i]), default=0)
        total = CycloValue.integer(p, 0, level)
        for orb in orbits[i]:
            num, _ = kirillov_character_value(orb, g)
            total = total + num
        if not total.is_rational():
            raise MismatchWithGaloisRoute(f"mu_{i}(g) is not rational: {total}")
        out.append(Fraction(total.rational_part(), p**i))
    result = ZetaPolynomial(tuple(out))
    if check:
        other = twisted_mu_galois(alg, g, i_max)
        if other.coeffs != result.coeffs:
            raise MismatchWithGaloisRoute(f"direct {result.coeffs} != Galois route {other.coeffs}")
    return result


# ---------------------------------------------------------------------------
# equivariant counts


def equivariant_count(alg: LieAlgebra, automorphisms: Sequence, k_max: int) -> dict:
    """Orbits at levels <= k_max grouped by the set of automorphisms (1-based
    indices) that map the orbit into itself; each orbit of size p^(2i)
    contributes t**i to its class polynomial."""
    require_uniform(alg)
    for t, T in enumerate(automorphisms, start=1):
        if not is_automorphism(alg, T, max(k_max, 1)):
            raise NotAutomorphism(t)
    classes: dict = {}
    for orb in all_orbits(alg, k_max):
        key = classify_orbit_by_k(alg, orb.rep, automorphisms, orbit=orb, check=False)
        poly = classes.setdefault(key, [0] * (k_max + 1))
        poly[orb.degree_exponent] += 1
    return {key: ZetaPolynomial.of(v) for key, v in sorted(classes.items(), key=lambda kv: sorted(kv[0]))}


def orbit_truncation(alg: LieAlgebra, k_max: int) -> ZetaPolynomial:
    """sum over orbits at levels <= k_max of t**i (orbit size p^(2i))."""
    poly = [0] * (k_max + 1)
    for orb in all_orbits(alg, k_max):
        poly[orb.degree_exponent] += 1
    return ZetaPolynomial.of(poly)
