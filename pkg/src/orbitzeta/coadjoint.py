"""Characters of (L, +) at finite level, radicals, and coadjoint orbits.

A character of level k is ``w(l) = theta_k ** <a, l>`` for a dual vector ``a``
read mod p**k.  The group acts on characters by ``(g.w)(l) = w(Ad(g)^-1 l)``,
which on dual coordinates is ``a -> Ad(g)^-T a``.  Orbits are generated by the
transposes of ``exp(ad e_j)`` (the images of ``exp(-e_j)``), which generate the
group; orbits do not depend on the side convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .arith import INF, CycloValue, valuation
from .errors import (
    NotAutomorphism,
    NotUniform,
    OddExponent,
    OrbitSizeMismatch,
    ResourceCapExceeded,
)
from .liealg import LieAlgebra, ad_matrix, psi_matrix, require_uniform
from .matnf import elementary_divisor_valuations, index_exponent, profile, quotient_index_exponent

ORBIT_CAP = 10**6


@dataclass(frozen=True)
class CharacterHandle:
    """``w = Phi_k(a)`` with ``a`` primitive (some entry prime to p) unless k == 0."""

    p: int
    a: tuple
    k: int

    @property
    def order(self) -> int:
        return self.p**self.k

    @property
    def trivial(self) -> bool:
        return self.k == 0


def normalize(a: Sequence[int], k: int, p: int) -> CharacterHandle:
    """Reduce ``a`` mod p**k and strip the common power of p, lowering the level."""
    a = [x % p**k for x in a] if k else [0] * len(a)
    v = min((valuation(x, p) for x in a), default=INF)
    if v is INF or v >= k:
        return CharacterHandle(p, (0,) * len(a), 0)
    k2 = k - v
    return CharacterHandle(p, tuple((x // p**v) % p**k2 for x in a), k2)


def char_value(w: CharacterHandle, l: Sequence[int]) -> CycloValue:
    """``theta_k ** <a, l>``."""
    if w.trivial:
        return CycloValue.integer(w.p, 1)
    return CycloValue.root_power(w.p, w.k, sum(x * y for x, y in zip(w.a, l)))


def radical_exponent(alg: LieAlgebra, w: CharacterHandle) -> int:
    """log_p |L : Rad(w)| from the divisor profile of Psi(a), both index routes checked."""
    if w.trivial:
        return 0
    e = quotient_index_exponent(profile(psi_matrix(alg, w.a), alg.p), w.k)
    if e % 2:
        raise OddExponent(f"odd radical exponent {e} for {w}; Psi(a) is not alternating")
    return e


def radical_exponent_fast(alg: LieAlgebra, a: Sequence[int], k: int) -> int:
    """Same quantity from the Smith form of Psi(a) mod p**k only."""
    if k == 0:
        return 0
    dvals = elementary_divisor_valuations(psi_matrix(alg, a), alg.p, cap=k)
    return index_exponent(dvals, k)


def exp_truncation_degree(u, p: int, e: int) -> int:
    """First m >= 1 with m*u - floor((m-1)/(p-1)) >= e; terms from m on vanish mod p**e."""
    if u is INF:
        return 1
    m = 1
    while m * u - (m - 1) // (p - 1) < e:
        m += 1
    return m


def adjoint_action_matrix(alg: LieAlgebra, x: Sequence[int], e: int) -> list[list[int]]:
    """``exp(ad x)`` mod p**e."""
    rep = alg.report()
    if rep.u is not INF and rep.u < 1:
        raise NotUniform("exp(ad x) needs [L,L] inside pL")
    p, n = alg.p, alg.n
    mod = p**e
    A = ad_matrix(alg, x)
    stop = exp_truncation_degree(rep.u, p, e)
    result = [[int(i == j) % mod for j in range(n)] for i in range(n)]
    power = [row[:] for row in result]
    for m in range(1, stop):
        power = _matmul(power, A)
        f = factorial(m)
        v = valuation(f, p)
        inv = pow(f // p**v, -1, mod)
        pv = p**v
        for i in range(n):
            for j in range(n):
                t = power[i][j]
                if t:
                    # t is divisible by p**(m*u) >= p**v
                    result[i][j] = (result[i][j] + (t // pv) * inv) % mod
    return result


def _matmul(A, B):
    n, m, q = len(A), len(B), len(B[0])
    return [[sum(A[i][t] * B[t][j] for t in range(m)) for j in range(q)] for i in range(n)]


def _transpose(A):
    return [list(r) for r in zip(*A)]


@lru_cache(maxsize=64)
def _dual_generators(alg: LieAlgebra, k: int) -> tuple:
    n = alg.n
    gens = []
    for j in range(n):
        e_j = [int(i == j) for i in range(n)]
        gens.append(tuple(map(tuple, _transpose(adjoint_action_matrix(alg, e_j, k)))))
    return tuple(gens)


def dual_generators(alg: LieAlgebra, k: int) -> tuple:
    """Matrices (mod p**k) acting on dual coordinates, one per basis vector."""
    return _dual_generators(alg, k)


def _apply(M, a, mod):
    return tuple(sum(mij * aj for mij, aj in zip(row, a)) % mod for row in M)


@dataclass(frozen=True)
class OrbitRecord:
    rep: CharacterHandle
    size: int
    radical_exponent: int
    members: Optional[tuple] = None

    @property
    def degree_exponent(self) -> int:
        return self.radical_exponent // 2


def coadjoint_orbit(alg: LieAlgebra, w: CharacterHandle, cap: int = ORBIT_CAP) -> OrbitRecord:
    """Closure of ``w`` under the generators; size checked against the radical index."""
    require_uniform(alg)
    if w.trivial:
        return OrbitRecord(w, 1, 0, (w.a,))
    p, k = alg.p, w.k
    mod = p**k
    gens = dual_generators(alg, k)
    seen = {w.a}
    frontier = [w.a]
    while frontier:
        nxt = []
        for a in frontier:
            for G in gens:
                b = _apply(G, a, mod)
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
        if len(seen) > cap:
            raise ResourceCapExceeded(f"orbit larger than cap={cap}")
        frontier = nxt
    rexp = radical_exponent(alg, w)
    if len(seen) != p**rexp:
        raise OrbitSizeMismatch(f"orbit of {w} has {len(seen)} elements, expected p^{rexp}")
    members = tuple(sorted(seen))
    return OrbitRecord(CharacterHandle(p, members[0], k), len(seen), rexp, members)


def level_orbits(alg: LieAlgebra, k: int, vectors: np.ndarray) -> list[OrbitRecord]:
    """Partition a G-stable set of primitive level-k dual vectors into orbits.

    Bulk counterpart of :func:`coadjoint_orbit`: one sparse graph with an edge
    a -> G a per generator, split into connected components.  Every component
    size is checked against its radical index.
    """
    require_uniform(alg)
    p, n = alg.p, alg.n
    mod = p**k
    vectors = np.asarray(vectors, dtype=np.int64).reshape(-1, n)
    if len(vectors) == 0:
        return []
    weights = mod ** np.arange(n - 1, -1, -1, dtype=np.int64)
    codes = vectors @ weights
    order = np.argsort(codes)
    codes = codes[order]
    vectors = vectors[order]
    rows, cols = [], []
    idx = np.arange(len(codes))
    for G in dual_generators(alg, k):
        img = (vectors @ np.array(G, dtype=np.int64).T) % mod
        pos = np.searchsorted(codes, img @ weights)
        if np.any(pos >= len(codes)) or np.any(codes[np.minimum(pos, len(codes) - 1)] != img @ weights):
            raise ValueError("vector set is not stable under the coadjoint action")
        rows.append(idx)
        cols.append(pos)
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(len(codes), len(codes)))
    ncomp, labels = connected_components(graph, directed=True, connection="weak")
    out = []
    # codes are sorted, so the first index of each label is the lex-least member
    first = {}
    for i, lab in enumerate(labels.tolist()):
        first.setdefault(lab, i)
    sizes = np.bincount(labels, minlength=ncomp)
    members_by_label: dict = {}
    for i, lab in enumerate(labels.tolist()):
        members_by_label.setdefault(lab, []).append(i)
    for lab in sorted(first, key=first.get):
        rep = tuple(int(x) for x in vectors[first[lab]])
        rexp = radical_exponent_fast(alg, rep, k)
        size = int(sizes[lab])
        if size != p**rexp:
            raise OrbitSizeMismatch(f"orbit of {rep} at level {k}: {size} != p^{rexp}")
        members = tuple(tuple(int(x) for x in vectors[i]) for i in members_by_label[lab])
        out.append(OrbitRecord(CharacterHandle(p, rep, k), size, rexp, members))
    return out


def primitive_vectors(p: int, n: int, k: int) -> np.ndarray:
    """All level-k dual vectors with some coordinate prime to p, in lex order."""
    mod = p**k
    grid = np.indices((mod,) * n, dtype=np.int64).reshape(n, -1).T
    keep = np.any(grid % p != 0, axis=1)
    return grid[keep]


def all_orbits(alg: LieAlgebra, k_max: int) -> list[OrbitRecord]:
    """Every orbit of characters of level <= k_max, trivial one first."""
    n = alg.n
    out = [OrbitRecord(CharacterHandle(alg.p, (0,) * n, 0), 1, 0, ((0,) * n,))]
    for k in range(1, k_max + 1):
        out.extend(level_orbits(alg, k, primitive_vectors(alg.p, n, k)))
    return out


def kirillov_character_value(orbit: OrbitRecord, u: Sequence[int]) -> tuple[CycloValue, int]:
    """``|Omega|^(-1/2) sum_{omega in Omega} omega(u)`` as (numerator, i) meaning numerator / p**i."""
    p, k = orbit.rep.p, orbit.rep.k
    if orbit.members is None:
        raise ValueError("orbit members were not materialized")
    mod = p**k
    hist: dict[int, int] = {}
    for a in orbit.members:
        e = sum(x * y for x, y in zip(a, u)) % mod if k else 0
        hist[e] = hist.get(e, 0) + 1
    return CycloValue.from_histogram(p, k, hist), orbit.degree_exponent


def kirillov_value_fraction(orbit: OrbitRecord, u: Sequence[int]) -> Fraction:
    """Rational value of the Kirillov character (raises if it is not rational)."""
    num, i = kirillov_character_value(orbit, u)
    return Fraction(num.rational_part(), orbit.rep.p**i)


def is_automorphism(alg: LieAlgebra, T: Sequence[Sequence[int]], k: int) -> bool:
    """T[x, y] == [Tx, Ty] mod p**k on basis pairs, and T invertible mod p."""
    p, n = alg.p, alg.n
    mod = p**k
    cols = [[T[i][j] for i in range(n)] for j in range(n)]  # T e_j
    for i in range(n):
        for j in range(i + 1, n):
            lhs = _apply(T, alg.c[i][j], mod)
            rhs = tuple(x % mod for x in alg.bracket(cols[i], cols[j]))
            if lhs != rhs:
                return False
    dvals = elementary_divisor_valuations(T, p, cap=1)
    return all(d == 0 for d in dvals)


def classify_orbit_by_k(
    alg: LieAlgebra,
    w: CharacterHandle,
    automorphisms: Sequence[Sequence[Sequence[int]]],
    orbit: Optional[OrbitRecord] = None,
    check: bool = True,
) -> frozenset:
    """Indices t (1-based) such that ``a o T_t`` lies in the orbit of ``w``."""
    k = w.k
    if check:
        for t, T in enumerate(automorphisms, start=1):
            if not is_automorphism(alg, T, max(k, 1)):
                raise NotAutomorphism(t)
    if orbit is None:
        orbit = coadjoint_orbit(alg, w)
    if w.trivial:
        return frozenset(range(1, len(automorphisms) + 1))
    members = set(orbit.members)
    mod = alg.p**k
    out = set()
    for t, T in enumerate(automorphisms, start=1):
        # (a o T)(l) = a(T l): dual coordinates transform by T^T
        image = _apply(_transpose(T), w.a, mod)
        if image in members:
            out.add(t)
    return frozenset(out)


def orbit_of(alg: LieAlgebra, a: Iterable[int], k: int) -> OrbitRecord:
    return coadjoint_orbit(alg, normalize(list(a), k, alg.p))
