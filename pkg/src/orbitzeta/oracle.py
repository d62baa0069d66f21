"""Finite quotients N/N^(p^k) via a truncated BCH group law, and an independent
check of the orbit-character correspondence on them."""

from __future__ import annotations

import random
from fractions import Fraction
from functools import reduce
from math import lcm
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .arith import INF, CycloValue, valuation
from .bch import MAX_DEGREE, bch_lie_terms
from .coadjoint import all_orbits
from .errors import ResourceCapExceeded, SeriesDegreeExceeded
from .liealg import LieAlgebra, require_orbit_hypotheses, require_uniform

GROUP_CAP = 10**7


def bch_degrees(u, p: int, k: int) -> list[int]:
    """Degrees d >= 2 whose BCH term can be nonzero mod p**k."""
    if u is INF:
        return []
    degs = []
    d = 2
    while (d - 1) * u - (d - 1) // (p - 1) < k:
        if d > MAX_DEGREE:
            raise SeriesDegreeExceeded(
                f"u={u}, p={p}, k={k} needs BCH terms of degree {d} > {MAX_DEGREE}"
            )
        degs.append(d)
        d += 1
    return degs


class FiniteQuotientGroup:
    """The group L/p^kL with multiplication x*y = log(exp x exp y) truncated.

    Elements are integer coordinate arrays with entries in [0, p**k).
    Methods accept arrays of shape (N, n) and work row-wise.
    """

    def __init__(self, alg: LieAlgebra, k: int):
        rep = require_uniform(alg)
        self.alg = alg
        self.p = alg.p
        self.n = alg.n
        self.k = k
        self.mod = alg.p**k
        self.order = self.mod**self.n
        self.degrees = bch_degrees(rep.u, alg.p, k)
        terms = bch_lie_terms()
        self._plan = []
        for d in self.degrees:
            den = reduce(lcm, (c.denominator for _, c in terms[d]), 1)
            v = valuation(den, self.p)
            nums = [(w, int(c * den)) for w, c in terms[d]]
            inv = pow(den // self.p**v, -1, self.mod)
            self._plan.append((d, v, inv, nums))
        vmax = max((v for _, v, _, _ in self._plan), default=0)
        self._work_mod = self.p ** (k + vmax)
        cmax = max((abs(x) for ci in alg.c for cij in ci for x in cij), default=0)
        big = self.n * self.n * self._work_mod**2 * max(1, min(cmax, self._work_mod))
        self._dtype = np.int64 if big < 2**62 else object
        C = np.array(alg.c, dtype=object).reshape(self.n * self.n, self.n) % self._work_mod
        self._C = C.astype(self._dtype)

    def _bracket(self, A, B):
        n = self.n
        prod = (A[:, :, None] * B[:, None, :]).reshape(len(A), n * n)
        return (prod @ self._C) % self._work_mod

    def multiply(self, X, Y) -> np.ndarray:
        X = np.asarray(X, dtype=self._dtype).reshape(-1, self.n) % self._work_mod
        Y = np.asarray(Y, dtype=self._dtype).reshape(-1, self.n) % self._work_mod
        out = X + Y
        for d, v, inv, nums in self._plan:
            wm = self._work_mod
            cache = {(0,): X, (1,): Y}
            acc = np.zeros_like(X)
            for word, num in nums:
                for m in range(2, len(word) + 1):
                    pre = word[:m]
                    if pre not in cache:
                        cache[pre] = self._bracket(cache[pre[:-1]], cache[(pre[-1],)])
                acc = (acc + (num % wm) * cache[word]) % wm
            # acc = den * Z_d exactly mod p**(k+vmax); Z_d is p-integral
            out = out + (acc // self.p**v) * inv
        return (out % self.mod).astype(np.int64)

    def inverse(self, X) -> np.ndarray:
        return (-np.asarray(X, dtype=np.int64)) % self.mod

    def conjugate(self, G, X) -> np.ndarray:
        """g x g^-1."""
        return self.multiply(self.multiply(G, X), self.inverse(G))

    def elements(self) -> np.ndarray:
        if self.order > GROUP_CAP:
            raise ResourceCapExceeded(f"group order {self.order} exceeds cap {GROUP_CAP}")
        return np.indices((self.mod,) * self.n, dtype=np.int64).reshape(self.n, -1).T

    def codes(self, X) -> np.ndarray:
        w = self.mod ** np.arange(self.n - 1, -1, -1, dtype=np.int64)
        return np.asarray(X, dtype=np.int64) @ w


def bch_multiply(alg: LieAlgebra, x, y, k: int) -> tuple:
    G = FiniteQuotientGroup(alg, k)
    return tuple(int(t) for t in G.multiply([x], [y])[0])


def conjugacy_class_count(alg: LieAlgebra, k: int) -> int:
    """Number of conjugacy classes of L/p^kL under the BCH group law."""
    G = FiniteQuotientGroup(alg, k)
    X = G.elements()
    codes = G.codes(X)  # equals arange(order) by construction
    rows, cols = [], []
    for j in range(G.n):
        g = np.zeros((len(X), G.n), dtype=np.int64)
        g[:, j] = 1
        rows.append(codes)
        cols.append(G.codes(G.conjugate(g, X)))
    r, c = np.concatenate(rows), np.concatenate(cols)
    graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(G.order, G.order))
    ncomp, _ = connected_components(graph, directed=True, connection="weak")
    return int(ncomp)


def _orbit_histograms(orbit, X, k, p):
    """H[x, e] = #{omega in orbit : <a_omega, x> = e mod p**k} (level-k exponents)."""
    mod = p**k
    lift = p ** (k - orbit.rep.k)
    A = (np.array(orbit.members, dtype=np.int64) * lift) % mod
    E = (X @ A.T) % mod  # (|X|, |orbit|)
    H = np.zeros((len(X), mod), dtype=np.int64)
    rows = np.repeat(np.arange(len(X)), E.shape[1])
    np.add.at(H, (rows, E.ravel()), 1)
    return H


def _kirillov_numerator(orbit, x, k, p) -> CycloValue:
    mod = p**k
    lift = p ** (k - orbit.rep.k)
    hist: dict = {}
    for a in orbit.members:
        e = (sum(ai * xi for ai, xi in zip(a, x)) * lift) % mod
        hist[e] = hist.get(e, 0) + 1
    return CycloValue.from_histogram(p, k, hist)


def kirillov_verify(
    alg: LieAlgebra,
    k: int,
    sample_pairs: int = 1000,
    seed: int = 0,
    full_limit: int = 3**6,
) -> list[dict]:
    """Check the orbit characters on L/p^kL.

    1. class functions under BCH conjugation (sampled);
    2. orthonormality over the whole group in exact cyclotomic arithmetic
       (all pairs when the group has at most ``full_limit`` elements);
    3. sum of squared degrees equals the group order (exact);
    4. number of orbits equals the number of conjugacy classes (exact).
    """
    require_orbit_hypotheses(alg)
    p, n = alg.p, alg.n
    rng = random.Random(seed)
    G = FiniteQuotientGroup(alg, k)
    X = G.elements()
    orbits = all_orbits(alg, k)
    report = []

    # 1. class-function property
    n_checks = max(sample_pairs, 1)
    bad = 0
    picks = [rng.randrange(len(orbits)) for _ in range(n_checks)]
    us = np.array([[rng.randrange(G.mod) for _ in range(n)] for _ in range(n_checks)])
    gs = np.array([[rng.randrange(G.mod) for _ in range(n)] for _ in range(n_checks)])
    conj = G.conjugate(gs, us)
    for t in range(n_checks):
        orb = orbits[picks[t]]
        if _kirillov_numerator(orb, us[t], k, p) != _kirillov_numerator(orb, conj[t], k, p):
            bad += 1
    report.append({"check": "class_function", "pass": bad == 0, "samples": n_checks, "failures": bad})

    # 2. orthonormality
    if G.order <= full_limit:
        chosen = list(range(len(orbits)))
    else:
        s = 1
        while s * (s + 1) // 2 < sample_pairs:
            s += 1
        s = min(s, len(orbits))
        chosen = sorted(rng.sample(range(len(orbits)), s))
    hists = {i: _orbit_histograms(orbits[i], X, k, p).astype(np.float64) for i in chosen}
    # integer counts through BLAS: every entry of H^T H' is at most
    # |G| * |orbit|^2, far below 2**53, so the float64 products are exact
    largest = max(orbits[i].size for i in chosen)
    if G.order * largest * largest >= 2**53:
        raise ResourceCapExceeded("orthonormality sums would leave the exact float range")
    mod = G.mod
    idx = np.arange(mod)
    bad = pairs = 0
    for a_pos, i in enumerate(chosen):
        for j in chosen[a_pos:]:
            M = np.rint(hists[i].T @ hists[j]).astype(np.int64)
            S = np.array([M[idx, (idx - c) % mod].sum() for c in range(mod)])
            val = CycloValue.from_histogram(p, k, S.tolist())
            expected = G.order * p ** (orbits[i].degree_exponent + orbits[j].degree_exponent)
            target = expected if i == j else 0
            if val != target:
                bad += 1
            pairs += 1
    report.append({"check": "orthonormality", "pass": bad == 0, "pairs": pairs, "failures": bad,
                   "exhaustive": G.order <= full_limit})

    # 3. degree-sum identity, with the degree read off as Phi(0)
    total = Fraction(0)
    for orb in orbits:
        num = _kirillov_numerator(orb, (0,) * n, k, p)
        deg = Fraction(num.rational_part(), p**orb.degree_exponent)
        total += deg * deg
    report.append({"check": "degree_square_sum", "pass": total == G.order,
                   "value": str(total), "expected": str(G.order)})

    # 4. orbit count vs conjugacy classes
    classes = conjugacy_class_count(alg, k)
    report.append({"check": "orbit_class_count", "pass": classes == len(orbits),
                   "orbits": len(orbits), "classes": classes})
    return report


def is_associative_sample(alg: LieAlgebra, k: int, samples: Optional[int] = None, seed: int = 0) -> bool:
    G = FiniteQuotientGroup(alg, k)
    if samples is None and G.order**3 <= 10**4:
        X = G.elements()
        a, b, c = (np.repeat(X, len(X) ** 2, axis=0),
                   np.tile(np.repeat(X, len(X), axis=0), (len(X), 1)),
                   np.tile(X, (len(X) ** 2, 1)))
    else:
        rng = np.random.default_rng(seed)
        m = samples or 10**5
        a, b, c = (rng.integers(0, G.mod, size=(m, G.n)) for _ in range(3))
    lhs = G.multiply(G.multiply(a, b), c)
    rhs = G.multiply(a, G.multiply(b, c))
    return bool(np.array_equal(lhs, rhs))
