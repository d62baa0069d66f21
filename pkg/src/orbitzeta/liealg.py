"""Lie rings over Z_p given by integer structure constants."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .arith import INF, PrimeContext, Val, valuation
from .errors import (
    AntisymmetryViolation,
    HypothesisViolation,
    JacobiViolation,
    NotPerfect,
    NotUniform,
)
from .matnf import elementary_divisor_valuations, rank_over_q


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """``[e_i, e_j] = sum_k c[i][j][k] e_k`` on the basis e_0..e_{n-1}.

    Vectors in L and in the dual L* are coordinate tuples with respect to the
    basis and its dual basis.  Named elements and automorphisms are carried
    along from the input file for the CLI.
    """

    p: int
    c: tuple  # c[i][j] is a tuple of n ints
    name: str = "L"
    elements: dict = field(default_factory=dict)
    automorphisms: dict = field(default_factory=dict)

    @classmethod
    def from_brackets(cls, p, n, brackets, name="L", elements=None, automorphisms=None):
        """Build from ``{(i, j): vector}`` given for i < j."""
        c = [[[0] * n for _ in range(n)] for _ in range(n)]
        for (i, j), vec in brackets.items():
            if len(vec) != n:
                raise ValueError(f"bracket [{i},{j}] has length {len(vec)}, expected {n}")
            for k, x in enumerate(vec):
                c[i][j][k] = int(x)
                c[j][i][k] = -int(x)
        return cls(
            p=p,
            c=_freeze(c),
            name=name,
            elements=dict(elements or {}),
            automorphisms=dict(automorphisms or {}),
        )

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def ctx(self) -> PrimeContext:
        return PrimeContext(self.p)

    def bracket(self, x: Sequence[int], y: Sequence[int]) -> tuple:
        n = self.n
        out = [0] * n
        for i in range(n):
            xi = x[i]
            if not xi:
                continue
            ci = self.c[i]
            for j in range(n):
                yj = y[j]
                if yj:
                    s = xi * yj
                    for k, ck in enumerate(ci[j]):
                        if ck:
                            out[k] += s * ck
        return tuple(out)

    def structure_tensor(self) -> np.ndarray:
        return np.array(self.c, dtype=object)

    def digest(self) -> str:
        """Stable hash of (p, structure constants); used as a cache key."""
        payload = json.dumps({"p": self.p, "c": self.c}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    # cached derived data --------------------------------------------------
    def _cache(self):
        # frozen dataclass: stash lazily computed values outside the fields
        try:
            return self.__dict__["_derived"]
        except KeyError:
            d: dict = {}
            object.__setattr__(self, "_derived", d)
            return d

    def report(self) -> StructureReport:
        cache = self._cache()
        if "report" not in cache:
            cache["report"] = validate_algebra(self)
        return cache["report"]

    def generic_psi_rank(self) -> int:
        """Rank of Psi(a) for generic a; an upper bound for every specialization."""
        cache = self._cache()
        if "psi_rank" not in cache:
            rng = random.Random(0x5EED)
            best = 0
            for _ in range(8):
                a = [rng.randrange(-(2**61), 2**61) for _ in range(self.n)]
                best = max(best, rank_over_q(psi_matrix(self, a)))
            cache["psi_rank"] = best
        return cache["psi_rank"]


def _freeze(c) -> tuple:
    return tuple(tuple(tuple(int(x) for x in cij) for cij in ci) for ci in c)


@dataclass(frozen=True)
class StructureReport:
    """``u`` is the largest u with [L, L] inside p^u L; ``m_l`` is m(L) or None."""

    n: int
    p: int
    u: Val
    perfect: bool
    m_l: Optional[int]
    bracket_divisors: tuple

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "u": "inf" if self.u is INF else self.u,
            "perfect": self.perfect,
            "m_L": self.m_l if self.perfect else "NotPerfect",
        }


def bracket_span_matrix(alg: LieAlgebra) -> list[list[int]]:
    """n x n(n-1)/2 matrix whose columns are the brackets [e_i, e_j], i < j."""
    n = alg.n
    cols = [alg.c[i][j] for i in range(n) for j in range(i + 1, n)]
    return [[col[k] for col in cols] for k in range(n)]


def validate_algebra(alg: LieAlgebra) -> StructureReport:
    n = alg.n
    c = alg.c
    for i in range(n):
        if len(c[i]) != n or any(len(cij) != n for cij in c[i]):
            raise ValueError("structure constants must form an n x n x n array")
    for i in range(n):
        for j in range(i, n):
            for k in range(n):
                if c[i][j][k] != -c[j][i][k]:
                    raise AntisymmetryViolation(i, j, k)
    e = [tuple(int(a == b) for b in range(n)) for a in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                s1 = alg.bracket(e[i], alg.bracket(e[j], e[k]))
                s2 = alg.bracket(e[j], alg.bracket(e[k], e[i]))
                s3 = alg.bracket(e[k], alg.bracket(e[i], e[j]))
                if any(a + b + d for a, b, d in zip(s1, s2, s3)):
                    raise JacobiViolation(i, j, k)
    u: Val = INF
    for i in range(n):
        for j in range(i + 1, n):
            for x in c[i][j]:
                v = valuation(x, alg.p)
                if v < u:
                    u = v
    divs = elementary_divisor_valuations(bracket_span_matrix(alg), alg.p) if n > 1 else ()
    perfect = len(divs) == n and INF not in divs
    m_l = max(divs, default=0) if perfect else None
    return StructureReport(n=n, p=alg.p, u=u, perfect=perfect, m_l=m_l, bracket_divisors=divs)


def require_uniform(alg: LieAlgebra) -> StructureReport:
    rep = alg.report()
    if rep.u is not INF and rep.u < 1:
        raise NotUniform(f"[L,L] is not inside pL (u={rep.u}); the algebra is not uniform")
    return rep


def require_perfect(alg: LieAlgebra) -> StructureReport:
    rep = require_uniform(alg)
    if not rep.perfect:
        raise NotPerfect("[L,L] has infinite index in L; lambda_i are not finite")
    return rep


def require_orbit_hypotheses(alg: LieAlgebra) -> StructureReport:
    """u >= 1 for p >= 5, u >= 2 for p = 3 (needed for the orbit-character formula)."""
    rep = require_uniform(alg)
    need = 2 if alg.p == 3 else 1
    if rep.u is not INF and rep.u < need:
        raise HypothesisViolation(
            f"p={alg.p} needs [L,L] inside p^{need}L for the orbit-character "
            f"correspondence, got u={rep.u}"
        )
    return rep


def ad_matrix(alg: LieAlgebra, x: Sequence[int]) -> list[list[int]]:
    """Matrix of y -> [x, y]; column j is [x, e_j]."""
    n = alg.n
    M = [[0] * n for _ in range(n)]
    for i, xi in enumerate(x):
        if not xi:
            continue
        for j in range(n):
            for k, ck in enumerate(alg.c[i][j]):
                if ck:
                    M[k][j] += xi * ck
    return M


def psi_matrix(alg: LieAlgebra, a: Sequence[int]) -> list[list[int]]:
    """Gram matrix of B_a(l, k) = a([l, k]): entry (i, j) = sum_s a_s c[i][j][s]."""
    n = alg.n
    return [
        [sum(a_s * cs for a_s, cs in zip(a, alg.c[i][j]) if a_s and cs) for j in range(n)]
        for i in range(n)
    ]


def psi_tensor(alg: LieAlgebra) -> np.ndarray:
    """``c`` rearranged so that ``a @ T`` reshaped to (n, n) is psi_matrix(a)."""
    n = alg.n
    T = np.array(alg.c, dtype=np.int64)  # (i, j, s)
    return np.transpose(T, (2, 0, 1)).reshape(n, n * n)


# -- standard test algebras ---------------------------------------------------


def scaled_sl2(p: int, scale: int = 1) -> LieAlgebra:
    """sl_2 on the basis (e, h, f) with every bracket multiplied by p**scale."""
    s = p**scale
    brackets = {
        (0, 1): (-2 * s, 0, 0),  # [e, h] = -2 s e
        (0, 2): (0, s, 0),  # [e, f] = s h
        (1, 2): (0, 0, -2 * s),  # [h, f] = -2 s f
    }
    swap = ((0, 0, 1), (0, -1, 0), (1, 0, 0))
    return LieAlgebra.from_brackets(
        p,
        3,
        brackets,
        name=f"sl2-scaled-p{p}" + (f"^{scale}" if scale != 1 else ""),
        elements={"e": (1, 0, 0), "h": (0, 1, 0), "f": (0, 0, 1)},
        automorphisms={"swap": swap},
    )


def abelian(p: int, n: int) -> LieAlgebra:
    return LieAlgebra.from_brackets(p, n, {}, name=f"abelian-{n}")
