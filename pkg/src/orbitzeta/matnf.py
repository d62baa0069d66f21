"""Integer matrices over Z_p: minor valuations, elementary divisors, subgroup indices."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Sequence

from .arith import INF, Val, d_valuation, valuation
from .errors import ConeSelectionError, IndexFormulaMismatch

Matrix = Sequence[Sequence[int]]

# above this size the minor enumeration is skipped; see minor_valuation_profile
MINOR_LIMIT = 8


@dataclass(frozen=True)
class DivisorProfile:
    """Valuations of the determinantal divisors h_0..h_n and of the elementary divisors.

    ``hvals[i]`` is the smallest valuation of an i x i minor (``hvals[0] == 0``)
    and ``dvals`` are the Smith-form valuations in nondecreasing order.
    """

    hvals: tuple
    dvals: tuple

    @classmethod
    def from_matrix(cls, A: Matrix, p: int) -> DivisorProfile:
        dvals = elementary_divisor_valuations(A, p)
        return cls(hvals=minors_from_divisors(dvals), dvals=dvals)

    @property
    def n(self) -> int:
        return len(self.dvals)


def _as_rows(A: Matrix) -> list[list[int]]:
    return [[int(x) for x in row] for row in A]


def minor_valuation_profile(A: Matrix, p: int) -> tuple:
    """``hvals[i]`` = min over all i x i minors (any rows, any columns) of v_p."""
    rows = _as_rows(A)
    nr = len(rows)
    nc = len(rows[0]) if nr else 0
    if min(nr, nc) > MINOR_LIMIT:
        raise ValueError(f"minor enumeration limited to {MINOR_LIMIT} x {MINOR_LIMIT}")
    frozen = tuple(tuple(r) for r in rows)

    @lru_cache(maxsize=None)
    def minor(rmask: int, cols: tuple) -> int:
        # expand along the lowest row in rmask
        if not cols:
            return 1
        r = (rmask & -rmask).bit_length() - 1
        rest = rmask & (rmask - 1)
        total = 0
        for idx, c in enumerate(cols):
            a = frozen[r][c]
            if a:
                sub = minor(rest, cols[:idx] + cols[idx + 1 :])
                if sub:
                    total += (-1) ** idx * a * sub
        return total

    hvals: list = [0]
    for size in range(1, min(nr, nc) + 1):
        best: Val = INF
        for rsel in combinations(range(nr), size):
            rmask = 0
            for r in rsel:
                rmask |= 1 << r
            for csel in combinations(range(nc), size):
                v = valuation(minor(rmask, csel), p)
                if v < best:
                    best = v
        hvals.append(best)
    return tuple(hvals)


def elementary_divisor_valuations(A: Matrix, p: int, cap: int | None = None) -> tuple:
    """Smith-form valuations of ``A`` over Z_p, nondecreasing, length min(rows, cols).

    Works by exact integer row/column reduction with a minimal-valuation pivot;
    rows are only ever scaled by units, so the Z_p-equivalence class is kept.
    With ``cap`` the matrix is read mod p**cap and every result is
    ``min(d, cap)`` -- exactly the information carried by A mod p**cap.
    """
    M = _as_rows(A)
    nr = len(M)
    nc = len(M[0]) if nr else 0
    mod = p**cap if cap is not None else None
    if mod is not None:
        M = [[x % mod for x in row] for row in M]
    out: list = []
    r0 = 0
    size = min(nr, nc)
    while r0 < size:
        best_v: Val = INF
        bi = bj = -1
        for i in range(r0, nr):
            row = M[i]
            for j in range(r0, nc):
                x = row[j]
                if x:
                    v = valuation(x, p)
                    if v < best_v:
                        best_v, bi, bj = v, i, j
                        if v == 0:
                            break
            if best_v == 0:
                break
        if best_v is INF or (cap is not None and best_v >= cap):
            break
        M[r0], M[bi] = M[bi], M[r0]
        if bj != r0:
            for row in M:
                row[r0], row[bj] = row[bj], row[r0]
        piv = M[r0][r0]
        pk = p**best_v
        u = piv // pk
        prow = M[r0]
        for i in range(r0 + 1, nr):
            x = M[i][r0]
            if x:
                q = x // pk
                row = M[i]
                for j in range(r0, nc):
                    row[j] = u * row[j] - q * prow[j]
                if mod is not None:
                    M[i] = [y % mod for y in row]
        # columns: the pivot row has entries divisible by pk; clearing them
        # by column operations does not touch the lower block
        out.append(best_v)
        r0 += 1
        if mod is None:
            # keep entries from blowing up: divide rows by their content prime to p
            for i in range(r0, nr):
                row = M[i]
                g = 0
                for y in row[r0:]:
                    g = _gcd(g, y)
                if g > 1:
                    g //= p ** valuation(g, p)
                    if g > 1:
                        M[i] = [y // g if j >= r0 else y for j, y in enumerate(row)]
    fill = INF if cap is None else cap
    out.extend([fill] * (size - len(out)))
    return tuple(out)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def divisors_from_minor_ratios(hvals: Sequence) -> tuple:
    """Elementary divisor valuations as consecutive differences of ``hvals``."""
    return tuple(d_valuation(hvals[i], hvals[i - 1]) if hvals[i - 1] is not INF else INF
                 for i in range(1, len(hvals)))


def minors_from_divisors(dvals: Sequence) -> tuple:
    hvals: list = [0]
    for d in dvals:
        hvals.append(hvals[-1] + d)
    return tuple(hvals)


def profile(A: Matrix, p: int, check: bool = True) -> DivisorProfile:
    """Full profile.  With ``check`` the minor route and the reduction route are
    compared (only up to MINOR_LIMIT, where minor enumeration stays affordable)."""
    dvals = elementary_divisor_valuations(A, p)
    n = min(len(A), len(A[0]) if len(A) else 0)
    if check and n <= MINOR_LIMIT:
        hvals = minor_valuation_profile(A, p)
        if divisors_from_minor_ratios(hvals) != dvals:
            raise IndexFormulaMismatch(f"minor ratios {hvals} disagree with Smith form {dvals}")
    else:
        hvals = minors_from_divisors(dvals)
    return DivisorProfile(hvals=hvals, dvals=dvals)


def cone_index(hvals: Sequence, z_val: int) -> int:
    """The k selected by the three-case index formula for |z| = p**-z_val.

    Case 0: |z| > |h_1|; case k: |D(h_k, h_{k-1})| >= |z| > |D(h_{k+1}, h_k)|;
    case n: |z| <= |D(h_n, h_{n-1})|.  Exactly one case must hold.
    """
    n = len(hvals) - 1
    ratio = [None] + [d_valuation(hvals[k], hvals[k - 1]) for k in range(1, n + 1)]
    hits = []
    if n == 0 or z_val < hvals[1]:
        hits.append(0)
    for k in range(1, n):
        if ratio[k] <= z_val < ratio[k + 1]:
            hits.append(k)
    if n and ratio[n] <= z_val:
        hits.append(n)
    if len(hits) != 1:
        raise ConeSelectionError(f"hvals={tuple(hvals)} z_val={z_val}: cases {hits}")
    return hits[0]


def quotient_index_exponent(prof: DivisorProfile, z_val: int) -> int:
    """log_p |M1 : phi^-1(z M2)| for |z| = p**-z_val, derived two ways."""
    if z_val < 0:
        raise ValueError("z_val must be >= 0")
    k = cone_index(prof.hvals, z_val)
    by_cone = 0 if k == 0 else k * z_val - prof.hvals[k]
    by_divisors = sum(z_val - d for d in prof.dvals if d is not INF and d < z_val)
    if by_cone != by_divisors:
        raise IndexFormulaMismatch(
            f"cone formula {by_cone} != divisor sum {by_divisors} for {prof} at z_val={z_val}"
        )
    return by_divisors


def index_exponent(dvals: Sequence, z_val: int) -> int:
    """Divisor-sum form of the index exponent (no cross-check)."""
    return sum(z_val - d for d in dvals if d is not INF and d < z_val)


def rank_over_q(A: Matrix) -> int:
    """Rank over the rationals by fraction-free elimination."""
    M = _as_rows(A)
    nr = len(M)
    nc = len(M[0]) if nr else 0
    rank = 0
    for c in range(nc):
        piv = next((i for i in range(rank, nr) if M[i][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        a = M[rank][c]
        for i in range(rank + 1, nr):
            b = M[i][c]
            if b:
                M[i] = [a * x - b * y for x, y in zip(M[i], M[rank])]
        rank += 1
    return rank
