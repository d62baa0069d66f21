"""Brute-force reference computations used only by the tests.

Nothing here shares code with the residue tree or the Smith elimination:
radical indices come from vectorized minors of Psi(a) (or from counting the
kernel outright), over every primitive vector at a level.
"""

from collections import Counter
from itertools import combinations, permutations

import numpy as np

from orbitzeta.liealg import psi_tensor


def _perm_sign(perm):
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def _batch_det(M, rows, cols):
    """Leibniz determinant of the (rows x cols) submatrix for a stack of matrices."""
    total = np.zeros(M.shape[0], dtype=np.int64)
    for perm in permutations(range(len(rows))):
        term = np.full(M.shape[0], _perm_sign(perm), dtype=np.int64)
        for r, c in zip(rows, (cols[i] for i in perm)):
            term = term * M[:, r, c]
        total += term
    return total


def _batch_val(x, p, cap):
    """min(v_p(x), cap) entrywise."""
    v = np.zeros(x.shape, dtype=np.int64)
    x = x.copy()
    for _ in range(cap):
        hit = (x % p == 0)
        v += hit
        x = np.where(hit, x // p, x)
    return v


def batch_capped_divisors(alg, A, cap):
    """Smith valuations of Psi(a), capped at ``cap``, from minor valuation differences.

    Minor valuations are capped at i * cap for i x i minors, which is enough to
    recover every divisor below ``cap``.
    """
    n = alg.n
    p = alg.p
    M = (A @ psi_tensor(alg)).reshape(-1, n, n)
    h = [np.zeros(len(A), dtype=np.int64)]
    for i in range(1, n + 1):
        best = np.full(len(A), i * cap, dtype=np.int64)
        for rows in combinations(range(n), i):
            for cols in combinations(range(n), i):
                best = np.minimum(best, _batch_val(_batch_det(M, rows, cols), p, i * cap))
        h.append(best)
    d = [np.minimum(h[i] - h[i - 1], cap) for i in range(1, n + 1)]
    # once a divisor reaches the cap the later differences are meaningless
    reached = np.zeros(len(A), dtype=bool)
    out = []
    for di in d:
        di = np.where(reached, cap, di)
        reached |= di >= cap
        out.append(di)
    return np.stack(out, axis=1)


def primitive_grid(p, n, k):
    grid = np.indices((p**k,) * n, dtype=np.int64).reshape(n, -1).T
    return grid[np.any(grid % p != 0, axis=1)]


def scan_level(alg, k, g=None, chunk=200_000):
    """Counters (total, kill, near) of radical exponents over all primitive a mod p^k."""
    p = alg.p
    A = primitive_grid(p, alg.n, k)
    total, kill, near = Counter(), Counter(), Counter()
    for start in range(0, len(A), chunk):
        B = A[start:start + chunk]
        d = batch_capped_divisors(alg, B, k)
        rexp = (k - d).sum(axis=1)
        total.update(rexp.tolist())
        if g is not None:
            c = (B @ np.array(g, dtype=np.int64))
            k_hit = c % p**k == 0
            n_hit = (c % p ** (k - 1) == 0) & ~k_hit
            kill.update(rexp[k_hit].tolist())
            near.update(rexp[n_hit].tolist())
    return total, kill, near


def scan_with_lifting(alg, k, base, rank):
    """Counts at level k from a full scan at level ``base`` <= k.

    Every primitive a mod p^base whose first ``rank`` divisors are all below
    ``base`` has its level-k exponent fixed; each has p^(n(k-base)) lifts.
    """
    p, n = alg.p, alg.n
    A = primitive_grid(p, n, base)
    d = batch_capped_divisors(alg, A, base)[:, :rank]
    if np.any(d >= base):
        raise AssertionError("scan level too low to determine every divisor")
    rexp = (k - d).sum(axis=1)
    mult = p ** (n * (k - base))
    return Counter({r: c * mult for r, c in Counter(rexp.tolist()).items()})


def kernel_radical_exponent(alg, a, k):
    """log_p |L : Rad| with Rad = {l : a([l, x]) = 0 mod p^k for all x}, by enumeration."""
    p, n = alg.p, alg.n
    mod = p**k
    P = (np.array(a, dtype=np.int64) @ psi_tensor(alg)).reshape(n, n)
    L = np.indices((mod,) * n, dtype=np.int64).reshape(n, -1).T
    ker = int(np.all((L @ P) % mod == 0, axis=1).sum())
    size = mod**n
    e = 0
    while p**e * ker < size:
        e += 1
    assert p**e * ker == size
    return e
