"""Exact scalar arithmetic: p-adic valuations, the D function and cyclotomic integers.

Nothing in this module touches floating point.  Valuations are Python ints or
the :data:`INF` sentinel (the valuation of zero).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Iterable, Sequence, Union

from .errors import LevelOverflow


@total_ordering
class _Infinity:
    """Valuation of zero.  Absorbs addition, exceeds every int."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("orbitzeta.INF")

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise ArithmeticError("INF - INF is undefined")
        return self

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
Val = Union[int, _Infinity]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class PrimeContext:
    p: int
    e_max: int = 12

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.p < 3:
            raise ValueError("p = 2 is not supported")
        if self.e_max < 1:
            raise ValueError("e_max must be >= 1")

    def valuation(self, x: int) -> Val:
        return valuation(x, self.p)

    def display(self, v: Val) -> str:
        """Valuation capped at e_max for display (stored values stay exact)."""
        if v is INF or v > self.e_max:
            return f">={self.e_max}" if v is not INF else "inf"
        return str(v)


def valuation(x: int, p: int) -> Val:
    """p-adic valuation of an integer; ``INF`` for zero."""
    if x == 0:
        return INF
    x = abs(x)
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def vector_valuation(xs: Iterable[int], p: int) -> Val:
    """Minimum valuation over the entries (``INF`` for the zero vector)."""
    return min((valuation(x, p) for x in xs), default=INF)


def unit_part(x: int, p: int) -> tuple[int, int]:
    """Split ``x = u * p**v`` with ``u`` prime to p.  ``x`` must be nonzero."""
    v = valuation(x, p)
    return x // p**v, v


def d_function(x: int, y: int, p: int) -> int:
    """``x / y`` when ``y != 0`` and ``|x|_p <= |y|_p``; ``0`` otherwise.

    The quotient is p-integral; it comes back as an int when it divides
    exactly and as a ``Fraction`` (denominator prime to p) otherwise.
    """
    if y == 0:
        return 0
    if valuation(x, p) < valuation(y, p):
        return 0
    q, r = divmod(x, y)
    if r == 0:
        return q
    return Fraction(x, y)


def d_valuation(vx: Val, vy: Val) -> Val:
    """Valuation of ``D(x, y)`` computed from the valuations of x and y."""
    if vy is INF or vx < vy:
        return INF
    return vx - vy


# ---------------------------------------------------------------------------
# cyclotomic integers


def phi_degree(p: int, m: int) -> int:
    if m == 0:
        return 1
    return (p - 1) * p ** (m - 1)


@lru_cache(maxsize=None)
def _exponent_table(p: int, m: int) -> tuple:
    """Canonical coordinates of theta_m**e for every e in [0, p**m).

    Entry e is a tuple of (index, sign) pairs.
    """
    if m == 0:
        return (((0, 1),),)
    deg = phi_degree(p, m)
    step = p ** (m - 1)
    table = []
    for e in range(p**m):
        if e < deg:
            table.append(((e, 1),))
        else:
            r = e - deg
            # theta^deg = -(1 + theta^step + ... + theta^((p-2)*step))
            table.append(tuple((j * step + r, -1) for j in range(p - 1)))
    return tuple(table)


class CycloValue:
    """Element of Z[theta_m], theta_m a fixed primitive p**m-th root of unity.

    Stored in the power basis ``1, theta, ..., theta**(phi-1)`` modulo the
    p**m-th cyclotomic polynomial.  Level 0 is the integers.
    """

    __slots__ = ("p", "level", "coeffs")

    def __init__(self, p: int, level: int, coeffs: Sequence[int]):
        deg = phi_degree(p, level)
        if len(coeffs) != deg:
            raise ValueError(f"expected {deg} coefficients, got {len(coeffs)}")
        self.p = p
        self.level = level
        self.coeffs = tuple(int(c) for c in coeffs)

    # constructors -------------------------------------------------------
    @classmethod
    def integer(cls, p: int, c: int, level: int = 0) -> CycloValue:
        coeffs = [0] * phi_degree(p, level)
        coeffs[0] = c
        return cls(p, level, coeffs)

    @classmethod
    def root_power(cls, p: int, level: int, e: int) -> CycloValue:
        """``theta_level ** e``."""
        return cls.from_histogram(p, level, {e % p**level: 1})

    @classmethod
    def from_histogram(cls, p: int, level: int, counts) -> CycloValue:
        """``sum counts[e] * theta**e``.  ``counts`` is a mapping or a sequence
        indexed by exponent (exponents are read mod p**level)."""
        coeffs = [0] * phi_degree(p, level)
        table = _exponent_table(p, level)
        mod = p**level
        items = counts.items() if hasattr(counts, "items") else enumerate(counts)
        for e, c in items:
            c = int(c)
            if c:
                for idx, sign in table[int(e) % mod]:
                    coeffs[idx] += sign * c
        return cls(p, level, coeffs)

    @classmethod
    def from_polynomial(cls, p: int, level: int, poly: Sequence[int]) -> CycloValue:
        """Reduce an arbitrary integer polynomial in theta."""
        hist: dict[int, int] = {}
        mod = p**level
        for e, c in enumerate(poly):
            if c:
                hist[e % mod] = hist.get(e % mod, 0) + c
        return cls.from_histogram(p, level, hist)

    # structure ----------------------------------------------------------
    def _coerce(self, other) -> tuple[CycloValue, CycloValue]:
        if isinstance(other, int):
            other = CycloValue.integer(self.p, other, self.level)
        if not isinstance(other, CycloValue) or other.p != self.p:
            raise TypeError("incompatible cyclotomic values")
        lvl = max(self.level, other.level)
        return self.embed(lvl), other.embed(lvl)

    def embed(self, level: int) -> CycloValue:
        """Image under theta_m -> theta_level ** (p**(level-m))."""
        if level == self.level:
            return self
        if level < self.level:
            raise ValueError("cannot embed into a lower level")
        scale = self.p ** (level - self.level)
        return CycloValue.from_histogram(
            self.p, level, {i * scale: c for i, c in enumerate(self.coeffs) if c}
        )

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_part(self) -> int:
        if not self.is_rational():
            raise ValueError("value is not rational")
        return self.coeffs[0]

    def conjugate(self) -> CycloValue:
        mod = self.p**self.level
        return CycloValue.from_histogram(
            self.p, self.level, {(-i) % mod: c for i, c in enumerate(self.coeffs) if c}
        )

    def galois(self, u: int) -> CycloValue:
        """Apply the automorphism theta -> theta**u (u prime to p)."""
        if u % self.p == 0:
            raise ValueError("u must be prime to p")
        mod = self.p**self.level
        return CycloValue.from_histogram(
            self.p, self.level, {(u * i) % mod: c for i, c in enumerate(self.coeffs) if c}
        )

    # ring operations ----------------------------------------------------
    def __add__(self, other):
        a, b = self._coerce(other)
        return CycloValue(a.p, a.level, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return CycloValue(self.p, self.level, [-x for x in self.coeffs])

    def __sub__(self, other):
        a, b = self._coerce(other)
        return CycloValue(a.p, a.level, [x - y for x, y in zip(a.coeffs, b.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        mod = a.p**a.level
        hist: dict[int, int] = {}
        for i, x in enumerate(a.coeffs):
            if not x:
                continue
            for j, y in enumerate(b.coeffs):
                if y:
                    e = (i + j) % mod
                    hist[e] = hist.get(e, 0) + x * y
        return CycloValue.from_histogram(a.p, a.level, hist)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = CycloValue.integer(self.p, 1, self.level)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            return self.is_rational() and self.coeffs[0] == other
        if not isinstance(other, CycloValue) or other.p != self.p:
            return NotImplemented
        a, b = self._coerce(other)
        return a.coeffs == b.coeffs

    def __hash__(self):
        # rationals must hash equal across levels since they compare equal
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.p, self.level, self.coeffs))

    def __repr__(self):
        terms = [f"{c}*t^{i}" if i else str(c) for i, c in enumerate(self.coeffs) if c]
        return f"CycloValue(p={self.p}, m={self.level}: {' + '.join(terms) or '0'})"


def cyclo_canonical(ctx: PrimeContext, level: int, value) -> CycloValue:
    """Canonical form of ``theta_level ** value`` (int) or of a polynomial in theta."""
    if level > ctx.e_max:
        raise LevelOverflow(f"level {level} exceeds e_max={ctx.e_max}")
    if isinstance(value, int):
        return CycloValue.root_power(ctx.p, level, value)
    return CycloValue.from_polynomial(ctx.p, level, value)


def galois_orbit_sum(m: int, c: int, p: int) -> int:
    """Sum of the Galois conjugates of ``theta_m ** c`` (m >= 1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    v = valuation(c % p**m, p)
    if v is INF:
        return (p - 1) * p ** (m - 1)
    if v == m - 1:
        return -(p ** (m - 1))
    return 0
