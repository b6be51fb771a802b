"""Exact integer and rational helpers.

Rationals are :class:`fractions.Fraction` throughout the package; the type is
always stored reduced with a positive denominator, which is exactly the
canonical form the rest of the library relies on.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

BigRational = Fraction

INF = math.inf

DEFAULT_FACTOR_BOUND = 10**6


def as_rational(x) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def rational_str(x: Fraction) -> str:
    """Serialize as ``"num/den"`` (``"num"`` when integral)."""
    x = as_rational(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def binomial(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def _vp_int(n: int, p: int) -> int:
    n = abs(n)
    v = 0
    # square the divisor while it keeps dividing; fast on huge powers of p
    while n % p == 0:
        pk, e = p, 1
        while n % (pk * pk) == 0:
            pk *= pk
            e *= 2
        n //= pk
        v += e
    return v


def padic_valuation(x, p: int):
    """v_p(x) for a rational x; ``math.inf`` for zero."""
    x = as_rational(x)
    if x == 0:
        return INF
    return _vp_int(x.numerator, p) - _vp_int(x.denominator, p)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    f = 3
    while f <= r:
        if n % f == 0:
            return False
        f += 2
    return True


def primes_up_to(bound: int) -> list[int]:
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, math.isqrt(bound) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, bound + 1, i)))
    return [i for i, flag in enumerate(sieve) if flag]


def von_staudt_denominator(k: int) -> int:
    """Product of primes q with (q - 1) | k."""
    out = 1
    for q in primes_up_to(k + 1):
        if k % (q - 1) == 0:
            out *= q
    return out


# Bernoulli memo: append-only list guarded by a lock, so concurrent readers
# always see a consistent prefix.
_bern: list[Fraction] = [Fraction(1)]
_bern_lock = threading.Lock()


def _bernoulli_all(k: int) -> Fraction:
    with _bern_lock:
        while len(_bern) <= k:
            n = len(_bern)
            # sum_{j<n+1} C(n+1, j) B_j = 0
            s = sum(binomial(n + 1, j) * _bern[j] for j in range(n))
            _bern.append(-s / (n + 1))
        return _bern[k]


def bernoulli(k: int) -> Fraction:
    """Exact Bernoulli number B_k for even k >= 0 (B_1 = -1/2 convention unused)."""
    if k < 0 or (k % 2 == 1 and k != 1):
        raise ValueError(f"bernoulli: k must be even and nonnegative, got {k}")
    if k == 1:
        raise ValueError("bernoulli: B_1 is not supported")
    b = _bernoulli_all(k)
    if k > 0 and b.denominator != von_staudt_denominator(k):
        raise ArithmeticError(f"B_{k} failed the Von Staudt-Clausen denominator check")
    return b


@dataclass(frozen=True)
class FactorList:
    """Result of bounded trial division: ``sign * prod(p**e) * cofactor``."""

    sign: int
    factors: tuple[tuple[int, int], ...]
    cofactor: int = 1

    def value(self) -> int:
        out = self.sign * self.cofactor
        for q, e in self.factors:
            out *= q**e
        return out

    def __str__(self) -> str:
        parts = [f"{q}^{e}" if e > 1 else str(q) for q, e in self.factors]
        if self.cofactor != 1 or not parts:
            parts.append(str(self.cofactor))
        body = " * ".join(parts)
        return f"-{body}" if self.sign < 0 else body


@lru_cache(maxsize=4)
def _trial_primes(bound: int) -> tuple[int, ...]:
    return tuple(primes_up_to(bound))


def factor_bounded(x: int, bound: int = DEFAULT_FACTOR_BOUND) -> FactorList:
    """Trial-divide x by every prime <= bound.

    The cofactor is whatever survives; it has no prime factor <= bound but is
    not claimed to be prime.
    """
    if x == 0:
        raise ValueError("factor_bounded: cannot factor 0")
    if bound < 2:
        raise ValueError("factor_bounded: bound must be >= 2")
    sign = -1 if x < 0 else 1
    n = abs(x)
    factors = []
    for q in _trial_primes(bound):
        if q * q > n:
            break
        if n % q == 0:
            e = _vp_int(n, q)
            n //= q**e
            factors.append((q, e))
    # early break means n is 1 or a prime; keep it as a factor only if the
    # trial range would have reached it
    if 1 < n <= bound:
        factors.append((n, 1))
        n = 1
    return FactorList(sign, tuple(factors), n)


def factor_rational(x, bound: int = DEFAULT_FACTOR_BOUND) -> str:
    """Human-readable bounded factorization of a rational, e.g. ``-3^2 * 7 / 2``."""
    x = as_rational(x)
    if x == 0:
        return "0"
    num = str(factor_bounded(x.numerator, bound))
    if x.denominator == 1:
        return num
    return f"{num} / {factor_bounded(x.denominator, bound)}"


def solve_exact(columns: list[list[Fraction]], target: list[Fraction]) -> list[Fraction] | None:
    """Solve ``sum_j x_j * columns[j] == target`` over Q.

    The system may be overdetermined; returns None when it is inconsistent.
    Raises if the columns are linearly dependent (solution not unique).
    """
    nrows = len(target)
    ncols = len(columns)
    rows = [[Fraction(columns[j][i]) for j in range(ncols)] + [Fraction(target[i])] for i in range(nrows)]
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if piv is None:
            raise ArithmeticError("solve_exact: singular system")
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
    for i in range(r, nrows):
        if rows[i][-1] != 0:
            return None
    return [rows[i][-1] for i in range(ncols)]


def solve_mod_p(columns: list[list[int]], target: list[int], p: int) -> list[int] | None:
    """Solve ``sum_j x_j * columns[j] == target`` over F_p.

    Columns must be independent mod p; returns None when inconsistent.
    """
    nrows = len(target)
    ncols = len(columns)
    if ncols == 0:
        return [] if all(t % p == 0 for t in target) else None
    rows = [[columns[j][i] % p for j in range(ncols)] + [target[i] % p] for i in range(nrows)]
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if rows[i][c]), None)
        if piv is None:
            raise ArithmeticError("solve_mod_p: dependent columns")
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [v * inv % p for v in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[r])]
        r += 1
    if any(rows[i][-1] for i in range(r, nrows)):
        return None
    return [rows[i][-1] for i in range(ncols)]
