"""Truncated q-expansions over Q and over Z/p^m."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .arith import bernoulli


def sigma(k: int, n: int) -> int:
    """Divisor power sum sum_{d | n} d^k."""
    if n < 1:
        raise ValueError("sigma: n must be positive")
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d**k
            e = n // d
            if e != d:
                total += e**k
        d += 1
    return total


class QSeries:
    """Coefficients c_0..c_{N-1} of a q-expansion, exact rationals.

    Binary operations truncate to the smaller precision of the operands.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = tuple(Fraction(c) for c in coeffs)
        if not coeffs:
            raise ValueError("QSeries needs precision >= 1")
        self.coeffs = coeffs

    @classmethod
    def constant(cls, c, precision: int) -> "QSeries":
        return cls([c] + [0] * (precision - 1))

    @property
    def precision(self) -> int:
        return len(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def __iter__(self):
        return iter(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        shown = ", ".join(str(c) for c in self.coeffs[:6])
        tail = ", ..." if self.precision > 6 else ""
        return f"QSeries(N={self.precision}, [{shown}{tail}])"

    def truncate(self, precision: int) -> "QSeries":
        if precision > self.precision:
            raise ValueError("cannot extend precision of a truncated series")
        return QSeries(self.coeffs[:precision])

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QSeries.constant(other, self.precision)
        n = min(self.precision, other.precision)
        return QSeries(a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n]))

    __radd__ = __add__

    def __neg__(self):
        return QSeries(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QSeries(c * other for c in self.coeffs)
        n = min(self.precision, other.precision)
        a, b = self.coeffs, other.coeffs
        out = [Fraction(0)] * n
        for i in range(n):
            ai = a[i]
            if ai:
                for j in range(n - i):
                    if b[j]:
                        out[i + j] += ai * b[j]
        return QSeries(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers of q-series are not supported")
        result = QSeries.constant(1, self.precision)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def is_zero(self) -> bool:
        return not any(self.coeffs)


def series_add(s: QSeries, t: QSeries) -> QSeries:
    return s + t


def series_mul(s: QSeries, t: QSeries) -> QSeries:
    return s * t


def series_pow(s: QSeries, e: int) -> QSeries:
    return s**e


def series_derive(s: QSeries) -> QSeries:
    """Apply q d/dq termwise: c_n -> n c_n."""
    return QSeries(n * c for n, c in enumerate(s.coeffs))


@lru_cache(maxsize=256)
def eisenstein_qexp(k: int, precision: int) -> QSeries:
    """E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n, truncated to ``precision`` terms."""
    if k < 2 or k % 2:
        raise ValueError(f"eisenstein_qexp: weight must be even and >= 2, got {k}")
    if precision < 1:
        raise ValueError("precision must be positive")
    factor = -Fraction(2 * k) / bernoulli(k)
    return QSeries([1] + [factor * sigma(k - 1, n) for n in range(1, precision)])


class ModQSeries:
    """Truncated q-expansion with coefficients in Z/p^m (canonical residues)."""

    __slots__ = ("p", "m", "coeffs")

    def __init__(self, coeffs, p: int, m: int = 1):
        if m < 1:
            raise ValueError("m must be positive")
        mod = p**m
        self.p = p
        self.m = m
        self.coeffs = tuple(int(c) % mod for c in coeffs)

    @property
    def modulus(self) -> int:
        return self.p**self.m

    @property
    def precision(self) -> int:
        return len(self.coeffs)

    def _check(self, other: "ModQSeries"):
        if not isinstance(other, ModQSeries):
            raise TypeError("expected ModQSeries")
        if (self.p, self.m) != (other.p, other.m):
            raise ValueError(f"modulus mismatch: {self.p}^{self.m} vs {other.p}^{other.m}")

    def __eq__(self, other):
        if not isinstance(other, ModQSeries):
            return NotImplemented
        return (self.p, self.m, self.coeffs) == (other.p, other.m, other.coeffs)

    def __hash__(self):
        return hash((self.p, self.m, self.coeffs))

    def __repr__(self):
        shown = ", ".join(map(str, self.coeffs[:8]))
        tail = ", ..." if self.precision > 8 else ""
        return f"ModQSeries({self.p}^{self.m}, N={self.precision}, [{shown}{tail}])"

    def __add__(self, other):
        self._check(other)
        n = min(self.precision, other.precision)
        return ModQSeries([a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n])], self.p, self.m)

    def __sub__(self, other):
        self._check(other)
        n = min(self.precision, other.precision)
        return ModQSeries([a - b for a, b in zip(self.coeffs[:n], other.coeffs[:n])], self.p, self.m)

    def __mul__(self, other):
        self._check(other)
        n = min(self.precision, other.precision)
        mod = self.modulus
        a, b = self.coeffs, other.coeffs
        out = [0] * n
        for i in range(n):
            if a[i]:
                for j in range(n - i):
                    out[i + j] += a[i] * b[j]
        return ModQSeries([c % mod for c in out], self.p, self.m)

    def derive(self) -> "ModQSeries":
        return ModQSeries([n * c for n, c in enumerate(self.coeffs)], self.p, self.m)

    def is_zero(self) -> bool:
        return not any(self.coeffs)


def reduce_series(s: QSeries, p: int, m: int = 1) -> ModQSeries:
    """Reduce a rational q-series mod p^m.

    Raises ValueError naming the first index whose denominator is divisible by p.
    """
    mod = p**m
    out = []
    for i, c in enumerate(s.coeffs):
        if c.denominator % p == 0:
            raise ValueError(f"coefficient of q^{i} has denominator divisible by {p}: {c}")
        out.append(c.numerator * pow(c.denominator, -1, mod))
    return ModQSeries(out, p, m)
