"""Supersingular polynomials from E_{p-1}, with a point-counting oracle."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .arith import as_rational, is_prime, solve_exact
from .qmring import Q, R, QMPoly, delta_poly, eisenstein_poly


@dataclass(frozen=True)
class KZDecomposition:
    """E_{p-1} = Delta^n Q^delta R^epsilon ftilde(j), with j = Q^3 / Delta.

    ``ftilde`` lists coefficients a_0..a_n of ftilde(j) = sum a_i j^i.
    """

    p: int
    n: int
    delta: int
    epsilon: int
    ftilde: tuple[Fraction, ...]

    def reassemble(self) -> QMPoly:
        D = delta_poly()
        body = QMPoly.zero(12 * self.n)
        for i, a in enumerate(self.ftilde):
            body = body + Q ** (3 * i) * D ** (self.n - i) * a
        return body * Q**self.delta * R**self.epsilon


@dataclass(frozen=True)
class SSPoly:
    """Monic polynomial over F_p, coefficients from the constant term up."""

    p: int
    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.p
        return acc

    def roots(self) -> list[int]:
        return [x for x in range(self.p) if self(x) == 0]

    def __str__(self):
        parts = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            mono = "" if i == 0 else ("j" if i == 1 else f"j^{i}")
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts) if parts else "0"


def kz_exponents(p: int) -> tuple[int, int, int]:
    """(n, delta, epsilon) with p - 1 = 12n + 4 delta + 6 epsilon."""
    w = p - 1
    for eps in (0, 1):
        for delta in (0, 1, 2):
            rest = w - 4 * delta - 6 * eps
            if rest >= 0 and rest % 12 == 0:
                return rest // 12, delta, eps
    raise ValueError(f"weight {w} has no decomposition")


def _check_prime(p: int):
    if p < 5 or not is_prime(p):
        raise ValueError(f"p must be a prime >= 5, got {p}")


@lru_cache(maxsize=None)
def kz_decompose(p: int) -> KZDecomposition:
    _check_prime(p)
    A = eisenstein_poly(p - 1)
    n, delta, eps = kz_exponents(p)
    # exact division by Q^delta R^eps: every monomial must carry those powers
    quotient = {}
    for (a, b, c), v in A.terms.items():
        if b < delta or c < eps:
            raise ArithmeticError(f"E_{p - 1} is not divisible by Q^{delta} R^{eps}")
        quotient[(a, b - delta, c - eps)] = v
    target = QMPoly(quotient, 12 * n)
    D = delta_poly()
    basis = [Q ** (3 * i) * D ** (n - i) for i in range(n + 1)]
    keys = [(0, 3 * s, 2 * (n - s)) for s in range(n + 1)]
    columns = [[b.coefficient(*k) for k in keys] for b in basis]
    sol = solve_exact(columns, [target.coefficient(*k) for k in keys])
    if sol is None or sum((b * a for a, b in zip(sol, basis)), QMPoly.zero(12 * n)) != target:
        raise ArithmeticError(f"E_{p - 1} quotient is not a polynomial in j (bug)")
    return KZDecomposition(p, n, delta, eps, tuple(sol))


def _polymul_mod(f: list[int], g: list[int], p: int) -> list[int]:
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        for j, b in enumerate(g):
            out[i + j] = (out[i + j] + a * b) % p
    return out


def ss_poly(p: int) -> SSPoly:
    """ss_p(j) = j^delta (j - 1728)^epsilon ftilde(j) mod p, made monic."""
    kz = kz_decompose(p)
    ft = []
    for a in kz.ftilde:
        if a.denominator % p == 0:
            raise ValueError(f"ftilde coefficient {a} is not p-integral")
        ft.append(a.numerator * pow(a.denominator, -1, p) % p)
    poly = ft
    if kz.delta:
        poly = _polymul_mod(poly, [0, 1], p)
    if kz.epsilon:
        poly = _polymul_mod(poly, [-1728 % p, 1], p)
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    lead = poly[-1]
    if lead == 0:
        raise ArithmeticError("supersingular polynomial vanished mod p")
    inv = pow(lead, -1, p)
    return SSPoly(p, tuple(c * inv % p for c in poly))


def curve_with_j(j: int, p: int) -> tuple[int, int]:
    """(a, b) with y^2 = x^3 + ax + b over F_p having j-invariant j."""
    j %= p
    if j == 0:
        return 0, 1
    if j == 1728 % p:
        return 1, 0
    k = j * pow(1728 - j, -1, p) % p
    return 3 * k % p, 2 * k % p


def count_points(a: int, b: int, p: int) -> int:
    """#E(F_p) for y^2 = x^3 + ax + b, including the point at infinity."""
    squares = [0] * p
    for y in range(p):
        squares[y * y % p] += 1
    return 1 + sum(squares[(x * x * x + a * x + b) % p] for x in range(p))


def brute_force_supersingular(p: int) -> list[int]:
    """All j in F_p whose curves have trace 0, by naive point counting."""
    _check_prime(p)
    if p > 1000:
        raise ValueError("naive oracle is limited to p <= 1000")
    out = []
    for j in range(p):
        a, b = curve_with_j(j, p)
        if (count_points(a, b, p) - p - 1) % p == 0:
            out.append(j)
    return out


def j_invariant(triple) -> Fraction:
    """j = 1728 Q^3 / (Q^3 - R^2) from normalized (P*, Q, R) values."""
    _, q, r = (as_rational(x) for x in triple)
    den = q**3 - r**2
    if den == 0:
        raise ValueError("Q^3 = R^2: degenerate triple has no j-invariant")
    return 1728 * q**3 / den


def j_mod_p(triple, p: int) -> int:
    j = j_invariant(triple)
    if j.denominator % p == 0:
        raise ValueError(f"j = {j} is not p-integral")
    return j.numerator * pow(j.denominator, -1, p) % p
