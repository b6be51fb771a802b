"""Mod p^m structure on Q[P, Q, R]: reduction, division by powers of A = E_{p-1},
filtration of modular forms, and the ideal valuation v with respect to (A^p, p).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .arith import INF, padic_valuation, solve_mod_p
from .qmring import HOLO, QMPoly, eisenstein_poly, format_poly, monomial_weight, qr_monomials


class ModPoly:
    """Weight-homogeneous polynomial with coefficients in Z/p^m."""

    __slots__ = ("p", "m", "terms", "weight", "kind")

    def __init__(self, terms: dict, p: int, m: int, weight: int | None = None, kind: str = HOLO):
        if m < 1:
            raise ValueError("m must be positive")
        mod = p**m
        clean = {}
        for e, c in terms.items():
            c %= mod
            if c:
                clean[e] = c
        weights = {monomial_weight(e) for e in clean}
        if len(weights) > 1:
            raise ValueError(f"not weight-homogeneous: {sorted(weights)}")
        if weights:
            weight = weights.pop()
        self.p, self.m = p, m
        self.terms = clean
        self.weight = 0 if weight is None else weight
        self.kind = kind

    @property
    def modulus(self) -> int:
        return self.p**self.m

    def is_zero(self) -> bool:
        return not self.terms

    def is_p_free(self) -> bool:
        return all(e[0] == 0 for e in self.terms)

    def _check(self, other: "ModPoly"):
        if (self.p, self.m) != (other.p, other.m):
            raise ValueError(f"modulus mismatch: {self.p}^{self.m} vs {other.p}^{other.m}")

    def __add__(self, other: "ModPoly") -> "ModPoly":
        self._check(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.weight != other.weight:
            raise ValueError(f"cannot add weights {self.weight} and {other.weight}")
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return ModPoly(out, self.p, self.m, self.weight, self.kind)

    def __neg__(self):
        return ModPoly({e: -c for e, c in self.terms.items()}, self.p, self.m, self.weight, self.kind)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return ModPoly({e: c * other for e, c in self.terms.items()}, self.p, self.m, self.weight, self.kind)
        self._check(other)
        out: dict = {}
        for (a1, b1, c1), x in self.terms.items():
            for (a2, b2, c2), y in other.terms.items():
                e = (a1 + a2, b1 + b2, c1 + c2)
                out[e] = out.get(e, 0) + x * y
        return ModPoly(out, self.p, self.m, self.weight + other.weight, self.kind)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = ModPoly({(0, 0, 0): 1}, self.p, self.m, 0, self.kind)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, ModPoly):
            return NotImplemented
        return (self.p, self.m, self.terms) == (other.p, other.m, other.terms)

    def __hash__(self):
        return hash((self.p, self.m, frozenset(self.terms.items())))

    def __repr__(self):
        body = format_poly(self.terms, first_var=self.kind)
        return f"ModPoly({body} mod {self.p}^{self.m}, weight={self.weight})"

    def lift(self) -> QMPoly:
        """Representatives in [0, p^m) as a rational polynomial."""
        return QMPoly({e: c for e, c in self.terms.items()}, self.weight, self.kind)


def _reduce_coeff(c: Fraction, p: int, mod: int) -> int:
    return c.numerator * pow(c.denominator, -1, mod) % mod


def reduce_poly(f: QMPoly, p: int, m: int = 1) -> ModPoly:
    """Coefficientwise image in (Z/p^m)[P, Q, R]; f must lie in Z_(p)[P, Q, R]."""
    mod = p**m
    out = {}
    for e, c in f.terms.items():
        if c.denominator % p == 0:
            raise ValueError(
                f"coefficient {c} of {format_poly({e: 1}, f.kind)} has denominator divisible by {p}"
            )
        out[e] = _reduce_coeff(c, p, mod)
    return ModPoly(out, p, m, f.weight, f.kind)


@lru_cache(maxsize=None)
def A_poly(p: int) -> QMPoly:
    """A = E_{p-1} as a polynomial in Q, R."""
    return eisenstein_poly(p - 1)


@lru_cache(maxsize=None)
def A_power_mod(p: int, m: int, t: int) -> ModPoly:
    return reduce_poly(A_poly(p), p, m) ** t


def _divide_mod_p(F: ModPoly, divisor: ModPoly) -> ModPoly | None:
    """Exact quotient F / divisor over F_p, or None.

    The divisor is P-free, so each P-degree slice of F is divided separately
    by solving a small linear system on the Q,R-monomials of the quotient
    weight. Multiplication by a nonzero polynomial is injective (F_p[Q, R] is
    a domain), so any solution is the unique quotient.
    """
    p = F.p
    if divisor.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    slices: dict[int, dict] = {}
    for (a, b, c), v in F.terms.items():
        slices.setdefault(a, {})[(b, c)] = v
    quotient = {}
    dw = divisor.weight
    for a, sl in slices.items():
        qw = F.weight - 2 * a - dw
        if qw < 0:
            return None
        unknowns = qr_monomials(qw)
        if not unknowns:
            return None
        products = []
        rows_keys = set(sl)
        for (_, b0, c0) in unknowns:
            prod = {}
            for (_, b1, c1), y in divisor.terms.items():
                key = (b0 + b1, c0 + c1)
                prod[key] = (prod.get(key, 0) + y) % p
            products.append(prod)
            rows_keys.update(prod)
        rows = sorted(rows_keys)
        columns = [[prod.get(k, 0) for k in rows] for prod in products]
        target = [sl.get(k, 0) for k in rows]
        sol = solve_mod_p(columns, target, p)
        if sol is None:
            return None
        for (_, b0, c0), x in zip(unknowns, sol):
            if x:
                quotient[(a, b0, c0)] = x
    return ModPoly(quotient, p, 1, F.weight - dw, F.kind)


def divides_Apow(F: ModPoly, t: int) -> tuple[bool, ModPoly | None]:
    """Decide whether A^t divides F in (Z/p^m)[P, Q, R]; return the quotient if so.

    For m > 1 the quotient is built p-adically: divide mod p, subtract,
    divide the residual by p, and repeat m times.
    """
    p, m = F.p, F.m
    qweight = F.weight - t * (p - 1)
    if F.is_zero():
        return True, ModPoly({}, p, m, max(qweight, 0), F.kind)
    if qweight < 0:
        return False, None
    divisor_p = A_power_mod(p, 1, t)
    divisor = A_power_mod(p, m, t)
    mod = p**m
    quotient: dict = {}
    residual = dict(F.terms)
    scale = 1
    for _ in range(m):
        # residual is divisible by `scale` here
        layer = ModPoly({e: (v // scale) for e, v in residual.items()}, p, 1, F.weight, F.kind)
        if not layer.is_zero():
            g = _divide_mod_p(layer, divisor_p)
            if g is None:
                return False, None
            for e, v in g.terms.items():
                quotient[e] = (quotient.get(e, 0) + scale * v) % mod
            sub = ModPoly({e: scale * v for e, v in g.terms.items()}, p, m, qweight, F.kind) * divisor
            residual = (ModPoly(residual, p, m, F.weight, F.kind) - sub).terms
            if any(v % (scale * p) for v in residual.values()):
                raise AssertionError("p-adic division stage left a non-divisible residual")
        scale *= p
    if residual:
        return False, None
    return True, ModPoly(quotient, p, m, qweight, F.kind)


def filtration(F: ModPoly, k: int | None = None) -> int:
    """Least weight of a modular form congruent to F mod p^m.

    Repeatedly strips A^{p^(m-1)} while it divides F, lowering the weight by
    p^(m-1)(p-1) each time.
    """
    if F.is_zero():
        raise ValueError("filtration of 0 is undefined")
    if not F.is_p_free():
        raise ValueError("filtration is defined for modular forms (no P) only")
    if k is None:
        k = F.weight
    t = F.p ** (F.m - 1)
    step = t * (F.p - 1)
    while k - step >= 0:
        ok, quo = divides_Apow(F, t)
        if not ok:
            break
        F = quo
        k -= step
    return k


def min_coeff_valuation(f: QMPoly, p: int):
    return min((padic_valuation(c, p) for c in f.terms.values()), default=INF)


def _check_p_integral(f: QMPoly, p: int):
    for c in f.terms.values():
        if c.denominator % p == 0:
            raise ValueError(f"coefficient {c} is not p-integral for p = {p}")


def ideal_member(f: QMPoly, p: int, n: int) -> bool:
    """Is f in (A^p, p)^n inside Z_(p)[P, Q, R]?

    (A^p, p)^n = sum_i p^(n-i) A^(pi) Z_(p)[P, Q, R]. Reducing a membership
    witness mod p shows f = A^(pn) g (mod p) for some g, and after replacing
    g by its canonical lift with coefficients in [0, p) the difference
    f - A^(pn) g lies in p (A^p, p)^(n-1). Since F_p[P, Q, R] is a domain the
    mod-p quotient is unique, so this greedy descent decides membership.
    """
    if f.kind != HOLO:
        raise ValueError("ideal membership is defined on P-polynomials")
    _check_p_integral(f, p)
    A = A_poly(p)
    while n > 0:
        if f.is_zero():
            return True
        fbar = reduce_poly(f, p, 1)
        if not fbar.is_zero():
            ok, g = divides_Apow(fbar, p * n)
            if not ok:
                return False
            f = f - A ** (p * n) * g.lift()
        f = f / p
        n -= 1
    return True


def ideal_valuation(f: QMPoly, p: int):
    """v(f) = sup{n : f in (A^p, p)^n}; ``math.inf`` for f = 0.

    Upper bound used for the search: if f is in the n-th power then
    f = sum_i p^(n-i) A^(pi) g_i with only i <= w / (p(p-1)) contributing
    (weights), so v(f) <= c + floor(w / (p(p-1))) with c the least p-adic
    valuation of a coefficient.
    """
    if f.kind != HOLO:
        raise ValueError("ideal_valuation: starred input")
    _check_p_integral(f, p)
    if f.is_zero():
        return INF
    c = min_coeff_valuation(f, p)
    cap = c + f.weight // (p * (p - 1)) + 1
    v = 0
    while v < cap and ideal_member(f, p, v + 1):
        v += 1
    if v == cap:
        raise AssertionError("ideal valuation reached its theoretical cap")
    return v


def is_modular_mod(f: QMPoly, p: int, m: int = 1) -> bool:
    """Structural modularity mod p^m: the reduced polynomial has no P."""
    return reduce_poly(f, p, m).is_p_free()
