"""Weight-homogeneous polynomials in (P, Q, R) and the operators acting on them.

A :class:`QMPoly` maps exponent triples ``(a, b, c)`` (powers of P or P*,
Q, R) to nonzero rationals. The first variable is either Ramanujan's P
(quasimodular, ``kind="P"``) or its almost-holomorphic shift P*
(``kind="P*"``); the two kinds share all arithmetic and differ only in which
operators accept them.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

from .arith import as_rational, binomial, rational_str, solve_exact
from .qexp import QSeries, eisenstein_qexp

HOLO = "P"
STAR = "P*"
_KINDS = (HOLO, STAR)

VAR_WEIGHTS = (2, 4, 6)


def monomial_weight(e: tuple[int, int, int]) -> int:
    return 2 * e[0] + 4 * e[1] + 6 * e[2]


class QMPoly:
    __slots__ = ("terms", "weight", "kind")

    def __init__(self, terms=None, weight: int | None = None, kind: str = HOLO, *, _trusted=False):
        if kind not in _KINDS:
            raise ValueError(f"unknown kind {kind!r}")
        if _trusted:
            clean = terms
        else:
            clean = {}
            for e, c in (terms or {}).items():
                c = as_rational(c)
                if c:
                    e = tuple(int(x) for x in e)
                    if len(e) != 3 or min(e) < 0:
                        raise ValueError(f"bad exponent triple {e}")
                    clean[e] = c
        weights = {monomial_weight(e) for e in clean}
        if len(weights) > 1:
            raise ValueError(f"not weight-homogeneous: weights {sorted(weights)}")
        if weights:
            w = weights.pop()
            if weight is not None and weight != w:
                raise ValueError(f"declared weight {weight} but terms have weight {w}")
            weight = w
        elif weight is None:
            weight = 0
        self.terms: dict[tuple[int, int, int], Fraction] = clean
        self.weight = weight
        self.kind = kind

    # construction helpers

    @classmethod
    def const(cls, c, kind: str = HOLO) -> "QMPoly":
        return cls({(0, 0, 0): c}, 0, kind)

    @classmethod
    def zero(cls, weight: int = 0, kind: str = HOLO) -> "QMPoly":
        return cls({}, weight, kind)

    @classmethod
    def monomial(cls, a: int, b: int, c: int, coeff=1, kind: str = HOLO) -> "QMPoly":
        return cls({(a, b, c): coeff}, kind=kind)

    # queries

    def is_zero(self) -> bool:
        return not self.terms

    def is_p_free(self) -> bool:
        return all(e[0] == 0 for e in self.terms)

    def p_degree(self) -> int:
        return max((e[0] for e in self.terms), default=0)

    def coefficient(self, a: int, b: int, c: int) -> Fraction:
        return self.terms.get((a, b, c), Fraction(0))

    def denominators(self) -> set[int]:
        return {c.denominator for c in self.terms.values()}

    # arithmetic

    def _coerce(self, other) -> "QMPoly":
        if isinstance(other, QMPoly):
            if other.kind != self.kind and not (other.is_zero() or self.is_zero()):
                if other.is_p_free():
                    return QMPoly(other.terms, other.weight, self.kind, _trusted=True)
                if self.is_p_free():
                    return other
                raise ValueError(f"cannot combine kinds {self.kind} and {other.kind}")
            return other
        if isinstance(other, (int, Fraction)):
            return QMPoly.const(other, self.kind)
        return NotImplemented

    def _result_kind(self, other: "QMPoly") -> str:
        if self.kind == other.kind:
            return self.kind
        # a P-free operand adopts the other's kind
        return other.kind if self.is_p_free() else self.kind

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.weight != other.weight:
            raise ValueError(f"cannot add weights {self.weight} and {other.weight}")
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return QMPoly(out, self.weight, self._result_kind(other), _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return QMPoly({e: -c for e, c in self.terms.items()}, self.weight, self.kind, _trusted=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return QMPoly.zero(self.weight, self.kind)
            return QMPoly({e: c * other for e, c in self.terms.items()}, self.weight, self.kind, _trusted=True)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        kind = self._result_kind(other)
        out: dict = {}
        for (a1, b1, c1), x in self.terms.items():
            for (a2, b2, c2), y in other.terms.items():
                e = (a1 + a2, b1 + b2, c1 + c2)
                out[e] = out.get(e, 0) + x * y
        out = {e: c for e, c in out.items() if c}
        return QMPoly(out, self.weight + other.weight, kind, _trusted=True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        result = QMPoly.const(1, self.kind)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QMPoly.const(other, self.kind)
        if not isinstance(other, QMPoly):
            return NotImplemented
        if self.terms != other.terms:
            return self.is_zero() and other.is_zero()
        # a P-free polynomial is the same element in either ring
        return self.kind == other.kind or self.is_p_free()

    def __hash__(self):
        kind = None if self.is_p_free() else self.kind
        return hash((kind, frozenset(self.terms.items())))

    def __repr__(self):
        return f"QMPoly({self}, weight={self.weight}, kind={self.kind!r})"

    def __str__(self):
        return format_poly(self.terms, first_var=self.kind)

    # calculus

    def partial(self, var: int) -> "QMPoly":
        """Formal partial derivative with respect to variable 0 (P/P*), 1 (Q) or 2 (R)."""
        out = {}
        for e, c in self.terms.items():
            if e[var]:
                f = list(e)
                f[var] -= 1
                out[tuple(f)] = c * e[var]
        w = self.weight - VAR_WEIGHTS[var]
        return QMPoly(out, max(w, 0) if not out else None, self.kind, _trusted=True)


def format_poly(terms: dict, first_var: str = "P", names=None) -> str:
    """Canonical text form, highest (a, b, c) first; parseable for kind P."""
    names = names or (first_var, "Q", "R")
    if not terms:
        return "0"
    pieces = []
    for e in sorted(terms, reverse=True):
        c = terms[e]
        mono = "*".join(
            (n if k == 1 else f"{n}^{k}") for n, k in zip(names, e) if k
        )
        mag = abs(c)
        if mono:
            body = mono if mag == 1 else f"{rational_str(mag)}*{mono}"
        else:
            body = rational_str(mag)
        pieces.append(("-" if c < 0 else "+", body))
    sign, body = pieces[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


P = QMPoly.monomial(1, 0, 0)
Q = QMPoly.monomial(0, 1, 0)
R = QMPoly.monomial(0, 0, 1)
PSTAR = QMPoly.monomial(1, 0, 0, kind=STAR)


# --- Ramanujan derivation -------------------------------------------------
#
# With DP = (P^2 - Q)/12, DQ = (PQ - R)/3, DR = (PR - Q^2)/2, the operator
# 12*D maps Z[P, Q, R] to itself:
#   12 D(P^a Q^b R^c) = (a + 4b + 6c) P^(a+1) Q^b R^c - a P^(a-1) Q^(b+1) R^c
#                       - 4b P^a Q^(b-1) R^(c+1) - 6c P^a Q^(b+2) R^(c-1)
# Iterated derivatives therefore run on integer coefficients over a single
# power-of-12 denominator, normalized by the content gcd after every step.


def _to_scaled(terms: dict) -> tuple[dict, int]:
    den = 1
    for c in terms.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    return {e: int(c * den) for e, c in terms.items()}, den


def _derive12(ints: dict) -> dict:
    out: dict = {}
    get = out.get
    for (a, b, c), v in ints.items():
        e = (a + 1, b, c)
        out[e] = get(e, 0) + (a + 4 * b + 6 * c) * v
        if a:
            e = (a - 1, b + 1, c)
            out[e] = get(e, 0) - a * v
        if b:
            e = (a, b - 1, c + 1)
            out[e] = get(e, 0) - 4 * b * v
        if c:
            e = (a, b + 2, c - 1)
            out[e] = get(e, 0) - 6 * c * v
    return {e: v for e, v in out.items() if v}


def _normalize(ints: dict, den: int) -> tuple[dict, int]:
    if not ints:
        return ints, 1
    g = math.gcd(den, *ints.values())
    if g > 1:
        ints = {e: v // g for e, v in ints.items()}
        den //= g
    return ints, den


def _from_scaled(ints: dict, den: int) -> dict:
    return {e: Fraction(v, den) for e, v in ints.items()}


class DerivativeChain:
    """Successive Ramanujan derivatives D^n f, one step at a time.

    Sweeps over consecutive n reuse the previous derivative instead of
    recomputing from scratch.
    """

    def __init__(self, f: QMPoly):
        if f.kind != HOLO:
            raise ValueError("the Ramanujan derivation acts on P-polynomials; use nonholo for P*")
        self.base = f
        self.n = 0
        self._ints, self._den = _to_scaled(f.terms)

    @property
    def weight(self) -> int:
        return self.base.weight + 2 * self.n

    def step(self) -> "DerivativeChain":
        self._ints, self._den = _normalize(_derive12(self._ints), self._den * 12)
        self.n += 1
        return self

    def advance_to(self, n: int) -> "DerivativeChain":
        if n < self.n:
            raise ValueError("cannot move a derivative chain backwards")
        while self.n < n:
            self.step()
        return self

    def poly(self, kind: str = HOLO) -> QMPoly:
        return QMPoly(_from_scaled(self._ints, self._den), self.weight, kind, _trusted=True)

    def evaluate(self, triple) -> Fraction:
        """Value of phi(D^n f) at normalized (P*, Q, R) values."""
        return _eval_scaled(self._ints, self._den, triple)


def _eval_scaled(ints: dict, den: int, triple) -> Fraction:
    if not ints:
        return Fraction(0)
    xs = [as_rational(t) for t in triple]
    top = [max(e[i] for e in ints) for i in range(3)]
    # integer power tables over a common denominator per variable
    tables = []
    common = 1
    for x, k in zip(xs, top):
        n, d = x.numerator, x.denominator
        if n == 0:
            tables.append({0: d**k})
        else:
            tables.append({j: n**j * d ** (k - j) for j in range(k + 1)})
        common *= d**k
    ta, tb, tc = tables
    total = 0
    for (a, b, c), v in ints.items():
        if a in ta and b in tb and c in tc:
            total += v * ta[a] * tb[b] * tc[c]
    return Fraction(total, common * den)


def derive(f: QMPoly) -> QMPoly:
    """Ramanujan's derivation D = q d/dq on Q[P, Q, R]; raises weight by 2."""
    if f.kind != HOLO:
        raise ValueError("derive: starred-P input; use cmtaylor.nonholo_derive")
    out = derive_n(f, 1)
    assert out.is_zero() or out.weight == f.weight + 2
    return out


def derive_n(f: QMPoly, n: int) -> QMPoly:
    if n < 0:
        raise ValueError("derive_n: n must be nonnegative")
    if f.kind != HOLO:
        raise ValueError("derive_n: starred-P input rejected")
    if n == 0:
        return f
    return DerivativeChain(f).advance_to(n).poly()


def phi(f: QMPoly) -> QMPoly:
    """Relabel P as P*: the image of a quasimodular polynomial as almost-holomorphic."""
    if f.kind != HOLO:
        raise ValueError("phi: input is already starred")
    return QMPoly(f.terms, f.weight, STAR, _trusted=True)


def evaluate(f: QMPoly, triple) -> Fraction:
    """Substitute (P*, Q, R) <- triple."""
    if f.kind != STAR and not f.is_p_free():
        raise ValueError("evaluate: P-polynomials have no CM values; apply phi first")
    ints, den = _to_scaled(f.terms)
    return _eval_scaled(ints, den, triple)


# --- q-expansions ----------------------------------------------------------


@lru_cache(maxsize=None)
def _var_power_series(var: int, e: int, precision: int) -> QSeries:
    if e == 0:
        return QSeries.constant(1, precision)
    base = eisenstein_qexp(VAR_WEIGHTS[var], precision)
    return _var_power_series(var, e - 1, precision) * base


def to_qseries(f: QMPoly, precision: int) -> QSeries:
    """Substitute the q-expansions of E_2, E_4, E_6 for P, Q, R."""
    if f.kind != HOLO:
        raise ValueError("to_qseries: P* has no q-expansion")
    total = QSeries.constant(0, precision)
    for (a, b, c), coeff in f.terms.items():
        mono = _var_power_series(0, a, precision) * _var_power_series(1, b, precision)
        mono = mono * _var_power_series(2, c, precision)
        total = total + mono * coeff
    return total


def qr_monomials(weight: int) -> list[tuple[int, int, int]]:
    """Exponents (0, b, c) with 4b + 6c = weight, highest Q-power first."""
    if weight < 0 or weight % 2:
        return []
    out = []
    for c in range(weight // 6 + 1):
        rest = weight - 6 * c
        if rest % 4 == 0:
            out.append((0, rest // 4, c))
    return sorted(out, reverse=True)


@lru_cache(maxsize=None)
def eisenstein_poly(k: int) -> QMPoly:
    """E_k (k >= 4 even) as the unique polynomial in Q, R.

    Found by matching q-expansions with one coefficient more than the number
    of unknowns, so an inconsistent system is detected rather than ignored.
    """
    if k < 4 or k % 2:
        raise ValueError(f"eisenstein_poly: weight must be even and >= 4, got {k}")
    basis = qr_monomials(k)
    prec = len(basis) + 1
    columns = [to_qseries(QMPoly.monomial(*e), prec).coeffs for e in basis]
    target = eisenstein_qexp(k, prec).coeffs
    sol = solve_exact(columns, target)
    if sol is None:
        raise ArithmeticError(f"E_{k} is not in the span of weight-{k} monomials (bug)")
    return QMPoly(dict(zip(basis, sol)), k)


def delta_poly() -> QMPoly:
    """The discriminant (Q^3 - R^2)/1728."""
    return (Q**3 - R**2) / 1728


def theta(f: QMPoly, p: int) -> QMPoly:
    """Serre-type operator (BQ - AR)/3 d/dQ + (BR - AQ^2)/2 d/dR, A = E_{p-1}, B = E_{p+1}."""
    if f.kind != HOLO or not f.is_p_free():
        raise ValueError("theta: input must be a modular form (no P)")
    A = eisenstein_poly(p - 1)
    B = eisenstein_poly(p + 1)
    out = (B * Q - A * R) / 3 * f.partial(1) + (B * R - A * Q**2) / 2 * f.partial(2)
    if out.is_zero():
        return QMPoly.zero(f.weight + p + 1)
    assert out.weight == f.weight + p + 1
    return out


def rankin_cohen(f: QMPoly, g: QMPoly, n: int) -> QMPoly:
    """[f, g]_n = sum_{r+s=n} (-1)^r C(k+n-1, s) C(k'+n-1, r) D^r f D^s g."""
    for h in (f, g):
        if h.kind != HOLO or not h.is_p_free():
            raise ValueError("rankin_cohen: inputs must be modular forms (no P)")
    k, kk = f.weight, g.weight
    df = [f]
    chain = DerivativeChain(f)
    for _ in range(n):
        df.append(chain.step().poly())
    dg = [g]
    chain = DerivativeChain(g)
    for _ in range(n):
        dg.append(chain.step().poly())
    out = QMPoly.zero(k + kk + 2 * n)
    for r in range(n + 1):
        s = n - r
        coeff = (-1) ** r * binomial(k + n - 1, s) * binomial(kk + n - 1, r)
        if coeff:
            out = out + df[r] * dg[s] * coeff
    if not out.is_p_free():
        raise AssertionError("Rankin-Cohen bracket is not P-free")
    if out.is_zero():
        return QMPoly.zero(k + kk + 2 * n)
    assert out.weight == k + kk + 2 * n
    return out


def iter_derivatives(f: QMPoly) -> Iterator[QMPoly]:
    """Yield f, Df, D^2 f, ... indefinitely."""
    chain = DerivativeChain(f)
    yield f
    while True:
        yield chain.step().poly()
