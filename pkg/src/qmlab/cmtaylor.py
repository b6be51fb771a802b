"""Taylor coefficients of modular forms at CM points.

For a weight-k modular form f and a CM point tau with normalized values
(P*(tau)/Omega^2, Q(tau)/Omega^4, R(tau)/Omega^6), the algebraic part of the
n-th non-holomorphic derivative is obtained by writing D^n f as a polynomial
in P, Q, R, renaming P to P*, and substituting the normalized triple.
"""

from __future__ import annotations

import cmath
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .arith import INF, as_rational, binomial, is_prime, padic_valuation, rational_str
from .qexp import eisenstein_qexp
from .qmring import HOLO, STAR, DerivativeChain, QMPoly, _derive12, _from_scaled, _normalize, _to_scaled

REGISTRY_ENV = "QMLAB_REGISTRY"

MODES = ("weak", "sharp", "conjecture")


class HypothesisError(ValueError):
    """A theorem's hypotheses do not hold for the requested sweep."""


# --- characters, class numbers, periods -------------------------------------


def is_discriminant(D: int) -> bool:
    return D % 4 in (0, 1)


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a | n)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a | n), n odd positive
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker_chi(d: int, j: int) -> int:
    """The character chi_{-d}(j) = (-d | j)."""
    if d <= 0 or not is_discriminant(-d):
        raise ValueError(f"-{d} is not a discriminant")
    return kronecker(-d, j)


def class_data(d: int) -> tuple[int, int]:
    """(class number, number of units) for discriminant -d.

    The class number counts reduced primitive forms (a, b, c) with
    b^2 - 4ac = -d. Intended for fundamental discriminants.
    """
    if d <= 0 or not is_discriminant(-d):
        raise ValueError(f"-{d} is not a discriminant")
    h = 0
    a = 1
    while 3 * a * a <= d:
        for b in range(-a + 1, a + 1):
            if (b * b + d) % (4 * a):
                continue
            c = (b * b + d) // (4 * a)
            if c < a:
                continue
            if b < 0 and c == a:
                continue
            if math.gcd(math.gcd(a, abs(b)), c) != 1:
                continue
            h += 1
        a += 1
    w = {3: 6, 4: 4}.get(d, 2)
    return h, w


def chowla_selberg(d: int) -> float:
    """The canonical period Omega*_{-d}.

    (2 pi d)^(-1/2) * (prod_{j<d} Gamma(j/d)^chi(j))^(w/(4h)); the product is
    accumulated as a sum of log-Gammas.
    """
    h, w = class_data(d)
    log_prod = sum(kronecker_chi(d, j) * math.lgamma(j / d) for j in range(1, d))
    return math.exp(log_prod * w / (4 * h)) / math.sqrt(2 * math.pi * d)


def legendre_applicable(d: int, p: int) -> bool:
    """True iff (-d | p) is 0 or -1."""
    return kronecker_chi(d, p) in (0, -1)


# --- CM points ---------------------------------------------------------------


def _is_6_smooth(n: int) -> bool:
    for q in (2, 3):
        while n % q == 0:
            n //= q
    return n == 1


@dataclass(frozen=True)
class CMPoint:
    name: str
    d: int
    triple: tuple[Fraction, Fraction, Fraction]
    omega_decimal: str = ""
    scale_note: str = ""
    tau_re: Fraction | None = None
    tau_im_sq: Fraction | None = None

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError(f"CM point {self.name}: d must be positive")
        triple = tuple(as_rational(x) for x in self.triple)
        if len(triple) != 3:
            raise ValueError(f"CM point {self.name}: triple needs three entries")
        for x in triple:
            if not _is_6_smooth(x.denominator):
                raise ValueError(f"CM point {self.name}: value {x} is not in Z[1/6]")
        object.__setattr__(self, "triple", triple)

    @property
    def tau(self) -> complex | None:
        if self.tau_re is None or self.tau_im_sq is None:
            return None
        return complex(float(self.tau_re), math.sqrt(float(self.tau_im_sq)))

    @classmethod
    def from_dict(cls, obj: dict) -> "CMPoint":
        missing = {"name", "d", "pstar", "q", "r"} - set(obj)
        if missing:
            raise ValueError(f"registry entry missing fields: {sorted(missing)}")
        opt = {k: as_rational(obj[k]) for k in ("tau_re", "tau_im_sq") if k in obj}
        return cls(
            name=str(obj["name"]),
            d=int(obj["d"]),
            triple=(obj["pstar"], obj["q"], obj["r"]),
            omega_decimal=str(obj.get("omega_decimal", "")),
            scale_note=str(obj.get("scale_note", "")),
            **opt,
        )

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "d": self.d,
            "pstar": rational_str(self.triple[0]),
            "q": rational_str(self.triple[1]),
            "r": rational_str(self.triple[2]),
            "omega_decimal": self.omega_decimal,
            "scale_note": self.scale_note,
        }
        if self.tau_re is not None:
            out["tau_re"] = rational_str(self.tau_re)
        if self.tau_im_sq is not None:
            out["tau_im_sq"] = rational_str(self.tau_im_sq)
        return out


def default_registry_text() -> str:
    return resources.files("qmlab").joinpath("registry.json").read_text(encoding="utf-8")


def load_registry(path: str | os.PathLike | None = None) -> dict[str, CMPoint]:
    """Load CM points from a JSON array; falls back to $QMLAB_REGISTRY, then the shipped file."""
    if path is None:
        path = os.environ.get(REGISTRY_ENV) or None
    text = Path(path).read_text(encoding="utf-8") if path else default_registry_text()
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("registry must be a JSON array of point objects")
    points = {}
    for obj in data:
        pt = CMPoint.from_dict(obj)
        if pt.name in points:
            raise ValueError(f"duplicate registry entry {pt.name!r}")
        points[pt.name] = pt
    return points


# --- numerics ------------------------------------------------------------------


def eisenstein_numeric(k: int, tau: complex, precision: int = 40) -> complex:
    """Sum the truncated q-expansion of E_k at q = exp(2 pi i tau)."""
    q = cmath.exp(2j * math.pi * tau)
    total = 0j
    qn = 1 + 0j
    for c in eisenstein_qexp(k, precision).coeffs:
        total += float(c) * qn
        qn *= q
    return total


def numeric_triple(tau: complex, precision: int = 40) -> tuple[complex, complex, complex]:
    """(P*(tau), Q(tau), R(tau)) as complex floats."""
    pstar = eisenstein_numeric(2, tau, precision) - 3 / (math.pi * tau.imag)
    return pstar, eisenstein_numeric(4, tau, precision), eisenstein_numeric(6, tau, precision)


def check_point_numerics(pt: CMPoint, precision: int = 40, rel_tol: float = 1e-9) -> list[str]:
    """Compare the stored triple with numeric values scaled by omega_decimal.

    Returns a list of problems (empty when consistent). Points without tau or
    omega data are skipped.
    """
    if pt.tau is None or not pt.omega_decimal:
        return []
    omega = float(pt.omega_decimal)
    problems = []
    for name, value, exact, w in zip(("pstar", "q", "r"), numeric_triple(pt.tau, precision), pt.triple, (2, 4, 6)):
        got = value / omega**w
        want = float(exact)
        scale = max(abs(want), 1.0)
        if abs(got - want) > rel_tol * scale:
            problems.append(f"{pt.name}.{name}: numeric {got.real:.12g}{got.imag:+.3g}i vs stored {exact}")
    return problems


# --- Taylor coefficients -------------------------------------------------------


@dataclass(frozen=True)
class TaylorCoeff:
    form: str
    point: str
    n: int
    value: Fraction

    def __post_init__(self):
        if not _is_6_smooth(self.value.denominator):
            raise ArithmeticError(
                f"t_{self.form}({self.point};{self.n}) = {self.value} has a denominator outside Z[1/6]"
            )


def _require_modular(f: QMPoly):
    if f.kind != HOLO or not f.is_p_free():
        raise ValueError("expected a modular form: a polynomial in Q and R only")


def taylor_coeff(f: QMPoly, pt: CMPoint, n: int, form_id: str = "f") -> TaylorCoeff:
    """t_f(tau; n) = phi(D^n f) evaluated at the normalized triple of tau."""
    _require_modular(f)
    if n < 0:
        raise ValueError("n must be nonnegative")
    value = DerivativeChain(f).advance_to(n).evaluate(pt.triple)
    return TaylorCoeff(form_id, pt.name, n, value)


def taylor_coeffs(f: QMPoly, pt: CMPoint, n_values, form_id: str = "f") -> list[TaylorCoeff]:
    """Several coefficients from one incremental derivative chain."""
    _require_modular(f)
    chain = DerivativeChain(f)
    out = []
    for n in sorted(set(n_values)):
        chain.advance_to(n)
        out.append(TaylorCoeff(form_id, pt.name, n, chain.evaluate(pt.triple)))
    return out


def nonholo_derive(f: QMPoly) -> QMPoly:
    """The non-holomorphic derivation on Q[P*, Q, R]: same rules as D with P* for P."""
    if f.kind != STAR and not f.is_p_free():
        raise ValueError("nonholo_derive expects a P*-polynomial")
    ints, den = _to_scaled(f.terms)
    ints, den = _normalize(_derive12(ints), den * 12)
    return QMPoly(_from_scaled(ints, den), f.weight + 2, STAR)


def nonholo_eq56(f: QMPoly, n: int) -> QMPoly:
    """partial^n f assembled from holomorphic derivatives.

    partial^n f = sum_r C(n, r) (k+n-1)!/(k+n-r-1)! T^r D^(n-r) f with
    T = -1/(4 pi Im z) = (P* - P)/12. The expansion is carried out in
    Q[P*, P, Q, R]; every holomorphic P must cancel.
    """
    _require_modular(f)
    k = f.weight
    derivs = [f]
    chain = DerivativeChain(f)
    for _ in range(n):
        derivs.append(chain.step().poly())
    mixed: dict[tuple[int, int, int, int], Fraction] = {}
    for r in range(n + 1):
        a_r = Fraction(binomial(n, r) * math.perm(k + n - 1, r), 12**r)
        if not a_r:
            continue
        # T^r * 12^r = sum_j C(r, j) P*^j (-P)^(r-j)
        expansion = [(j, r - j, binomial(r, j) * (-1) ** (r - j)) for j in range(r + 1)]
        for (a, b, c), coeff in derivs[n - r].terms.items():
            base = a_r * coeff
            for j, i, bc in expansion:
                key = (j, a + i, b, c)
                mixed[key] = mixed.get(key, 0) + base * bc
    out = {}
    for (s, a, b, c), v in mixed.items():
        if not v:
            continue
        if a:
            raise AssertionError(f"holomorphic P survived in partial^{n} f (exponent {a})")
        out[(s, b, c)] = v
    return QMPoly(out, k + 2 * n, STAR)


# --- sweeps --------------------------------------------------------------------


@dataclass
class ReportRow:
    form: str
    point: str
    p: int
    m: int
    n: int
    valuation: int | float
    required: int | None
    passed: bool | None
    mode: str
    value: str = ""
    hypotheses: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["valuation"] = "inf" if self.valuation == INF else self.valuation
        return d


@dataclass
class Report:
    rows: list[ReportRow] = field(default_factory=list)

    def extend(self, rows):
        self.rows.extend(rows)
        self.rows.sort(key=lambda r: (r.n, r.m))

    def failures(self) -> list[ReportRow]:
        return [r for r in self.rows if r.passed is False]

    def all_passed(self) -> bool:
        return not self.failures()

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in self.rows)


def threshold(mode: str, p: int, m: int) -> int:
    """Least n from which the mode asserts p^m | t_f(tau; n)."""
    if mode == "weak":
        return (m - 1) * p * p
    if mode in ("sharp", "conjecture"):
        return -(-m // 2) * p * p
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def check_hypotheses(f: QMPoly, pt: CMPoint, p: int, ms, mode: str) -> list[str]:
    """Names of the failed hypotheses for (f, tau, p, m) under a mode."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    k = f.weight
    failed = []
    if p < 5 or not is_prime(p):
        failed.append(f"p = {p} must be a prime >= 5")
        return failed
    if not legendre_applicable(pt.d, p):
        failed.append(f"(-{pt.d} | {p}) = 1, but must be 0 or -1")
    for m in ms:
        if mode in ("weak", "conjecture") and m <= 1:
            failed.append(f"m = {m} must exceed 1")
        if mode == "sharp":
            if m < 1:
                failed.append(f"m = {m} must be positive")
            if m > k - 2:
                failed.append(f"m = {m} exceeds k - 2 = {k - 2}")
    if mode == "sharp" and p < 2 * k - 2:
        failed.append(f"p = {p} is below 2k - 2 = {2 * k - 2}")
    if mode == "conjecture" and p < k:
        failed.append(f"p = {p} is below the weight k = {k}")
    return failed


def _sweep_chunk(args) -> list[ReportRow]:
    f, pt, p, ms, ns, mode, form_id, hyp_ok = args
    chain = DerivativeChain(f)
    rows = []
    for n in ns:
        chain.advance_to(n)
        t = TaylorCoeff(form_id, pt.name, n, chain.evaluate(pt.triple))
        v = padic_valuation(t.value, p)
        for m in ms:
            if n >= threshold(mode, p, m):
                rows.append(ReportRow(form_id, pt.name, p, m, n, v, m, v >= m, mode, rational_str(t.value), hyp_ok))
            else:
                rows.append(ReportRow(form_id, pt.name, p, m, n, v, None, None, mode, rational_str(t.value), hyp_ok))
    return rows


def sweep(
    f: QMPoly,
    pt: CMPoint,
    p: int,
    m,
    n_range,
    mode: str = "weak",
    form_id: str = "f",
    workers: int = 1,
) -> Report:
    """Check p^m | t_f(tau; n) across a range of n.

    ``weak`` and ``sharp`` reject inputs outside the corresponding theorem's
    hypotheses. ``conjecture`` is an empirical probe: it runs regardless and
    records whether the hypotheses hold in each row. With ``workers > 1``
    disjoint n-blocks run in separate processes, each with its own chain.
    """
    _require_modular(f)
    ms = sorted({m} if isinstance(m, int) else set(m))
    ns = sorted(set(n_range))
    if not ns or min(ns) < 0:
        raise ValueError("n range must be nonempty and nonnegative")
    failed = check_hypotheses(f, pt, p, ms, mode)
    if failed and mode != "conjecture":
        raise HypothesisError(f"{mode} mode hypotheses fail: " + "; ".join(failed))
    if failed and (p < 5 or not is_prime(p)):
        raise HypothesisError("; ".join(failed))
    hyp_ok = not failed
    report = Report()
    if workers <= 1 or len(ns) < 2 * workers:
        report.extend(_sweep_chunk((f, pt, p, ms, ns, mode, form_id, hyp_ok)))
        return report
    size = -(-len(ns) // workers)
    chunks = [ns[i : i + size] for i in range(0, len(ns), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for rows in pool.map(_sweep_chunk, [(f, pt, p, ms, c, mode, form_id, hyp_ok) for c in chunks]):
            report.extend(rows)
    return report
