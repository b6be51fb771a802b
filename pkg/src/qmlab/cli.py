"""Command-line front end.

Exit codes: 0 when every required check passes, 1 when a required sweep row
fails, 2 for usage, parse, registry or hypothesis errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from fractions import Fraction

from . import cmtaylor, padic, ssing
from .arith import DEFAULT_FACTOR_BOUND, factor_rational, is_prime, padic_valuation, rational_str
from .qmring import QMPoly, delta_poly, derive_n, eisenstein_poly, monomial_weight

log = logging.getLogger("qmlab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class UsageError(Exception):
    pass


# --- polynomial literals -------------------------------------------------------

_TOKEN = re.compile(r"(\d+)|([PQR])|(\S)")


def _tokenize(text: str):
    tokens = []
    for m in _TOKEN.finditer(text):
        start = m.start()
        if m.group(1):
            tokens.append(("int", int(m.group(1)), start))
        elif m.group(2):
            tokens.append(("var", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*/^":
                raise ParseError(f"unexpected character {ch!r}", start)
            tokens.append(("op", ch, start))
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    _VARS = {"P": 0, "Q": 1, "R": 2}

    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.take()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            got = tok[1] if tok[0] != "end" else "end of input"
            raise ParseError(f"expected {want!r}, got {got!r}", tok[2])
        return tok

    def form(self):
        terms = []
        sign = 1
        if self.peek()[0] == "op" and self.peek()[1] in "+-":
            sign = -1 if self.take()[1] == "-" else 1
        terms.append(self.term(sign))
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            sign = -1 if self.take()[1] == "-" else 1
            terms.append(self.term(sign))
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return terms

    def coeff(self):
        num = self.expect("int")[1]
        if self.peek()[:2] == ("op", "/"):
            self.take()
            tok = self.expect("int")
            if tok[1] == 0:
                raise ParseError("zero denominator", tok[2])
            return Fraction(num, tok[1])
        return Fraction(num)

    def term(self, sign):
        start = self.peek()[2]
        coeff = Fraction(1)
        if self.peek()[0] == "int":
            coeff = self.coeff()
            if not (self.peek()[:2] == ("op", "*")):
                return (sign * coeff, (0, 0, 0), start)
            self.take()
        exps = [0, 0, 0]
        self.factor(exps)
        while self.peek()[:2] == ("op", "*"):
            self.take()
            self.factor(exps)
        return (sign * coeff, tuple(exps), start)

    def factor(self, exps):
        tok = self.expect("var")
        power = 1
        if self.peek()[:2] == ("op", "^"):
            self.take()
            power = self.expect("int")[1]
        exps[self._VARS[tok[1]]] += power


def parse_form(text: str) -> QMPoly:
    """Parse a polynomial literal in P, Q, R such as ``"1/1728*Q^3 - 1/1728*R^2"``."""
    terms = _Parser(text).form()
    weight = None
    out: dict = {}
    for coeff, exps, pos in terms:
        w = monomial_weight(exps)
        if weight is None:
            weight = w
        elif w != weight:
            raise ParseError(f"mixed weights {weight} and {w}", pos)
        out[exps] = out.get(exps, 0) + coeff
    return QMPoly(out, weight)


BUILTIN_NAMES = ("E4", "E6", "E8", "E10", "E14", "delta", "eisenstein:k")


def builtin_form(name: str) -> QMPoly | None:
    key = name.strip()
    if key.lower() == "delta":
        return delta_poly()
    m = re.fullmatch(r"E(\d+)", key) or re.fullmatch(r"eisenstein:(\d+)", key)
    if m:
        k = int(m.group(1))
        if k < 4 or k % 2:
            raise UsageError(f"no Eisenstein series of weight {k}; use an even weight >= 4")
        return eisenstein_poly(k)
    return None


def resolve_form(text: str) -> QMPoly:
    f = builtin_form(text)
    if f is not None:
        return f
    if not re.search(r"[PQR\d]", text):
        raise UsageError(f"unknown form {text!r}; built-ins: {', '.join(BUILTIN_NAMES)} or a literal in P, Q, R")
    return parse_form(text)


def resolve_form_deriv(text: str) -> tuple[QMPoly, int]:
    name, sep, n = text.rpartition(":")
    if not sep or not n.strip().isdigit():
        raise UsageError(f"--form-deriv expects FORM:n, got {text!r}")
    return resolve_form(name), int(n)


# --- commands ------------------------------------------------------------------


def _registry(args):
    try:
        return cmtaylor.load_registry(args.registry)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load registry: {exc}") from exc


def _point(args):
    points = _registry(args)
    if args.point not in points:
        raise UsageError(f"unknown point {args.point!r}; available: {', '.join(sorted(points))}")
    return points[args.point]


def _modular(args) -> QMPoly:
    f = resolve_form(args.form)
    if not f.is_p_free():
        raise UsageError(f"form {args.form!r} involves P; CM Taylor coefficients need a modular form")
    return f


def _prime(p: int) -> int:
    if p < 5 or not is_prime(p):
        raise UsageError(f"p = {p} must be a prime >= 5")
    return p


def _valuation_json(v):
    return "inf" if v == cmtaylor.INF else v


def cmd_taylor(args) -> int:
    f = _modular(args)
    pt = _point(args)
    if args.n < 0:
        raise UsageError("--n must be nonnegative")
    t = cmtaylor.taylor_coeff(f, pt, args.n, form_id=args.form)
    vals = {str(p): _valuation_json(padic_valuation(t.value, p)) for p in args.primes}
    row = {
        "form": args.form,
        "point": pt.name,
        "n": args.n,
        "weight": f.weight,
        "value": rational_str(t.value),
        "valuations": vals,
    }
    if args.json:
        print(json.dumps(row, sort_keys=True))
    else:
        print(f"t_{args.form}({pt.name}; {args.n}) = {rational_str(t.value)}")
        print(f"  factored: {factor_rational(t.value, args.factor_bound)}")
        for p, v in vals.items():
            print(f"  v_{p} = {v}")
    return EXIT_OK


def _n_values(args) -> list[int]:
    lo, hi = args.n_range
    if lo < 0 or hi < lo:
        raise UsageError(f"bad --n-range {lo} {hi}")
    return list(range(lo, hi + 1))


def cmd_sweep(args) -> int:
    f = _modular(args)
    pt = _point(args)
    _prime(args.p)
    ns = _n_values(args)
    try:
        report = cmtaylor.sweep(f, pt, args.p, args.m, ns, args.mode, form_id=args.form, workers=args.workers)
    except cmtaylor.HypothesisError as exc:
        raise UsageError(str(exc)) from exc
    text = report.to_jsonl()
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failures = report.failures()
    required = sum(r.passed is not None for r in report.rows)
    log.info("%d rows, %d required, %d failed", len(report.rows), required, len(failures))
    for r in failures:
        print(f"FAIL n={r.n} m={r.m}: v_{r.p} = {r.valuation} < {r.required}", file=sys.stderr)
    return EXIT_FAIL if failures else EXIT_OK


def cmd_filtration(args) -> int:
    f = resolve_form(args.form)
    _prime(args.p)
    try:
        F = padic.reduce_poly(f, args.p, args.m)
        w = padic.filtration(F, args.weight if args.weight is not None else f.weight)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.json:
        print(json.dumps({"form": args.form, "p": args.p, "m": args.m, "weight": f.weight, "filtration": w}))
    else:
        print(w)
    return EXIT_OK


def cmd_valuation(args) -> int:
    if (args.form is None) == (args.form_deriv is None):
        raise UsageError("give exactly one of --form or --form-deriv")
    if args.form_deriv:
        base, n = resolve_form_deriv(args.form_deriv)
        f = derive_n(base, n)
        label = args.form_deriv
    else:
        f = resolve_form(args.form)
        label = args.form
    _prime(args.p)
    try:
        v = padic.ideal_valuation(f, args.p)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.json:
        print(json.dumps({"form": label, "p": args.p, "weight": f.weight, "v": _valuation_json(v)}))
    else:
        print(_valuation_json(v))
    return EXIT_OK


def cmd_sspoly(args) -> int:
    _prime(args.p)
    s = ssing.ss_poly(args.p)
    if args.json:
        print(json.dumps({"p": args.p, "coeffs": list(s.coeffs), "roots": s.roots(), "text": str(s)}))
    else:
        print(f"{s} (mod {args.p})")
    return EXIT_OK


def cmd_registry(args) -> int:
    points = _registry(args)
    if args.action == "list":
        for pt in points.values():
            print(json.dumps(pt.to_dict(), sort_keys=True))
        return EXIT_OK
    problems = []
    for pt in points.values():
        try:
            cmtaylor.kronecker_chi(pt.d, 1)
        except ValueError as exc:
            problems.append(f"{pt.name}: {exc}")
        problems.extend(cmtaylor.check_point_numerics(pt, args.precision))
    for msg in problems:
        print(msg, file=sys.stderr)
    if not problems:
        print(f"{len(points)} points OK")
    return EXIT_FAIL if problems else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qmlab", description="Quasimodular forms at CM points, exactly.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_registry(p):
        p.add_argument("--registry", help=f"CM point registry JSON (default: ${cmtaylor.REGISTRY_ENV} or shipped)")

    p = sub.add_parser("taylor", help="t_f(tau; n) with factorization and valuations")
    p.add_argument("--form", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--primes", type=int, nargs="*", default=[])
    p.add_argument("--factor-bound", type=int, default=DEFAULT_FACTOR_BOUND)
    p.add_argument("--json", action="store_true")
    with_registry(p)
    p.set_defaults(func=cmd_taylor)

    p = sub.add_parser("sweep", help="check p^m | t_f(tau; n) over a range (JSON lines)")
    p.add_argument("--form", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m", type=int, nargs="+", required=True)
    p.add_argument("--n-range", type=int, nargs=2, metavar=("LO", "HI"), required=True)
    p.add_argument("--mode", choices=cmtaylor.MODES, default="weak")
    p.add_argument("--output", "-o")
    p.add_argument("--workers", type=int, default=1)
    with_registry(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("filtration", help="filtration of a modular form mod p^m")
    p.add_argument("--form", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--weight", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_filtration)

    p = sub.add_parser("valuation", help="v(f) with respect to the ideal (A^p, p)")
    p.add_argument("--form")
    p.add_argument("--form-deriv", help="FORM:n, the n-th derivative of FORM")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_valuation)

    p = sub.add_parser("sspoly", help="supersingular polynomial mod p")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_sspoly)

    p = sub.add_parser("registry", help="list or validate CM points")
    p.add_argument("action", choices=("list", "validate"))
    p.add_argument("--precision", type=int, default=40, help="q-series terms for numeric checks")
    with_registry(p)
    p.set_defaults(func=cmd_registry)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, ParseError) as exc:
        print(f"qmlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
