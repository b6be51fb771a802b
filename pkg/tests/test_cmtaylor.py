import json
import math
from fractions import Fraction as F

import pytest

from qmlab.arith import padic_valuation
from qmlab.cmtaylor import (
    REGISTRY_ENV,
    CMPoint,
    HypothesisError,
    check_point_numerics,
    chowla_selberg,
    class_data,
    eisenstein_numeric,
    kronecker,
    kronecker_chi,
    legendre_applicable,
    load_registry,
    nonholo_derive,
    nonholo_eq56,
    sweep,
    taylor_coeff,
    taylor_coeffs,
    threshold,
)
from qmlab.qmring import PSTAR, Q, R, delta_poly, derive_n, eisenstein_poly, phi

DELTA = delta_poly()


def legendre_euler(a, p):
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def kronecker_oracle(a, n):
    """Multiplicative in n over the prime factorization, Euler's criterion
    at odd primes, and the mod-8 rule at 2."""
    assert n > 0
    out, m, q = 1, n, 2
    while m > 1:
        while m % q == 0:
            m //= q
            if q == 2:
                out *= 0 if a % 2 == 0 else (1 if a % 8 in (1, 7) else -1)
            else:
                out *= legendre_euler(a, q)
        q += 1
    return out


def test_kronecker_matches_oracle():
    for a in range(-60, 61):
        for n in range(1, 80):
            assert kronecker(a, n) == kronecker_oracle(a, n), (a, n)


def test_kronecker_chi_examples():
    assert kronecker_chi(4, 3) == -1
    assert kronecker_chi(7, 2) == 1
    for d in (3, 4, 7, 8, 11, 23):
        assert kronecker_chi(d, 1) == 1
    with pytest.raises(ValueError):
        kronecker_chi(5, 3)


FUNDAMENTAL = [3, 4, 7, 8, 11, 15, 19, 20, 23, 24, 31, 35, 39, 40, 43, 47, 51, 52, 55, 56, 59, 67, 71, 163]


@pytest.mark.parametrize("d", FUNDAMENTAL)
def test_class_number_formula(d):
    h, w = class_data(d)
    # Dirichlet's class number formula for imaginary quadratic fields
    s = sum(j * kronecker_chi(d, j) for j in range(1, d))
    assert h == F(-w * s, 2 * d)


def test_class_data_examples():
    assert class_data(3) == (1, 6)
    assert class_data(4) == (1, 4)
    assert class_data(7) == (1, 2)
    assert class_data(23) == (3, 2)


def test_chowla_selberg_values():
    assert math.isclose(chowla_selberg(4), 0.590170299508048, rel_tol=1e-12)
    assert math.isclose(chowla_selberg(3), 0.6409273802196893, rel_tol=1e-12)
    assert math.isclose(chowla_selberg(7), 0.5004912879489576, rel_tol=1e-12)


def test_period_reproduces_e4_at_i():
    val = eisenstein_numeric(4, 1j, 40) / chowla_selberg(4) ** 4
    assert math.isclose(val.real, 12, rel_tol=1e-9) and abs(val.imag) < 1e-9


def test_registry_numerics(registry):
    for pt in registry.values():
        assert check_point_numerics(pt) == []


def test_legendre_applicable():
    assert legendre_applicable(4, 7)
    assert not legendre_applicable(4, 13)
    assert legendre_applicable(7, 7)
    assert not legendre_applicable(4, 5)


def test_registry_shipped_triples(pt_i, pt_7):
    assert pt_i.triple == (0, 12, 0)
    assert pt_7.triple == (3, 105, 1323)


def test_registry_from_file_and_env(tmp_path, monkeypatch, pt_i):
    path = tmp_path / "reg.json"
    extra = {"name": "half", "d": 4, "pstar": "0", "q": "3", "r": "0"}
    path.write_text(json.dumps([pt_i.to_dict(), extra]))
    pts = load_registry(path)
    assert set(pts) == {"i", "half"}
    assert pts["half"].triple == (0, 3, 0)
    monkeypatch.setenv(REGISTRY_ENV, str(path))
    assert set(load_registry()) == {"i", "half"}


def test_registry_rejects_bad_data(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([{"name": "x", "d": 4, "pstar": "1/5", "q": "1", "r": "0"}]))
    with pytest.raises(ValueError, match="Z\\[1/6\\]"):
        load_registry(bad)
    bad.write_text(json.dumps([{"name": "x", "d": 4}]))
    with pytest.raises(ValueError, match="missing"):
        load_registry(bad)
    bad.write_text(json.dumps({"name": "x"}))
    with pytest.raises(ValueError):
        load_registry(bad)


def test_point_roundtrip(registry):
    for pt in registry.values():
        assert CMPoint.from_dict(pt.to_dict()) == pt


def test_taylor_examples(pt_i, pt_7):
    assert taylor_coeff(Q, pt_i, 0).value == 12
    assert taylor_coeff(Q, pt_i, 1).value == 0
    assert taylor_coeff(Q, pt_i, 2).value == 20
    assert taylor_coeff(DELTA, pt_7, 1).value == -1029
    with pytest.raises(ValueError):
        taylor_coeff(derive_n(Q, 1), pt_i, 0)


def test_taylor_coeffs_match_single(pt_7):
    many = taylor_coeffs(R, pt_7, [7, 3, 0, 12])
    assert [t.n for t in many] == [0, 3, 7, 12]
    for t in many:
        assert t.value == taylor_coeff(R, pt_7, t.n).value


@pytest.mark.parametrize("f", [Q, R, DELTA], ids=["Q", "R", "delta"])
def test_z_sixth_integrality(f, registry):
    for pt in registry.values():
        for t in taylor_coeffs(f, pt, range(201)):
            d = t.value.denominator
            while d % 2 == 0:
                d //= 2
            while d % 3 == 0:
                d //= 3
            assert d == 1


def test_nonholo_examples():
    assert nonholo_eq56(Q, 0) == Q
    assert nonholo_eq56(Q, 1) == (PSTAR * Q - R) / 3
    assert nonholo_eq56(DELTA, 3) == phi(derive_n(DELTA, 3))
    assert nonholo_derive(phi(Q)) == phi(derive_n(Q, 1))


@pytest.mark.parametrize("f", [Q, R, DELTA], ids=["Q", "R", "delta"])
def test_eq56_path_equality(f):
    for n in range(0, 31, 3):
        assert nonholo_eq56(f, n) == phi(derive_n(f, n))


@pytest.mark.parametrize("p", [5, 7, 11])
def test_supersingular_value_vanishes(p, registry):
    A = eisenstein_poly(p - 1)
    for pt in registry.values():
        if legendre_applicable(pt.d, p):
            assert padic_valuation(taylor_coeff(A, pt, 0).value, p) >= 1


def test_e6_at_tau7(pt_7):
    assert taylor_coeff(eisenstein_poly(6), pt_7, 0).value == 3**3 * 7**2


def test_thresholds():
    assert threshold("weak", 7, 2) == 49
    assert threshold("weak", 7, 3) == 98
    assert threshold("sharp", 7, 3) == 98
    assert threshold("conjecture", 7, 1) == 49
    with pytest.raises(ValueError):
        threshold("strong", 7, 1)


def test_weak_sweep(pt_i):
    rep = sweep(Q, pt_i, 7, 2, range(49, 61), "weak")
    assert len(rep.rows) == 12
    assert rep.all_passed()
    assert all(r.valuation >= 2 for r in rep.rows)


def test_conjecture_witnesses(pt_i):
    rep = sweep(Q, pt_i, 7, 6, [170], "conjecture")
    assert rep.rows[0].valuation == 6 and rep.rows[0].passed
    rep = sweep(Q, pt_i, 13, 1, range(169, 173), "conjecture")
    fails = rep.failures()
    assert [r.n for r in fails if r.n == 170] == [170]
    assert all(r.hypotheses is False for r in rep.rows)


def test_rows_below_threshold_are_informational(pt_i):
    rep = sweep(Q, pt_i, 7, [2, 3], range(95, 100), "weak")
    below = [r for r in rep.rows if r.m == 3 and r.n < 98]
    assert below and all(r.required is None and r.passed is None for r in below)
    assert [(r.n, r.m) for r in rep.rows] == sorted((r.n, r.m) for r in rep.rows)


def test_sweep_rejects_hypotheses(pt_i):
    with pytest.raises(HypothesisError, match="\\(-4 \\| 5\\)"):
        sweep(DELTA, pt_i, 5, 2, range(25, 30), "weak")
    with pytest.raises(HypothesisError, match="m = 1"):
        sweep(Q, pt_i, 7, 1, range(0, 5), "weak")
    with pytest.raises(HypothesisError, match="k - 2"):
        sweep(Q, pt_i, 7, 3, range(98, 100), "sharp")
    with pytest.raises(HypothesisError, match="2k - 2"):
        sweep(DELTA, pt_i, 7, 2, range(98, 100), "sharp")


def test_sharp_sweep(pt_i):
    rep = sweep(Q, pt_i, 7, 2, range(98, 111), "sharp")
    assert rep.all_passed() and not rep.failures()


def test_parallel_sweep_matches_serial(pt_7):
    serial = sweep(DELTA, pt_7, 7, [2, 3], range(49, 110), "weak")
    parallel = sweep(DELTA, pt_7, 7, [2, 3], range(49, 110), "weak", workers=3)
    assert serial.to_jsonl() == parallel.to_jsonl()


def test_report_json(pt_i):
    rep = sweep(Q, pt_i, 7, 2, [49, 50], "weak", form_id="E4")
    lines = rep.to_jsonl().splitlines()
    assert len(lines) == 2
    row = json.loads(lines[0])
    assert row["form"] == "E4" and row["point"] == "i" and row["n"] == 49
    assert isinstance(row["value"], str) and F(row["value"]) == 0
    assert F(json.loads(lines[1])["value"]) == 3**10 * 5 * 7**4 * 85382194794899 * 2049349304689849
