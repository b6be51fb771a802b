import random
from fractions import Fraction as F

import pytest

from conftest import random_poly
from qmlab.qexp import QSeries, eisenstein_qexp, reduce_series, series_derive
from qmlab.qmring import (
    HOLO,
    P,
    PSTAR,
    Q,
    R,
    STAR,
    DerivativeChain,
    QMPoly,
    delta_poly,
    derive,
    derive_n,
    eisenstein_poly,
    evaluate,
    format_poly,
    phi,
    rankin_cohen,
    theta,
    to_qseries,
)

DELTA = delta_poly()
TAU7 = (3, 105, 1323)
I_PT = (0, 12, 0)


def test_weight_homogeneity_enforced():
    with pytest.raises(ValueError):
        QMPoly({(0, 1, 0): 1, (0, 0, 1): 1})
    assert (Q + Q).weight == 4
    with pytest.raises(ValueError):
        Q + R


def test_ramanujan_identities():
    assert derive(P) == (P**2 - Q) / 12
    assert derive(Q) == (P * Q - R) / 3
    assert derive(R) == (P * R - Q**2) / 2


def test_d5_q_frozen():
    expected = (
        F(35, 1296) * P**5 * Q
        + F(175, 648) * P**3 * Q**2
        - F(175, 1296) * P**4 * R
        + F(25, 432) * P * Q**3
        - F(175, 648) * P**2 * Q * R
        - F(35, 1296) * Q**2 * R
        + F(25, 324) * P * R**2
    )
    assert derive_n(Q, 5) == expected


def test_derive_examples():
    assert derive(QMPoly.const(1)).is_zero()
    assert derive_n(Q, 0) == Q
    assert derive(DELTA) == P * DELTA


def test_chain_matches_repeated_derive():
    chain = DerivativeChain(DELTA)
    f = DELTA
    for _ in range(12):
        f = derive(f)
        assert chain.step().poly() == f
    assert chain.evaluate(TAU7) == evaluate(phi(f), TAU7)


def test_leibniz_random():
    rng = random.Random(11)
    for _ in range(100):
        f = random_poly(rng, rng.choice([2, 4, 6, 8]))
        g = random_poly(rng, rng.choice([2, 4, 6, 8, 10]))
        assert derive(f * g) == derive(f) * g + f * derive(g)


def test_derive_is_linear():
    rng = random.Random(12)
    for _ in range(50):
        f, g = random_poly(rng, 8), random_poly(rng, 8)
        c = F(rng.randint(-5, 5), rng.randint(1, 5))
        assert derive(f * c + g) == derive(f) * c + derive(g)


@pytest.mark.parametrize("f", [Q, R, DELTA, P, P * Q, Q**2 * R - P**4 * R])
def test_fourier_compatibility(f):
    N = 30
    s = to_qseries(f, N)
    g = f
    for _ in range(6):
        g = derive(g)
        s = series_derive(s)
        assert to_qseries(g, N) == s


def test_to_qseries_examples():
    assert to_qseries(DELTA, 3) == QSeries([0, 1, -24])
    assert to_qseries(Q, 5) == eisenstein_qexp(4, 5)
    assert to_qseries(derive(Q), 3) == series_derive(eisenstein_qexp(4, 3))
    assert to_qseries(QMPoly.zero(4), 4).is_zero()


def test_eisenstein_poly():
    assert eisenstein_poly(4) == Q
    assert eisenstein_poly(6) == R
    assert eisenstein_poly(8) == Q**2
    assert eisenstein_poly(10) == Q * R
    assert eisenstein_poly(14) == Q**2 * R
    e12 = eisenstein_poly(12)
    assert to_qseries(e12, 10) == eisenstein_qexp(12, 10)


def test_evaluate_examples():
    assert evaluate(Q, TAU7) == 105
    assert evaluate(R, I_PT) == 0
    assert evaluate(DELTA, TAU7) == -343
    assert evaluate(DELTA, I_PT) == 1
    with pytest.raises(ValueError):
        evaluate(P * Q, TAU7)
    assert evaluate(phi(P * Q), TAU7) == 315


def test_phi():
    assert phi(Q) == Q and phi(Q).kind == STAR
    assert phi(P) == PSTAR
    assert phi(derive(Q)) == (PSTAR * Q - R) / 3
    assert phi(P) != P
    with pytest.raises(ValueError):
        derive(PSTAR)


def test_theta_examples():
    assert theta(Q, 5).is_zero()
    assert theta(R, 5) == (R**2 - Q**3) / 2
    with pytest.raises(ValueError):
        theta(P, 5)


@pytest.mark.parametrize("p", [5, 7, 11])
def test_theta_matches_derivative_mod_p(p):
    N = 20
    for f in (Q, R, DELTA):
        lhs = reduce_series(to_qseries(theta(f, p), N), p)
        rhs = reduce_series(to_qseries(derive(f), N), p)
        assert lhs == rhs


def test_rankin_cohen_examples():
    assert rankin_cohen(Q, R, 0) == Q * R
    assert rankin_cohen(Q, Q, 1).is_zero()
    assert rankin_cohen(Q, R, 1) == 2 * R**2 - 2 * Q**3


@pytest.mark.parametrize("n", range(0, 6))
def test_rankin_cohen_modular(n):
    for f, g in ((Q, R), (Q, DELTA), (R, Q**2), (DELTA, DELTA)):
        rc = rankin_cohen(f, g, n)
        assert rc.is_p_free()
        if not rc.is_zero():
            assert rc.weight == f.weight + g.weight + 2 * n


def test_format_roundtrip_text():
    assert format_poly(DELTA.terms) == "1/1728*Q^3 - 1/1728*R^2"
    assert str(P**2 - Q) == "P^2 - Q"


def test_kind_is_tracked():
    assert (PSTAR * Q).kind == STAR
    assert (P * Q).kind == HOLO
    with pytest.raises(ValueError):
        PSTAR + P
