import random
from fractions import Fraction

import pytest
from gmpy2 import mpq

from fperr import fpsys as F
from fperr.accumulate import DOT, SUM, Aggregates, aggregate_terms
from fperr.bounds import (
    BoundKind as K, available, beta_n, evaluate, evaluate_all, kappa_min_cumulative, tau,
    tightest_applicable,
)
from fperr.errors import UsageError


def grid():
    """(n, u) pairs with 20nu <= 1."""
    for beta, mu in ((2, 5), (2, 8), (2, 12), (3, 4), (10, 2), (10, 3)):
        u = Fraction(1, 2 * beta ** mu)
        for n in range(1, 60):
            if 20 * n * u <= 1:
                yield beta, n, u


def test_norm_one_sharp_example():
    s = F.perfect(2, 7)
    u = s.u
    rep = evaluate(K.NORM_ONE_SHARP, s, 2, Aggregates(SUM, 2, norm1=1 + 2 * u))
    assert rep.bound_value == 2 * u and rep.applicable


def test_beta_n_example_and_majorants():
    u = Fraction(1, 256)
    # independent oracle: the formula in Fraction arithmetic
    assert beta_n(2, mpq(u)) == (3 + 6 * u) / (1 + 3 * u + 2 * u * u) == Fraction(99072, 33153)
    for _, n, u in grid():
        b = beta_n(n, mpq(u))
        assert b <= (n + 1) / (1 + n * u / 2)
        assert b <= (n + 1) / (1 + (n - 3) * u)


def test_tau_and_kappa():
    for beta, n, u in grid():
        t = tau(n, mpq(u), beta)
        assert t <= 1
        if n == 1:
            assert t == 1 / (1 + mpq(u))
        if beta == 2 and 2 * n * u < 1 and n <= 6:
            k = kappa_min_cumulative(n, mpq(u))
            assert 1 - u < k < 1


def test_chain_ordering():
    for d in range(4, 300):
        u = Fraction(1, d)
        assert u / (1 + u) < u < u / (1 - u)


def test_convexity_chain():
    rng = random.Random(20)
    for _ in range(3000):
        k = rng.randint(1, 3)
        u = Fraction(1, 2 * 2 ** rng.randint(4, 14))
        ns = [rng.randint(1, 12) for _ in range(k)]
        if 20 * sum(ns) * u > 1:
            continue
        lo = 1 - sum(ns) * u
        p1 = Fraction(1)
        p2 = Fraction(1)
        for ni in ns:
            p1 /= 1 + ni * u
            p2 *= (1 + 2 * ni * u) / (1 + ni * u)
        assert lo <= p1 <= p2 <= 1 + sum(ns) * u


def test_sharp_below_linear_and_gamma():
    for beta, n, u in grid():
        s = F.FpSystem(F.Kind.PERFECT, beta, {Fraction(1, 2 * beta ** m): m for m in range(1, 20)}[u])
        agg = Aggregates(SUM, n, norm1=mpq(1))
        sharp = evaluate(K.NORM_ONE_SHARP, s, n, agg).bound_value
        lin = evaluate(K.NORM_ONE_LINEAR, s, n, agg).bound_value
        gam = evaluate(K.NAIVE_GAMMA, s, n, agg).bound_value
        assert sharp <= lin < gam


def test_strictness_of_signed_hypothesis():
    # 20nu = 1 exactly: n = 2, u = 1/40 is not a system, so use beta 10 mu 1 (u = 1/20) and n = 1
    s = F.perfect(10, 1)
    agg = Aggregates(SUM, 1, cumulative_abs=mpq(1), norm1=mpq(1))
    assert evaluate(K.NORM_ONE_SHARP, s, 1, agg).applicable
    assert not evaluate(K.CUMULATIVE_SIGNED, s, 1, agg).applicable


def test_exact_constants():
    s = F.ieee(2, 8, -12)
    agg = Aggregates(DOT, 2, norm1=mpq(0))
    rep = evaluate(K.DOT_IEEE, s, 2, agg)
    assert rep.bound_value == Fraction(21, 20) * 3 * s.alpha / 2
    m = F.mpfr(2, 8, -12)
    rep = evaluate(K.DOT_MPFR, m, 2, Aggregates(DOT, 2, norm1=mpq(1)))
    assert rep.bound_value == (Fraction(41, 20) * 2 + Fraction(21, 20)) * m.alpha / 2 + beta_n(2, m.u) * m.u


def test_missing_aggregate_is_usage_error():
    with pytest.raises(UsageError):
        evaluate(K.NORM_ONE_SHARP, F.perfect(2, 7), 2, Aggregates(SUM, 2))


def test_ratio_and_exact_zero():
    s = F.perfect(2, 7)
    rep = evaluate(K.NORM_ONE_SHARP, s, 2, Aggregates(SUM, 2, norm1=mpq(0), total_error=mpq(0)))
    assert rep.ratio is None and rep.ratio_text() == "exact"
    rep = evaluate(K.NORM_ONE_SHARP, s, 2, Aggregates(SUM, 2, norm1=mpq(1), total_error=mpq(0)))
    assert rep.ratio == 0


def test_one_sided_orientation():
    s = F.perfect(2, 7)
    agg = Aggregates(SUM, 1, cumulative=mpq(1), nonnegative=True, total_error=-s.u)
    assert evaluate(K.CUMULATIVE_POSITIVE_UPPER, s, 1, agg).observed_error == -s.u
    assert evaluate(K.CUMULATIVE_POSITIVE_LOWER, s, 1, agg).observed_error == s.u


def test_unperfect_variants():
    s = F.ieee(2, 8, -12)
    big = Aggregates(SUM, 3, norm1=mpq(1), in_system=True)
    small = Aggregates(SUM, 3, norm1=s.alpha, in_system=True)
    assert evaluate(K.NORM_ONE_UNPERFECT, s, 3, big).variant == "reduced"
    assert evaluate(K.NORM_ONE_UNPERFECT, s, 3, small).variant == "full"
    # terms outside F make the norm-one family inapplicable on unperfect systems
    out = Aggregates(SUM, 3, norm1=mpq(1), in_system=False)
    assert not evaluate(K.NORM_ONE_SHARP, s, 3, out).applicable


def test_tightest_applicable():
    s = F.perfect(2, 7)
    xs = [mpq(1) / s.u ** k for k in range(4)]
    agg = aggregate_terms(SUM, xs, s, mpq(0))
    reps = tightest_applicable(s, 3, agg)
    vals = [r.bound_value for r in reps]
    assert vals == sorted(vals)
    assert reps[0].kind in (K.CUMULATIVE_POSITIVE_UPPER, K.CUMULATIVE_POSITIVE_LOWER)
    # n = 1: NormOneSharp equals the per-op constant times the norm
    agg1 = Aggregates(SUM, 1, norm1=mpq(3))
    assert evaluate(K.NORM_ONE_SHARP, s, 1, agg1).bound_value == s.u / (1 + s.u) * 3
    # no applicable bound when 20nu > 1
    big = F.perfect(2, 2)
    agg = aggregate_terms(SUM, [1] * 11, big, mpq(0))
    assert tightest_applicable(big, 10, agg) == []
    assert all(not r.applicable for r in evaluate_all(big, 10, agg))


def test_parse_and_available():
    assert K.parse("dot-ieee-reduced") is K.DOT_IEEE_REDUCED
    with pytest.raises(UsageError):
        K.parse("bogus")
    assert not available(K.DOT_PERFECT, Aggregates(SUM, 1, norm1=mpq(1)))
