from fractions import Fraction

import pytest
from gmpy2 import mpq

from fperr import fpsys as F
from fperr import witnesses as W
from fperr.accumulate import SUM, aggregate_terms
from fperr.bounds import BoundKind as K, evaluate, tau
from fperr.errors import ConstraintError
from fperr.rounding import TiePolicy

DOWN, UP, EVEN = TiePolicy.DOWNWARD, TiePolicy.UPWARD, TiePolicy.TO_EVEN


def _bound(kind, w):
    t, ok = w.replay()
    assert ok
    agg = aggregate_terms(SUM, w.inputs, w.system, t.total_error)
    return evaluate(kind, w.system, w.n, agg)


def test_norm_one_sharp_examples():
    s = F.perfect(2, 7)
    w = W.norm_one_sharp(s, 3, DOWN)
    assert w.predicted_result == 1 and w.predicted_error == Fraction(-3, 256)
    assert W.norm_one_sharp(s, 3, UP).predicted_result == 1 + Fraction(6, 256)
    assert W.norm_one_sharp(s, 1, DOWN).predicted_error == -s.u


@pytest.mark.parametrize("beta,mu", [(2, 7), (3, 4), (10, 3)])
@pytest.mark.parametrize("policy", [DOWN, UP])
def test_norm_one_sharp_attains_bound(beta, mu, policy):
    s = F.perfect(beta, mu)
    for n in range(1, 6):
        rep = _bound(K.NORM_ONE_SHARP, W.norm_one_sharp(s, n, policy))
        assert rep.applicable and rep.ratio == 1


def test_norm_one_sharp_constraints():
    with pytest.raises(ConstraintError):
        W.norm_one_sharp(F.ieee(2, 7, -12), 2, DOWN)
    with pytest.raises(ConstraintError):
        W.norm_one_sharp(F.perfect(2, 7), 2, EVEN)
    with pytest.raises(ConstraintError):
        W.norm_one_sharp(F.perfect(2, 2), 4, UP)


def test_quadratic_growth_replays():
    s = F.perfect(2, 12)
    for m in range(1, 9):
        w = W.quadratic_growth(s, m)
        t, ok = w.replay()
        assert ok
        # every partial sum rounds to an integer
        assert t.partials[1:] == list(range(2, 2 ** m + 1))


def test_quadratic_growth_small_cases():
    s = F.perfect(2, 7)
    u = s.u
    assert W.quadratic_growth(s, 1).predicted_error == -2 * u
    # hand trace for m = 2: partials 2, 3, 4 against an exact sum 4 + 8u
    assert W.quadratic_growth(s, 2).predicted_error == -8 * u
    assert W.quadratic_growth(s, 1).extra["stated_error"] == -2 * u
    assert W.quadratic_growth(s, 2).extra["stated_error"] == -6 * u


def test_quadratic_growth_beats_max_bound_shape():
    s = F.perfect(2, 12)
    for m in range(1, 9):
        w = W.quadratic_growth(s, m)
        n = w.n
        assert abs(w.predicted_error) >= Fraction(n * n + 2 * n + 3, 6) * s.u * max(w.inputs)


def test_min_cumulative_examples():
    s = F.perfect(2, 3)
    w = W.min_cumulative(s, 2)
    assert w.inputs == [1, 16, 256] and w.predicted_result == 256
    for mu in range(3, 9):
        s = F.perfect(2, mu)
        for n in range(1, 7):
            w = W.min_cumulative(s, n)
            t, ok = w.replay()
            assert ok
            cum = w.extra["cumulative"]
            assert t.total_error == -w.extra["kappa"] * s.u * cum
            if 2 * n * s.u < 1:
                assert 1 - s.u < w.extra["kappa"] < 1


@pytest.mark.parametrize("beta", [2, 3])
def test_max_cumulative_attains_upper_bound(beta):
    s = F.perfect(beta, 7)
    for n in range(1, 7):
        w = W.max_cumulative(s, n)
        rep = _bound(K.CUMULATIVE_POSITIVE_UPPER, w)
        assert rep.applicable and rep.ratio == 1
    assert tau(1, s.u, beta) == 1 / (1 + s.u)


def test_max_cumulative_tau_two():
    s = F.perfect(2, 7)
    assert tau(2, s.u, 2) == 1 / (1 + s.u * Fraction(2, 3))


def test_max_cumulative_custom_exponents_strict():
    s = F.perfect(2, 7)
    w = W.max_cumulative(s, 4, [0, 2, 4, 6])
    rep = _bound(K.CUMULATIVE_POSITIVE_UPPER, w)
    assert rep.applicable and rep.ratio < 1
    with pytest.raises(ConstraintError):
        W.max_cumulative(s, 2, [1, 2])
    with pytest.raises(ConstraintError):
        W.max_cumulative(s, 2, [0, 0])


def test_mixed_signs():
    s = F.perfect(2, 8)
    assert W.mixed_signs(s, 2).predicted_error == Fraction(3, 2) * s.u
    assert W.mixed_signs(s, 1).predicted_error == s.u
    s = F.perfect(2, 12)
    for n in range(1, 9):
        w = W.mixed_signs(s, n)
        t, ok = w.replay()
        assert ok
        agg = aggregate_terms(SUM, w.inputs, s, t.total_error)
        assert agg.cumulative_abs == w.extra["cumulative_abs"]
        signed = evaluate(K.CUMULATIVE_SIGNED, s, n, agg)
        assert signed.applicable and not signed.violated
        kappa = w.extra["kappa"]
        assert 1 - s.u <= kappa <= 1
        assert t.total_error == kappa * s.u / (1 - (n - 2) * s.u) * agg.cumulative_abs
        if n >= 2:
            # the positive-sum bound, evaluated as if it applied, is exceeded
            as_if = tau(n, s.u, 2) * s.u * agg.cumulative
            assert t.total_error > as_if


def test_generators_registry():
    assert set(W.GENERATORS) == {"norm-one-sharp", "quadratic-growth", "min-cumulative",
                                 "max-cumulative", "mixed-signs"}
