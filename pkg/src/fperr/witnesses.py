"""Closed-form worst-case inputs with exactly predicted results.

Each generator returns a :class:`Witness` whose prediction comes from the
closed form only; :meth:`Witness.replay` runs the rounded sum and compares.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from .accumulate import SumTrace, fp_sum
from .bounds import kappa_min_cumulative, kappa_mixed_signs, tau
from .errors import ConstraintError
from .exactnum import ExactScalar, pow_base
from .fpsys import FpSystem
from .rounding import RoundingTuple, TiePolicy

DOWN, UP = TiePolicy.DOWNWARD, TiePolicy.UPWARD


@dataclass
class Witness:
    name: str
    system: FpSystem
    policy: TiePolicy
    inputs: list
    predicted_result: ExactScalar
    predicted_error: ExactScalar
    constraint_notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.inputs) - 1

    def run(self) -> SumTrace:
        return fp_sum(RoundingTuple.uniform(self.system, self.policy, self.n), self.inputs)

    def replay(self) -> tuple[SumTrace, bool]:
        t = self.run()
        ok = t.result == self.predicted_result and t.total_error == self.predicted_error
        return t, ok


def _require(cond, msg):
    if not cond:
        raise ConstraintError(msg)


def _perfect(sys: FpSystem, base: int | None = None):
    _require(sys.perfect, f"the witness lives in a perfect system, got {sys}")
    if base is not None:
        _require(sys.base == base, f"the witness needs base {base}, got {sys.base}")


def _policy(policy, allowed):
    _require(policy in allowed, f"policy {policy.value} is not supported by this witness")


def norm_one_sharp(sys: FpSystem, n: int, policy: TiePolicy) -> Witness:
    """x_0 = 1, x_k = u: every step is a tie between two neighbours of the partial sum."""
    _perfect(sys)
    _policy(policy, (DOWN, UP))
    _require(n >= 1, "n must be at least 1")
    u = sys.u
    notes = ["20nu <= 1 for the bound to apply"]
    if policy is DOWN:
        result, err = mpq(1), -n * u
    else:
        _require(2 * n * u < 1, f"upward ties need 2nu < 1 (2nu = {2 * n * u})")
        notes.append("2nu < 1")
        result, err = 1 + 2 * n * u, n * u
    return Witness("norm-one-sharp", sys, policy, [mpq(1)] + [u] * n, result, err, notes)


def quadratic_growth_terms(m: int, u) -> list:
    n = 2 ** m - 1
    return [mpq(1)] + [1 + 2 ** ((k + 1).bit_length() - 1) * u for k in range(1, n + 1)]


def quadratic_growth(sys: FpSystem, m: int, policy: TiePolicy = DOWN) -> Witness:
    """n = 2**m - 1 parcels just above 1 whose errors accumulate quadratically.

    Parcels are y_0 = 1 and y_k = 1 + 2**floor(log2(k + 1)) u.  Every partial
    sum rounds down to the integer k + 1, so the error is minus the sum of the
    u-parts: -((4**m - 4)/3 + 2**m) u.  ``extra["stated_error"]`` holds the
    closed form -(n**2 + 2n + 3)/3 u often given for this family, which agrees with
    the exact error only for m = 1.
    """
    _perfect(sys, 2)
    _policy(policy, (DOWN,))
    _require(m >= 1, "m must be at least 1")
    u = sys.u
    _require(2 ** m * u < 1, f"needs 2^m u < 1 (2^m u = {2 ** m * u})")
    n = 2 ** m - 1
    ys = quadratic_growth_terms(m, u)
    err = -(mpq(4 ** m - 4, 3) + 2 ** m) * u
    stated = -mpq(n * n + 2 * n + 3, 3) * u
    notes = [
        "2^m u < 1",
        "y_0 = 1",
        "exact error -((4^m - 4)/3 + 2^m) u; the closed form -(n^2 + 2n + 3)/3 u matches only at m = 1",
    ]
    return Witness("quadratic-growth", sys, policy, ys, sum(ys, mpq(0)) + err, err, notes,
                   {"m": m, "stated_error": stated})


def min_cumulative(sys: FpSystem, n: int, policy: TiePolicy = DOWN) -> Witness:
    """x_k = u**-k for k = 0..n; the sum collapses onto its last term."""
    _perfect(sys, 2)
    _policy(policy, (DOWN,))
    _require(n >= 1, "n must be at least 1")
    u = sys.u
    xs = [pow_base(2, 0) / u ** k for k in range(n + 1)]
    cum = mpq(0)
    prefix = xs[0]
    for x in xs[1:]:
        prefix += x
        cum += prefix
    kappa = kappa_min_cumulative(n, u)
    return Witness("min-cumulative", sys, policy, xs, u ** -n, -kappa * u * cum,
                   ["x_k = u^-k indexed from k = 0"], {"kappa": kappa, "cumulative": cum})


def max_cumulative(sys: FpSystem, n: int, exponents: Sequence[int] | None = None,
                   policy: TiePolicy = UP) -> Witness:
    """x_0 = u, x_1 = 1 and corrections that put every partial sum on a tie."""
    _perfect(sys)
    _policy(policy, (UP,))
    _require(n >= 1, "n must be at least 1")
    beta, u = sys.base, sys.u
    if exponents is None:
        es = list(range(n))
    else:
        es = [int(e) for e in exponents]
        _require(len(es) == n, f"need {n} exponents e_1..e_n, got {len(es)}")
    _require(es[0] == 0, "x_1 = 1 forces e_1 = 0")
    _require(all(a < b for a, b in zip(es, es[1:])), "exponents must increase strictly")
    p = [pow_base(beta, e) for e in es]
    xs = [u, mpq(1)] + [p[k] * (1 + u) - p[k - 1] * (1 + 2 * u) for k in range(1, n)]
    sigma = sum(p, mpq(0))
    t = tau(n, u, beta)
    notes = ["e_1 = 0 so that x_1 = 1 sits on the first tie",
             "equality with the upper cumulative bound only for e_k = k - 1"]
    return Witness("max-cumulative", sys, policy, xs, p[-1] * (1 + 2 * u), u * sigma, notes,
                   {"tau": t, "exponents": es})


def mixed_signs(sys: FpSystem, n: int, policy: TiePolicy = UP) -> Witness:
    """x_0 = u, x_1 = 1 then halving negative corrections: a signed sum that beats the positive bound."""
    _perfect(sys, 2)
    _policy(policy, (UP,))
    _require(n >= 1, "n must be at least 1")
    u = sys.u
    _require(2 ** n * u <= 1, f"needs 2^n u <= 1 (2^n u = {2 ** n * u})")
    xs = [u, mpq(1)] + [-mpq(2, 2 ** k) * (1 + 3 * u) for k in range(2, n + 1)]
    h = 1 - mpq(1, 2 ** n)
    prefix_abs = 2 * h * (1 + 3 * u) - 2 * n * u
    return Witness("mixed-signs", sys, policy, xs, mpq(2, 2 ** n) * (1 + 2 * u), 2 * h * u,
                   ["2^n u <= 1"], {"kappa": kappa_mixed_signs(n, u), "cumulative_abs": prefix_abs})


GENERATORS = {
    "norm-one-sharp": norm_one_sharp,
    "quadratic-growth": quadratic_growth,
    "min-cumulative": min_cumulative,
    "max-cumulative": max_cumulative,
    "mixed-signs": mixed_signs,
}
