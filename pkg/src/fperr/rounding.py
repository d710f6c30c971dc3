"""Round to nearest over exact rationals with explicit tie policies."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from gmpy2 import mpq

from .errors import DomainError, UnsupportedError, UsageError
from .exactnum import ExactScalar, Ordering, cmp_sqrt, exact, isqrt, pow_base
from .fpsys import (
    FpSystem,
    Kind,
    floor_log,
    grid_exponent,
    grid_remainder,
    grid_value,
    nearest_kernel,
    scaled_floor,
)


class TiePolicy(enum.Enum):
    DOWNWARD = "down"
    UPWARD = "up"
    TO_EVEN = "even"

    @classmethod
    def parse(cls, text: str) -> "TiePolicy":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise UsageError(f"unknown tie policy {text!r}; use down, up or even") from None


def _take_upper(sys: FpSystem, policy: TiePolicy, negative: bool, n, e) -> bool:
    """At a tie between magnitudes n * beta**e and (n + 1) * beta**e, pick the larger one?"""
    if policy is TiePolicy.DOWNWARD:
        return negative
    if policy is TiePolicy.UPWARD:
        return not negative
    return grid_remainder(sys, n + 1, e) % 2 == 0


def round_value(sys: FpSystem, policy: TiePolicy, z) -> ExactScalar:
    """fl(z): nearest element of ``sys``, ties resolved by ``policy``."""
    if not isinstance(z, ExactScalar):
        z = exact(z)
    num = z.numerator
    if num == 0:
        return z
    negative = num < 0
    a, q = (-num if negative else num), z.denominator
    e = grid_exponent(sys, a, q)
    if e is None:
        # MPFR below nu: the only candidates are 0 and alpha; an even tie goes to 0
        twice = mpq(2 * a, q)
        if twice < sys.alpha:
            return mpq(0)
        if twice == sys.alpha:
            away = negative if policy is TiePolicy.DOWNWARD else policy is TiePolicy.UPWARD and not negative
            if not away:
                return mpq(0)
        return -sys.alpha if negative else sys.alpha
    n, rem, den = scaled_floor(sys.base, a, q, e)
    if rem == 0:
        return z
    c = 2 * rem - den
    if c > 0 or (c == 0 and _take_upper(sys, policy, negative, n, e)):
        n += 1
    return grid_value(sys.base, n, e, negative)


def round_sqrt_value(sys: FpSystem, policy: TiePolicy, q) -> ExactScalar:
    """fl(sqrt(q)) decided by squared comparisons only."""
    q = exact(q)
    if q < 0:
        raise DomainError("square root of a negative number")
    if q == 0:
        return q
    beta = sys.base
    k = floor_log(beta, q.numerator, q.denominator) // 2
    e = k - sys.mu
    if sys.emin is not None and e < sys.emin:
        if sys.kind is Kind.MPFR:
            c = cmp_sqrt(q, sys.alpha / 2)
            if c is Ordering.LESS or (c is Ordering.EQUAL and policy is not TiePolicy.UPWARD):
                return mpq(0)
            return sys.alpha
        e = sys.emin
    scale = pow_base(beta, -2 * e) * q
    n = isqrt(scale.numerator // scale.denominator)
    if n * n == scale:
        return grid_value(beta, n, e)
    c = cmp_sqrt(q, grid_value(beta, 2 * n + 1, e) / 2)
    if c is Ordering.GREATER or (c is Ordering.EQUAL and _take_upper(sys, policy, False, n, e)):
        n += 1
    return grid_value(beta, n, e)


@dataclass(frozen=True)
class Rounder:
    """A round-to-nearest function on a system with a fixed tie policy."""

    system: FpSystem
    policy: TiePolicy

    def __post_init__(self):
        if not isinstance(self.policy, TiePolicy):
            raise UsageError("a tie policy is mandatory for every rounder")
        object.__setattr__(self, "_fl", nearest_kernel(self.system, self.policy.value))

    def __call__(self, z) -> ExactScalar:
        if not isinstance(z, ExactScalar):
            z = exact(z)
        return self._fl(z)

    def sqrt(self, q) -> ExactScalar:
        return round_sqrt_value(self.system, self.policy, q)


@dataclass(frozen=True)
class ScaledRounder:
    """z -> sign * beta**-shift * base(sign * beta**shift * z).

    With ``shift == 0`` this is the symmetric rounder of any system; other
    shifts are only round-to-nearest functions in perfect systems.
    """

    base_rounder: "Rounder | ScaledRounder"
    shift: int
    sign: int

    @property
    def system(self) -> FpSystem:
        return self.base_rounder.system

    def __call__(self, z) -> ExactScalar:
        z = exact(z)
        f = self.sign * pow_base(self.system.base, self.shift)
        return self.base_rounder(f * z) / f


def round(r, z) -> ExactScalar:  # noqa: A001 - mirrors the operation name
    return r(z)


def round_sqrt(r: Rounder, q) -> ExactScalar:
    if not isinstance(r, Rounder):
        raise UsageError("round_sqrt needs a plain Rounder")
    return r.sqrt(q)


def symmetric(r) -> ScaledRounder:
    """The rounder z -> -r(-z), which swaps downward and upward ties."""
    if isinstance(r, ScaledRounder):
        return ScaledRounder(r.base_rounder, r.shift, -r.sign)
    return ScaledRounder(r, 0, -1)


def scaled(r, m: int, sigma: int) -> ScaledRounder:
    if sigma not in (1, -1):
        raise UsageError("sigma must be +1 or -1")
    if not r.system.perfect:
        raise UnsupportedError("scaled rounders only round to nearest in perfect systems")
    if isinstance(r, ScaledRounder):
        return ScaledRounder(r.base_rounder, r.shift + m, r.sign * sigma)
    return ScaledRounder(r, m, sigma)


class RoundingTuple:
    """An ordered sequence of rounders sharing one system."""

    __slots__ = ("rounders", "system")

    def __init__(self, rounders: Iterable):
        self.rounders = tuple(rounders)
        systems = {r.system for r in self.rounders}
        if len(systems) > 1:
            raise UsageError("all rounders of a tuple must share one system")
        self.system = next(iter(systems)) if systems else None

    @classmethod
    def uniform(cls, system: FpSystem, policy: TiePolicy, n: int) -> "RoundingTuple":
        r = Rounder(system, policy)
        return cls([r] * n)

    @classmethod
    def from_policies(cls, system: FpSystem, policies: Sequence[TiePolicy]) -> "RoundingTuple":
        return cls(Rounder(system, p) for p in policies)

    def __len__(self):
        return len(self.rounders)

    def __getitem__(self, i):
        return self.rounders[i]

    def __iter__(self):
        return iter(self.rounders)

    def __repr__(self):
        return f"RoundingTuple({list(self.rounders)!r})"


def parse_policies(text: str, n: int | None = None) -> list[TiePolicy]:
    """``down`` or a comma list ``down,up,...``; a single policy is repeated n times."""
    items = [TiePolicy.parse(t) for t in text.split(",") if t.strip()]
    if not items:
        raise UsageError("empty policy list")
    if n is None:
        return items
    if len(items) == 1:
        return items * n
    if len(items) != n:
        raise UsageError(f"policy list has {len(items)} entries, expected {n}")
    return items
