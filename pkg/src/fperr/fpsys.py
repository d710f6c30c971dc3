"""Floating point systems as subsets of the rationals.

A system is described by its kind (perfect, MPFR or IEEE), a base ``beta``,
a precision exponent ``mu`` and, for the unperfect kinds, a minimal exponent
``emin``.  Normal numbers are ``+-beta**e * (beta**mu + r)`` with integer
``0 <= r < (beta - 1) * beta**mu``; IEEE systems add the subnormals
``+-beta**emin * r`` with ``0 < r < beta**mu``.  Systems are unbounded above.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from gmpy2 import mpq, mpz

from .errors import ConfigurationError, DomainError, ParseError, UsageError
from .exactnum import ExactScalar, exact, format_scalar, ipow, pow_base


class Kind(enum.Enum):
    PERFECT = "perfect"
    MPFR = "mpfr"
    IEEE = "ieee"


@dataclass(frozen=True)
class FpSystem:
    kind: Kind
    base: int
    mu: int
    emin: int | None = None
    u: ExactScalar = field(init=False, repr=False, compare=False)
    alpha: ExactScalar = field(init=False, repr=False, compare=False)
    nu: ExactScalar = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.kind, Kind):
            object.__setattr__(self, "kind", Kind(self.kind))
        if self.base < 2:
            raise UsageError(f"base must be at least 2, got {self.base}")
        if self.mu < 1:
            raise UsageError(f"precision exponent mu must be positive, got {self.mu}")
        if self.kind is Kind.PERFECT:
            if self.emin is not None:
                raise UsageError("perfect systems have no minimal exponent")
            alpha = nu = mpq(0)
        else:
            if self.emin is None:
                raise UsageError(f"{self.kind.value} systems need emin")
            if not self.emin < -self.mu:
                raise UsageError(f"emin must be smaller than -mu ({-self.mu}), got {self.emin}")
            nu = pow_base(self.base, self.emin + self.mu)
            alpha = pow_base(self.base, self.emin) if self.kind is Kind.IEEE else nu
        object.__setattr__(self, "u", mpq(1, 2 * ipow(self.base, self.mu)))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "nu", nu)

    @property
    def perfect(self) -> bool:
        return self.kind is Kind.PERFECT

    def __str__(self):
        if self.perfect:
            return f"perfect:b{self.base}:m{self.mu}"
        return f"{self.kind.value}:b{self.base}:m{self.mu}:e{self.emin}"


def perfect(base: int, mu: int) -> FpSystem:
    return FpSystem(Kind.PERFECT, base, mu)


def ieee(base: int, mu: int, emin: int) -> FpSystem:
    return FpSystem(Kind.IEEE, base, mu, emin)


def mpfr(base: int, mu: int, emin: int) -> FpSystem:
    return FpSystem(Kind.MPFR, base, mu, emin)


_SYSTEM_RE = re.compile(r"(perfect|ieee|mpfr):b(\d+):m(\d+)(?::e(-?\d+))?")


def parse_system(text: str) -> FpSystem:
    """Parse ``perfect:b2:m3``, ``ieee:b2:m3:e-6`` or ``mpfr:b10:m2:e-5``."""
    m = _SYSTEM_RE.fullmatch(text.strip().lower())
    if m is None:
        raise ParseError("malformed system string", text, 0)
    kind, base, mu, emin = m.groups()
    if kind == "perfect" and emin is not None:
        raise ParseError("perfect systems take no emin", text, m.start(4) - 2)
    if kind != "perfect" and emin is None:
        raise ParseError(f"{kind} systems need :e<emin>", text, len(text))
    return FpSystem(Kind(kind), int(base), int(mu), None if emin is None else int(emin))


@dataclass(frozen=True)
class DerivedConstants:
    u: ExactScalar
    alpha: ExactScalar
    nu: ExactScalar


def derive(sys: FpSystem) -> DerivedConstants:
    return DerivedConstants(sys.u, sys.alpha, sys.nu)


@dataclass(frozen=True)
class NormalForm:
    """``z = sign * base**e * (base**mu + w)`` with ``0 <= w < (base-1) * base**mu``."""

    sign: int
    e: int
    w: ExactScalar

    def reconstruct(self, sys: FpSystem) -> ExactScalar:
        return self.sign * pow_base(sys.base, self.e) * (ipow(sys.base, sys.mu) + self.w)


# ---------------------------------------------------------------------------
# Integer grid helpers (shared with the rounding module)
# ---------------------------------------------------------------------------

def _ge_pow(beta, a, q, k) -> bool:
    """a/q >= beta**k for positive integers a, q."""
    if k >= 0:
        return a >= q * ipow(beta, k)
    return a * ipow(beta, -k) >= q


def floor_log(beta: int, a, q) -> int:
    """Largest integer k with beta**k <= a/q, for positive integers a and q."""
    if beta == 2:
        k = a.bit_length() - q.bit_length()
        return k if _ge_pow(2, a, q, k) else k - 1
    a, q = mpz(a), mpz(q)
    k = a.num_digits(beta) - q.num_digits(beta) - 2
    while _ge_pow(beta, a, q, k + 1):
        k += 1
    return k


def scaled_floor(beta: int, a, q, e: int):
    """Split (a/q) / beta**e as N + rem/den with integer N and 0 <= rem < den."""
    if e >= 0:
        den = q * ipow(beta, e)
        n, rem = divmod(a, den)
    else:
        den = q
        n, rem = divmod(a * ipow(beta, -e), q)
    return n, rem, den


def grid_value(beta: int, m, e: int, negative: bool = False) -> ExactScalar:
    """``+-m * beta**e`` as an exact scalar."""
    v = mpq(m * ipow(beta, e)) if e >= 0 else mpq(m, ipow(beta, -e))
    return -v if negative else v


def grid_exponent(sys: FpSystem, a, q) -> int | None:
    """Exponent of the grid covering a/q > 0; None when an MPFR value lies below nu."""
    e = floor_log(sys.base, a, q) - sys.mu
    if sys.emin is not None and e < sys.emin:
        return sys.emin if sys.kind is Kind.IEEE else None
    return e


def grid_remainder(sys: FpSystem, m, e: int):
    """Integer remainder r of the grid point m * beta**e in its own normal/subnormal form."""
    bm = ipow(sys.base, sys.mu)
    if m == bm * sys.base:
        return 0
    if m >= bm:
        return m - bm
    return m


@lru_cache(maxsize=256)
def nearest_kernel(sys: FpSystem, ties: str):
    """A specialized z -> fl(z) for one system; ``ties`` is "down", "up" or "even".

    Same algorithm as the generic helpers above, with powers of the base kept
    in a local table.  Returns z itself whenever z is in F.
    """
    beta, mu, emin = sys.base, sys.mu, sys.emin
    below_nu_zero = sys.kind is Kind.MPFR
    alpha = sys.alpha
    a_num, a_den = alpha.numerator, alpha.denominator
    down, up = ties == "down", ties == "up"
    table = {}

    def pw(k):
        v = table.get(k)
        if v is None:
            v = table[k] = mpz(beta) ** k
        return v

    bm = pw(mu)
    top = bm * beta
    two = beta == 2

    def upper_is_even(m):
        r = 0 if m == top else (m - bm if m >= bm else m)
        return r % 2 == 0

    def fl(z):
        num = z.numerator
        if not num:
            return z
        q = z.denominator
        neg = num < 0
        a = -num if neg else num
        if two:
            k = a.bit_length() - q.bit_length()
            if (a < (q << k)) if k >= 0 else ((a << -k) < q):
                k -= 1
        else:
            k = a.num_digits(beta) - q.num_digits(beta) - 2
            while True:
                j = k + 1
                if (a >= q * pw(j)) if j >= 0 else (a * pw(-j) >= q):
                    k = j
                else:
                    break
        e = k - mu
        if emin is not None and e < emin:
            if below_nu_zero:
                c = 2 * a * a_den - q * a_num
                if c < 0 or (c == 0 and not (neg if down else (up and not neg))):
                    return mpq(0)
                return -alpha if neg else alpha
            e = emin
        if e >= 0:
            den = q * pw(e)
            n, rem = divmod(a, den)
        else:
            den = q
            n, rem = divmod(a * pw(-e), q)
        if not rem:
            return z
        c = 2 * rem - den
        if c > 0 or (c == 0 and (neg if down else (not neg if up else upper_is_even(n + 1)))):
            n += 1
        v = mpq(n * pw(e)) if e >= 0 else mpq(n, pw(-e))
        return -v if neg else v

    return fl


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def normal_exponent(sys: FpSystem, z) -> int:
    """The e of the normal form of z != 0 (independent of emin)."""
    z = exact(z)
    if z == 0:
        raise DomainError("zero has no normal form")
    return floor_log(sys.base, abs(z.numerator), z.denominator) - sys.mu


def normal_form(sys: FpSystem, z) -> NormalForm:
    z = exact(z)
    e = normal_exponent(sys, z)
    w = abs(z) / pow_base(sys.base, e) - ipow(sys.base, sys.mu)
    return NormalForm(-1 if z < 0 else 1, e, w)


def is_exponent(sys: FpSystem, e: int) -> bool:
    return sys.perfect or e >= sys.emin


def contains(sys: FpSystem, x) -> bool:
    """Membership test via the integer form x = beta**e * r."""
    if not isinstance(x, ExactScalar):
        x = exact(x)
    return nearest_kernel(sys, "down")(x) == x


def neighbors(sys: FpSystem, z) -> tuple[ExactScalar, ExactScalar]:
    """Largest element of F that is <= z and smallest that is >= z."""
    z = exact(z)
    if z == 0:
        return z, z
    negative = z < 0
    a, q = abs(z.numerator), z.denominator
    e = grid_exponent(sys, a, q)
    if e is None:
        lo, hi = mpq(0), sys.nu
    else:
        n, rem, _ = scaled_floor(sys.base, a, q, e)
        if rem == 0:
            return z, z
        lo, hi = grid_value(sys.base, n, e), grid_value(sys.base, n + 1, e)
    if negative:
        return -hi, -lo
    return lo, hi


def _require_member(sys, x, name):
    if not contains(sys, x):
        raise DomainError(f"{name} = {format_scalar(x)} is not an element of {sys}")


def small_sum_hypothesis(sys: FpSystem, x, y) -> bool:
    """alpha <= |x + y| <= beta nu, or (IEEE) 0 < |x + y| <= beta nu."""
    s = abs(x + y)
    top = sys.base * sys.nu
    return sys.alpha <= s <= top or (sys.kind is Kind.IEEE and 0 < s <= top)


def sterbenz_hypothesis(sys: FpSystem, a, b) -> bool:
    return sys.alpha <= b - a <= a


def is_exact_small_sum(sys: FpSystem, x, y) -> bool:
    """Whether the exact-sum hypotheses hold for x + y (and then x + y is in F)."""
    x, y = exact(x), exact(y)
    _require_member(sys, x, "x")
    _require_member(sys, y, "y")
    holds = small_sum_hypothesis(sys, x, y)
    if holds:
        assert contains(sys, x + y), f"exact-sum lemma failed for {x}, {y} in {sys}"
    return holds


def sterbenz_exact(sys: FpSystem, a, b) -> bool:
    """Whether alpha <= b - a <= a (and then b - a is in F)."""
    a, b = exact(a), exact(b)
    _require_member(sys, a, "a")
    _require_member(sys, b, "b")
    holds = sterbenz_hypothesis(sys, a, b)
    if holds:
        assert contains(sys, b - a), f"Sterbenz failed for {a}, {b} in {sys}"
    return holds


def binade(sys: FpSystem, e: int) -> Iterator[ExactScalar]:
    """Positive elements of the equally spaced range of exponent e, in increasing order."""
    bm = ipow(sys.base, sys.mu)
    for r in range((sys.base - 1) * bm):
        yield grid_value(sys.base, bm + r, e)


def magnitude_window(sys: FpSystem, lo: int, hi: int) -> list[ExactScalar]:
    """Positive elements x of F with base**lo <= x < base**(hi + 1)."""
    out = []
    for d in range(lo, hi + 1):
        e = d - sys.mu
        if is_exponent(sys, e):
            out.extend(binade(sys, e))
        elif sys.kind is Kind.IEEE and d >= sys.emin:
            # part of the subnormal range falls in this decade of magnitudes
            start, stop = ipow(sys.base, d - sys.emin), ipow(sys.base, d + 1 - sys.emin)
            out.extend(grid_value(sys.base, r, sys.emin) for r in range(start, stop))
    return out


def slab(sys: FpSystem, max_abs) -> list[ExactScalar]:
    """All elements x of an unperfect F with |x| <= max_abs, sorted increasingly."""
    if sys.perfect:
        raise ConfigurationError("perfect systems have infinitely many elements near zero")
    max_abs = exact(max_abs)
    pos = []
    if sys.kind is Kind.IEEE:
        pos.extend(grid_value(sys.base, r, sys.emin) for r in range(1, ipow(sys.base, sys.mu)))
    e = sys.emin
    while grid_value(sys.base, ipow(sys.base, sys.mu), e) <= max_abs:
        pos.extend(binade(sys, e))
        e += 1
    pos = [x for x in pos if x <= max_abs]
    return [-x for x in reversed(pos)] + [mpq(0)] + pos
