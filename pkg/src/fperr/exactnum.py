"""Exact rational scalars.

Every real quantity handled by fperr is an ``ExactScalar``: a GMP rational
(``gmpy2.mpq``) kept in lowest terms with a positive denominator.  Hardware
floats are deliberately rejected so that no rounding can creep in.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from functools import lru_cache

import gmpy2
from gmpy2 import mpq, mpz

from .errors import DomainError, ParseError, UsageError

ExactScalar = type(mpq())

ZERO = mpq(0)
ONE = mpq(1)
HALF = mpq(1, 2)


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def exact(value) -> ExactScalar:
    """Convert ``value`` to an ExactScalar.

    Accepts ints, mpz/mpq, ``Fraction`` and strings in the grammar understood
    by :func:`parse`.  Floats are refused.
    """
    if isinstance(value, ExactScalar):
        return value
    if isinstance(value, bool):
        raise UsageError("booleans are not numbers here")
    if isinstance(value, (int, type(mpz()))):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return parse(value)
    if isinstance(value, float):
        raise UsageError("hardware floats are not accepted; pass an exact string or rational")
    raise UsageError(f"cannot convert {type(value).__name__} to an exact scalar")


def add(a, b) -> ExactScalar:
    return exact(a) + exact(b)


def sub(a, b) -> ExactScalar:
    return exact(a) - exact(b)


def mul(a, b) -> ExactScalar:
    return exact(a) * exact(b)


def div(a, b) -> ExactScalar:
    b = exact(b)
    if b == 0:
        raise UsageError("division by zero")
    return exact(a) / b


def cmp(a, b) -> Ordering:
    a, b = exact(a), exact(b)
    if a < b:
        return Ordering.LESS
    if a > b:
        return Ordering.GREATER
    return Ordering.EQUAL


@lru_cache(maxsize=4096)
def ipow(base: int, e: int):
    """``base**e`` as an mpz, for ``e >= 0``."""
    return mpz(base) ** e


@lru_cache(maxsize=4096)
def pow_base(base: int, e: int) -> ExactScalar:
    """Exact ``base**e`` for any integer ``e``."""
    if base < 2:
        raise UsageError(f"base must be at least 2, got {base}")
    if e >= 0:
        return mpq(ipow(base, e))
    return mpq(1, ipow(base, -e))


def floor(a):
    a = exact(a)
    return a.numerator // a.denominator


def ceil(a):
    a = exact(a)
    return -((-a.numerator) // a.denominator)


def cmp_sqrt(q, m) -> Ordering:
    """Order sqrt(q) against m without forming the square root."""
    q, m = exact(q), exact(m)
    if q < 0 or m < 0:
        raise UsageError("cmp_sqrt needs nonnegative arguments")
    return cmp(q, m * m)


def sign(a) -> int:
    """Sign with the convention sign(0) = 1."""
    return -1 if a < 0 else 1


# ---------------------------------------------------------------------------
# Text grammar
# ---------------------------------------------------------------------------

def _digits(text, i):
    j = i
    while j < len(text) and text[j].isdigit():
        j += 1
    return j


def _signed_int(text, i, what):
    j = i
    if j < len(text) and text[j] in "+-":
        j += 1
    k = _digits(text, j)
    if k == j:
        raise ParseError(f"expected {what}", text, k)
    return int(text[i:k]), k


def parse(text: str, base: int | None = None) -> ExactScalar:
    """Parse ``p/q``, an exact decimal like ``1.25e-3``, or ``m@e`` (m * base**e)."""
    if not isinstance(text, str):
        raise UsageError("parse expects a string")
    s = text
    n = len(s)
    i = 0
    neg = False
    if i < n and s[i] in "+-":
        neg = s[i] == "-"
        i += 1
    j = _digits(s, i)
    int_part = s[i:j]
    if j < n and s[j] == "/":
        if not int_part:
            raise ParseError("expected numerator digits", s, i)
        k = _digits(s, j + 1)
        if k == j + 1:
            raise ParseError("expected denominator digits", s, j + 1)
        if k != n:
            raise ParseError("unexpected character", s, k)
        den = int(s[j + 1:k])
        if den == 0:
            raise ParseError("zero denominator", s, j + 1)
        value = mpq(int(int_part), den)
        return -value if neg else value
    if j < n and s[j] == "@":
        if not int_part:
            raise ParseError("expected significand digits", s, i)
        if base is None:
            raise ParseError("scaled form m@e needs a base", s, j)
        e, k = _signed_int(s, j + 1, "exponent")
        if k != n:
            raise ParseError("unexpected character", s, k)
        value = mpq(int(int_part)) * pow_base(base, e)
        return -value if neg else value
    frac_part = ""
    if j < n and s[j] == ".":
        k = _digits(s, j + 1)
        frac_part = s[j + 1:k]
        j = k
    if not int_part and not frac_part:
        raise ParseError("expected digits", s, j)
    exp10 = 0
    if j < n and s[j] in "eE":
        exp10, j = _signed_int(s, j + 1, "exponent digits")
    if j != n:
        raise ParseError("unexpected character", s, j)
    mant = int((int_part or "0") + frac_part)
    value = mpq(mant) * pow_base(10, exp10 - len(frac_part))
    return -value if neg else value


def format_scalar(a) -> str:
    """Canonical text: ``p`` for integers, otherwise ``p/q`` in lowest terms."""
    a = exact(a)
    if a.denominator == 1:
        return str(a.numerator)
    return f"{a.numerator}/{a.denominator}"


def decimal_approx(a, digits: int) -> str:
    """``a`` rounded half-away to ``digits`` places after the point, prefixed with ``~``."""
    a = exact(a)
    if digits < 0:
        raise UsageError("digits must be nonnegative")
    scaled = a * ipow(10, digits)
    n = abs(scaled.numerator)
    d = scaled.denominator
    q, r = divmod(n, d)
    if 2 * r >= d:
        q += 1
    body = str(q).rjust(digits + 1, "0")
    if digits:
        body = body[:-digits] + "." + body[-digits:]
    prefix = "-" if a < 0 and q != 0 else ""
    return f"~{prefix}{body}"


def isqrt(n):
    return gmpy2.isqrt(mpz(n))


def to_fraction(a) -> Fraction:
    a = exact(a)
    return Fraction(int(a.numerator), int(a.denominator))


def require_nonnegative(a, what="value"):
    if a < 0:
        raise DomainError(f"{what} must be nonnegative, got {format_scalar(a)}")
    return a
