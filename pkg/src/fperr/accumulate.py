"""Recursive rounded sums, dot products and fma dot products with full traces.

Index conventions: a sum of the n + 1 numbers x_0..x_n is evaluated with n
roundings.  The first two summands are added exactly and the pair is the
first parcel, so parcels are z_1 = x_0 + x_1 and z_k = x_k for k >= 2, and
s_k = fl_k(s_{k-1} + z_k) starting from s_0 = 0.  Dot products round each
product first and then sum them with the same convention; fma dot products
use one rounding per product (n + 1 steps for n + 1 pairs).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from .errors import UsageError
from .exactnum import ExactScalar, exact, format_scalar
from .fpsys import FpSystem, contains

SUM, DOT, FMA_DOT = "sum", "dot", "fma-dot"


@dataclass
class SumTrace:
    operation: str
    inputs: list
    parcels: list
    partials: list
    step_errors: list
    xi_factors: list
    fused_first: bool = True
    y: list | None = None
    products: list | None = None
    rounded_products: list | None = None
    system: FpSystem | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        """Number of rounding steps in the accumulation."""
        return len(self.parcels)

    @property
    def result(self) -> ExactScalar:
        return self.partials[-1]

    @property
    def reference(self) -> ExactScalar:
        """The exact value being approximated."""
        terms = self.products if self.products is not None else self.inputs
        return sum(terms, mpq(0))

    @property
    def total_error(self) -> ExactScalar:
        return self.result - self.reference

    def records(self) -> list[dict]:
        """One machine-readable record per step, rationals as strings."""
        out = []
        for k, z in enumerate(self.parcels, start=1):
            out.append({
                "k": k,
                "input": format_scalar(z),
                "partial_before": format_scalar(self.partials[k - 1]),
                "partial_after": format_scalar(self.partials[k]),
                "step_error": format_scalar(self.step_errors[k - 1]),
            })
        return out


def _as_rounders(rounders, count: int, what: str) -> list:
    rs = list(rounders)
    if len(rs) != count:
        raise UsageError(f"{what}: expected {count} rounders, got {len(rs)}")
    return rs


def _accumulate(rounders, parcels):
    partials = [mpq(0)]
    errors = []
    xis = []
    s = partials[0]
    for r, z in zip(rounders, parcels):
        t = s + z
        s = getattr(r, "_fl", r)(t)
        partials.append(s)
        errors.append(s - t)
        xis.append(s / t if t != 0 else None)
    return partials, errors, xis


def fp_sum(rounders, xs: Sequence, fuse_first: bool = True) -> SumTrace:
    """fl[x_0 + ... + x_n] under the rounding tuple ``rounders``.

    With ``fuse_first`` (the default) x_0 + x_1 is formed exactly and the
    tuple has n entries.  ``fuse_first=False`` rounds every one of the n + 1
    additions (starting with 0 + x_0) and needs n + 1 rounders.
    """
    xs = [exact(x) for x in xs]
    if fuse_first:
        if len(xs) < 2:
            raise UsageError("a sum needs at least two summands (n >= 1)")
        parcels = [xs[0] + xs[1]] + xs[2:]
    else:
        if not xs:
            raise UsageError("a sum needs at least one summand")
        parcels = xs
    rs = _as_rounders(rounders, len(parcels), "sum")
    partials, errors, xis = _accumulate(rs, parcels)
    return SumTrace(SUM, xs, parcels, partials, errors, xis, fused_first=fuse_first,
                    system=getattr(rs[0], "system", None))


def _pairs(x, y):
    x = [exact(v) for v in x]
    y = [exact(v) for v in y]
    if len(x) != len(y):
        raise UsageError(f"vectors differ in length ({len(x)} vs {len(y)})")
    if not x:
        raise UsageError("dot products need at least one pair")
    return x, y


def fp_dot(rounders, product_rounders, x: Sequence, y: Sequence) -> SumTrace:
    """Round every product x_k y_k, then sum the rounded products.

    n + 1 pairs take n + 1 product rounders and n sum rounders.  A single pair
    needs no sum rounding; its only step copies the rounded product exactly.
    """
    x, y = _pairs(x, y)
    prs = _as_rounders(product_rounders, len(x), "products")
    products = [a * b for a, b in zip(x, y)]
    rounded = [r(p) for r, p in zip(prs, products)]
    if len(x) == 1:
        _as_rounders(rounders, 0, "dot")
        parcels = rounded[:]
        partials, errors, xis = [mpq(0), rounded[0]], [mpq(0)], [mpq(1) if rounded[0] else None]
    else:
        rs = _as_rounders(rounders, len(x) - 1, "dot")
        parcels = [rounded[0] + rounded[1]] + rounded[2:]
        partials, errors, xis = _accumulate(rs, parcels)
    return SumTrace(DOT, x, parcels, partials, errors, xis, y=y, products=products,
                    rounded_products=rounded, system=getattr(prs[0], "system", None))


def fma_dot(rounders, x: Sequence, y: Sequence) -> SumTrace:
    """S_{n+1} over the exact products: one rounding per multiply-add."""
    x, y = _pairs(x, y)
    rs = _as_rounders(rounders, len(x), "fma-dot")
    products = [a * b for a, b in zip(x, y)]
    partials, errors, xis = _accumulate(rs, products)
    return SumTrace(FMA_DOT, x, products[:], partials, errors, xis, fused_first=False, y=y,
                    products=products, system=getattr(rs[0], "system", None))


# ---------------------------------------------------------------------------
# Aggregates feeding the bound catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Aggregates:
    """Right-hand-side quantities of the bounds, computed exactly.

    ``terms`` is the sequence y_0..y_n the bounds speak about and ``n`` its
    rounding count: the summands for sums (with a leading 0 when the first pair
    is not fused), the exact products x_k y_k for dot and fma dot products.
    ``norm1`` is the sum of |y_k|, ``cumulative`` the sum over k = 1..n of the
    prefix sums y_0 + ... + y_k and ``cumulative_abs`` the same with absolute
    values of the prefix sums.  ``value`` is the rounded argument for the
    single-operation kinds and ``min_abs`` the smallest magnitude among the
    rounding arguments of a product chain.
    """

    operation: str
    n: int
    total_error: ExactScalar | None = None
    norm1: ExactScalar | None = None
    cumulative: ExactScalar | None = None
    cumulative_abs: ExactScalar | None = None
    max_abs: ExactScalar | None = None
    nonnegative: bool | None = None
    in_system: bool | None = None
    value: ExactScalar | None = None
    min_abs: ExactScalar | None = None


def aggregate_terms(operation: str, terms: Sequence, sys: FpSystem | None = None,
                    total_error=None, n: int | None = None) -> Aggregates:
    terms = [exact(t) for t in terms]
    if n is None:
        n = len(terms) - 1
    norm1 = mpq(0)
    cum = mpq(0)
    cum_abs = mpq(0)
    max_abs = mpq(0)
    prefix = mpq(0)
    for k, t in enumerate(terms):
        a = abs(t)
        norm1 += a
        if a > max_abs:
            max_abs = a
        prefix += t
        if k >= 1:
            cum += prefix
            cum_abs += abs(prefix)
    nonneg = all(t >= 0 for t in terms)
    member = None if sys is None else all(contains(sys, t) for t in terms)
    return Aggregates(operation, n, total_error, norm1, cum, cum_abs, max_abs, nonneg, member)


def bound_terms(t: SumTrace) -> list:
    if t.operation == SUM:
        return ([mpq(0)] + t.inputs) if not t.fused_first else list(t.inputs)
    return list(t.products)


def error_summary(t: SumTrace, sys: FpSystem | None = None) -> Aggregates:
    """Aggregates of a trace; ``n`` follows each operation's bound convention."""
    sys = sys or t.system
    terms = bound_terms(t)
    n = len(terms) - 1
    return aggregate_terms(t.operation, terms, sys, t.total_error, n)


def single_op(value, rounded) -> Aggregates:
    value, rounded = exact(value), exact(rounded)
    return Aggregates("op", 1, total_error=rounded - value, value=value)
