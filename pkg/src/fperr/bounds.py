"""Closed-form rounding error bounds, evaluated exactly with hypothesis checks.

The bounds speak about y_0..y_n summed with n roundings (or n + 1 pairs for
dot products).  One-sided kinds compare the signed error: the upper
cumulative bound uses delta = fl - exact, the lower one uses -delta.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

from gmpy2 import mpq

from .accumulate import DOT, FMA_DOT, SUM, Aggregates
from .errors import UsageError
from .exactnum import ExactScalar, format_scalar, ipow
from .fpsys import FpSystem, Kind

C105 = mpq(21, 20)
C205 = mpq(41, 20)
C3_2 = mpq(3, 2)


class BoundKind(enum.Enum):
    PER_OP_SHARP = "per-op-sharp"
    PER_OP_CLASSIC = "per-op-classic"
    NAIVE_GAMMA = "naive-gamma"
    NORM_ONE_SHARP = "norm-one-sharp"
    NORM_ONE_LINEAR = "norm-one-linear"
    NORM_ONE_UNPERFECT = "norm-one-unperfect"
    MAX_QUADRATIC = "max-quadratic"
    CUMULATIVE_POSITIVE_UPPER = "cumulative-positive-upper"
    CUMULATIVE_POSITIVE_LOWER = "cumulative-positive-lower"
    CUMULATIVE_SIGNED = "cumulative-signed"
    SIGNED_UNPERFECT = "signed-unperfect"
    SIGNED_UNPERFECT_REDUCED = "signed-unperfect-reduced"
    DOT_PERFECT = "dot-perfect"
    DOT_PERFECT_LINEAR = "dot-perfect-linear"
    DOT_IEEE = "dot-ieee"
    DOT_IEEE_REDUCED = "dot-ieee-reduced"
    DOT_MPFR = "dot-mpfr"
    FMA_PERFECT = "fma-perfect"
    FMA_UNPERFECT = "fma-unperfect"
    PRODUCT_CHAIN = "product-chain"

    @classmethod
    def parse(cls, text: str) -> "BoundKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise UsageError(f"unknown bound kind {text!r}; known kinds: {names}") from None


K = BoundKind

OPERATION = {
    K.PER_OP_SHARP: "op", K.PER_OP_CLASSIC: "op", K.PRODUCT_CHAIN: "chain",
    K.DOT_PERFECT: DOT, K.DOT_PERFECT_LINEAR: DOT, K.DOT_IEEE: DOT,
    K.DOT_IEEE_REDUCED: DOT, K.DOT_MPFR: DOT,
    K.FMA_PERFECT: FMA_DOT, K.FMA_UNPERFECT: FMA_DOT,
}
SUM_KINDS = tuple(k for k in BoundKind if k not in OPERATION)
for _k in SUM_KINDS:
    OPERATION[_k] = SUM

# which aggregate each kind reads
NEEDS = {
    K.PER_OP_SHARP: "value", K.PER_OP_CLASSIC: "value", K.PRODUCT_CHAIN: "value",
    K.MAX_QUADRATIC: "max_abs",
    K.CUMULATIVE_POSITIVE_UPPER: "cumulative", K.CUMULATIVE_POSITIVE_LOWER: "cumulative",
    K.CUMULATIVE_SIGNED: "cumulative_abs", K.SIGNED_UNPERFECT: "cumulative_abs",
    K.SIGNED_UNPERFECT_REDUCED: "cumulative_abs",
}

ONE_SIDED = {K.CUMULATIVE_POSITIVE_UPPER: 1, K.CUMULATIVE_POSITIVE_LOWER: -1}


def kinds_for(operation: str) -> list[BoundKind]:
    return [k for k in BoundKind if OPERATION[k] == operation]


# ---------------------------------------------------------------------------
# Constants appearing in the bounds
# ---------------------------------------------------------------------------

def tau(n: int, u, beta: int) -> ExactScalar:
    """1 / (1 + u((beta-2)/(beta-1) + n/(beta**n - 1)))."""
    return 1 / (1 + u * (mpq(beta - 2, beta - 1) + mpq(n, ipow(beta, n) - 1)))


def kappa_min_cumulative(n: int, u) -> ExactScalar:
    un = u ** n
    return (1 - u) * (1 - un) / (1 - un - n * un * u * (1 - u))


def kappa_mixed_signs(n: int, u) -> ExactScalar:
    h = 1 - mpq(1, 2 ** n)
    return h * (1 - (n - 2) * u) / (h * (1 + 3 * u) - n * u)


def beta_n(n: int, u) -> ExactScalar:
    return (n + 1 + 3 * n * u) / (1 + (n + 1) * u + n * u * u)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class BoundReport:
    kind: BoundKind
    hypotheses: list = field(default_factory=list)
    bound_value: ExactScalar = mpq(0)
    observed_error: ExactScalar | None = None
    variant: str = ""

    @property
    def applicable(self) -> bool:
        return all(h[1] for h in self.hypotheses)

    @property
    def ratio(self) -> ExactScalar | None:
        if self.observed_error is None or self.bound_value <= 0:
            return None
        return self.observed_error / self.bound_value

    @property
    def violated(self) -> bool:
        return self.applicable and self.observed_error is not None and self.observed_error > self.bound_value

    def ratio_text(self) -> str:
        if self.observed_error is None:
            return "-"
        r = self.ratio
        if r is None:
            return "exact" if self.observed_error == 0 else "unbounded"
        return format_scalar(r)

    def as_record(self) -> dict:
        return {
            "kind": self.kind.value,
            "applicable": self.applicable,
            "bound": format_scalar(self.bound_value),
            "observed": None if self.observed_error is None else format_scalar(self.observed_error),
            "ratio": self.ratio_text(),
            "variant": self.variant,
            "hypotheses": [{"name": n, "holds": h, "detail": _detail(d)} for n, h, d in self.hypotheses],
        }


def _detail(d) -> str:
    return d if isinstance(d, str) else format_scalar(d)


def observed_for(kind: BoundKind, total_error) -> ExactScalar:
    s = ONE_SIDED.get(kind)
    if s is None:
        return abs(total_error)
    return s * total_error


# ---------------------------------------------------------------------------
# Hypotheses that depend only on (kind, system, n) are cached with the
# coefficients; data-dependent ones are checked per call.
# ---------------------------------------------------------------------------

def _size_hyp(n, u, strict):
    v = 20 * n * u
    holds = v < 1 if strict else v <= 1
    rel = "<" if strict else "<="
    return ("20nu " + rel + " 1", bool(holds), f"20nu = {format_scalar(v)}")


def _kind_hyp(sys, want):
    names = {"perfect": sys.perfect, "unperfect": not sys.perfect,
             "ieee": sys.kind is Kind.IEEE, "mpfr": sys.kind is Kind.MPFR}
    return (f"{want} system", names[want], str(sys))


@lru_cache(maxsize=65536)
def _static(kind: BoundKind, sys: FpSystem, n: int):
    """(static hypotheses, coefficients) for kind on sys with n roundings."""
    u, a = sys.u, sys.alpha
    hyps = []
    if kind in (K.PER_OP_SHARP, K.PER_OP_CLASSIC):
        c = u / (1 + u) if kind is K.PER_OP_SHARP else u / (1 - u)
        return (), (c,)
    if kind is K.PRODUCT_CHAIN:
        hyps.append(("k <= 3", 1 <= n <= 3, f"k = {n}"))
        return tuple(hyps), (n * u,)
    if n < 0:
        raise UsageError("n must be nonnegative")
    nu_ = n * u
    if kind in (K.NORM_ONE_SHARP, K.NORM_ONE_LINEAR, K.NAIVE_GAMMA, K.MAX_QUADRATIC):
        hyps.append(_size_hyp(n, u, False))
        if kind is K.NAIVE_GAMMA:
            hyps.append(("nu < 1", nu_ < 1, f"nu = {format_scalar(nu_)}"))
            c = nu_ / (1 - nu_) if nu_ < 1 else mpq(0)
        elif kind is K.NORM_ONE_SHARP:
            c = nu_ / (1 + nu_)
        elif kind is K.NORM_ONE_LINEAR:
            c = nu_
        else:
            c = n * (n + 1) * u / (1 + nu_)
        return tuple(hyps), (c,)
    if kind is K.NORM_ONE_UNPERFECT:
        hyps += [_kind_hyp(sys, "unperfect"), _size_hyp(n, u, False)]
        c = nu_ / (1 + nu_)
        return tuple(hyps), (n * a / 2, c)
    if kind in (K.CUMULATIVE_POSITIVE_UPPER, K.CUMULATIVE_POSITIVE_LOWER):
        hyps.append(_size_hyp(n, u, False))
        if n == 0:
            c = mpq(0)
        else:
            c = tau(n, u, sys.base) * u if kind is K.CUMULATIVE_POSITIVE_UPPER else u / (1 + u)
        return tuple(hyps), (c,)
    # far outside 20nu <= 1 the signed denominator can vanish; the size
    # hypothesis already fails there, so any finite coefficient will do
    signed_den = 1 - (n - 2) * u
    signed = u / signed_den if signed_den > 0 else mpq(0)
    if kind is K.CUMULATIVE_SIGNED:
        hyps += [_kind_hyp(sys, "perfect"), _size_hyp(n, u, True)]
        return tuple(hyps), (signed,)
    if kind is K.SIGNED_UNPERFECT:
        hyps += [_kind_hyp(sys, "unperfect"), _size_hyp(n, u, False)]
        return tuple(hyps), ((1 + 2 * nu_) * n * a / 2, signed)
    if kind is K.SIGNED_UNPERFECT_REDUCED:
        hyps += [_kind_hyp(sys, "unperfect"), _size_hyp(n, u, False)]
        return tuple(hyps), (C3_2 * (1 + nu_ / 2) * u,)
    bn = beta_n(n, u)
    if kind is K.DOT_PERFECT:
        hyps += [_kind_hyp(sys, "perfect"), _size_hyp(n, u, False)]
        return tuple(hyps), (bn * u,)
    if kind is K.DOT_PERFECT_LINEAR:
        hyps += [_kind_hyp(sys, "perfect"), _size_hyp(n, u, False)]
        return tuple(hyps), ((n + 1) * u,)
    if kind is K.DOT_IEEE:
        hyps += [_kind_hyp(sys, "ieee"), _size_hyp(n, u, False)]
        return tuple(hyps), (C105 * (n + 1) * a / 2, bn * u)
    if kind is K.DOT_IEEE_REDUCED:
        # the reduced form is stated for IEEE and carried over to MPFR systems
        hyps += [_kind_hyp(sys, "unperfect"), _size_hyp(n, u, False)]
        return tuple(hyps), (C3_2 * (n + 1) * u,)
    if kind is K.DOT_MPFR:
        hyps += [_kind_hyp(sys, "mpfr"), _size_hyp(n, u, False)]
        return tuple(hyps), ((C205 * n + C105) * a / 2, bn * u)
    m = n + 1
    c = m * u / (1 + m * u)
    if kind is K.FMA_PERFECT:
        hyps += [_kind_hyp(sys, "perfect"), _size_hyp(n, u, False)]
        return tuple(hyps), (c,)
    if kind is K.FMA_UNPERFECT:
        hyps += [_kind_hyp(sys, "unperfect"), _size_hyp(n, u, False)]
        return tuple(hyps), (m * a / 2, c)
    raise UsageError(f"no formula for {kind}")  # pragma: no cover


def _need(agg: Aggregates, name: str, kind: BoundKind):
    v = getattr(agg, name)
    if v is None:
        raise UsageError(f"{kind.value} needs the aggregate {name!r}")
    return v


def _members_hyp(sys, agg, kind, nonneg_for_mpfr):
    """Input restrictions of the norm-one family on unperfect systems."""
    if sys.perfect:
        return []
    if agg.in_system is None:
        raise UsageError(f"{kind.value} on {sys} needs to know whether the terms lie in F")
    out = [("terms in F", bool(agg.in_system), "")]
    if nonneg_for_mpfr and sys.kind is Kind.MPFR:
        out.append(("terms >= 0", bool(agg.nonnegative), ""))
    return out


def evaluate(kind: BoundKind, sys: FpSystem, n: int, agg: Aggregates, observed=None) -> BoundReport:
    """Bound value and hypothesis checks of ``kind`` for the given aggregates.

    ``observed`` defaults to the error taken from ``agg.total_error`` in the
    orientation of the kind (absolute value for two-sided bounds).
    """
    if isinstance(kind, str):
        kind = BoundKind.parse(kind)
    static, coef = _static(kind, sys, n)
    hyps = list(static)
    if agg.operation != OPERATION[kind]:
        hyps.append(("operation", False, f"{kind.value} is about {OPERATION[kind]}, got {agg.operation}"))
    u, a = sys.u, sys.alpha
    variant = ""
    if kind in (K.PER_OP_SHARP, K.PER_OP_CLASSIC):
        z = abs(_need(agg, "value", kind))
        hyps.append(("|z| >= nu", z >= sys.nu, z))
        value = coef[0] * z
    elif kind is K.PRODUCT_CHAIN:
        p = abs(_need(agg, "value", kind))
        m = agg.min_abs if agg.min_abs is not None else p
        hyps.append(("p_k != 0", p != 0, ""))
        hyps.append(("rounding arguments >= nu", m >= sys.nu, m))
        value = coef[0] * p
    elif kind in (K.NORM_ONE_SHARP, K.NORM_ONE_LINEAR, K.NAIVE_GAMMA, K.MAX_QUADRATIC):
        hyps += _members_hyp(sys, agg, kind, True)
        base = _need(agg, "max_abs" if kind is K.MAX_QUADRATIC else "norm1", kind)
        value = coef[0] * base
    elif kind in (K.NORM_ONE_UNPERFECT, K.FMA_UNPERFECT):
        s = _need(agg, "norm1", kind)
        half, c = coef
        value = half + c * (half + s)
        variant = "full"
        if u * s >= a and c * s < value:
            value, variant = c * s, "reduced"
    elif kind in (K.CUMULATIVE_POSITIVE_UPPER, K.CUMULATIVE_POSITIVE_LOWER):
        hyps.append(("terms >= 0", bool(_need(agg, "nonnegative", kind)), ""))
        if not sys.perfect:
            hyps += _members_hyp(sys, agg, kind, False)
        value = coef[0] * _need(agg, "cumulative", kind)
    elif kind is K.CUMULATIVE_SIGNED:
        value = coef[0] * _need(agg, "cumulative_abs", kind)
    elif kind is K.SIGNED_UNPERFECT:
        value = coef[0] + coef[1] * _need(agg, "cumulative_abs", kind)
    elif kind is K.SIGNED_UNPERFECT_REDUCED:
        s = _need(agg, "cumulative_abs", kind)
        hyps.append(("u*cum >= n*alpha", u * s >= n * a, u * s))
        value = coef[0] * s
    elif kind in (K.DOT_IEEE, K.DOT_MPFR):
        value = coef[0] + coef[1] * _need(agg, "norm1", kind)
    elif kind is K.DOT_IEEE_REDUCED:
        s = _need(agg, "norm1", kind)
        hyps.append(("u*norm1 >= alpha", u * s >= a, u * s))
        value = coef[0] * s
    else:  # DOT_PERFECT, DOT_PERFECT_LINEAR, FMA_PERFECT
        value = coef[0] * _need(agg, "norm1", kind)
    if observed is None and agg.total_error is not None:
        observed = observed_for(kind, agg.total_error)
    return BoundReport(kind, hyps, value, observed, variant)


def available(kind: BoundKind, agg: Aggregates) -> bool:
    op = OPERATION[kind]
    if op != agg.operation:
        return False
    need = NEEDS.get(kind, "norm1")
    if getattr(agg, need) is None:
        return False
    if kind in (K.CUMULATIVE_POSITIVE_UPPER, K.CUMULATIVE_POSITIVE_LOWER) and agg.nonnegative is None:
        return False
    return True


def evaluate_all(sys: FpSystem, n: int, agg: Aggregates, kinds=None) -> list[BoundReport]:
    kinds = kinds if kinds is not None else [k for k in BoundKind if available(k, agg)]
    out = []
    for k in kinds:
        try:
            out.append(evaluate(k, sys, n, agg))
        except UsageError:
            continue
    return out


def tightest_applicable(sys: FpSystem, n: int, agg: Aggregates) -> list[BoundReport]:
    """Applicable bounds sorted by exact value (ties keep catalog order)."""
    reports = [r for r in evaluate_all(sys, n, agg) if r.applicable]
    return sorted(reports, key=lambda r: r.bound_value)
