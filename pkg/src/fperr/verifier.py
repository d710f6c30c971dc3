"""Randomized and exhaustive verification of the bound catalog.

Every check is an exact rational comparison.  Trials draw their randomness
from ``random.Random(f"{seed}/{label}/{index}")`` so each trial can be
reproduced on its own and the order of evaluation never matters.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from gmpy2 import mpq

from . import witnesses as W
from .accumulate import DOT, FMA_DOT, SUM, aggregate_terms, fma_dot, fp_dot, fp_sum
from .bounds import BoundKind, evaluate, kinds_for
from .errors import ConfigurationError, UsageError
from .exactnum import ExactScalar, format_scalar, ipow, pow_base
from .fpsys import (
    FpSystem,
    Kind,
    contains,
    magnitude_window,
    neighbors,
    parse_system,
    slab,
    small_sum_hypothesis,
    sterbenz_hypothesis,
)
from .rounding import Rounder, TiePolicy, parse_policies

K = BoundKind


class Generator(enum.Enum):
    LOG_UNIFORM = "log-uniform"
    NEAR_MIDPOINTS = "near-midpoints"
    MIXED_SIGNS = "mixed-signs"
    SUBNORMAL_HEAVY = "subnormal-heavy"
    ROUND_ROBIN = "round-robin"


GENERATOR_CYCLE = (Generator.LOG_UNIFORM, Generator.NEAR_MIDPOINTS,
                   Generator.MIXED_SIGNS, Generator.SUBNORMAL_HEAVY)

# kinds checked by default in sweeps
SWEEP_KINDS = (
    K.NORM_ONE_SHARP, K.NORM_ONE_UNPERFECT,
    K.CUMULATIVE_POSITIVE_UPPER, K.CUMULATIVE_POSITIVE_LOWER,
    K.CUMULATIVE_SIGNED, K.SIGNED_UNPERFECT, K.SIGNED_UNPERFECT_REDUCED,
    K.DOT_PERFECT, K.DOT_IEEE, K.DOT_IEEE_REDUCED, K.DOT_MPFR,
    K.FMA_PERFECT, K.FMA_UNPERFECT,
)


@dataclass(frozen=True)
class SweepConfig:
    system: FpSystem
    policies: tuple
    n_range: tuple = (1, 20)
    trials: int = 1000
    seed: int = 0
    generator: Generator = Generator.ROUND_ROBIN
    kinds: tuple = SWEEP_KINDS
    operations: tuple = (SUM, DOT, FMA_DOT)
    inject_witnesses: bool = True
    label: str = ""

    def __post_init__(self):
        if self.trials < 1:
            raise UsageError("trials must be at least 1")
        lo, hi = self.n_range
        if not 1 <= lo <= hi:
            raise UsageError(f"bad n range {self.n_range}")
        if not self.policies:
            raise UsageError("at least one tie policy is required")
        if not self.label:
            pol = ",".join(p.value for p in self.policies)
            object.__setattr__(self, "label", f"{self.system}/{pol}")

    def describe(self) -> dict:
        return {
            "system": str(self.system),
            "policies": [p.value for p in self.policies],
            "n_range": list(self.n_range),
            "trials": self.trials,
            "seed": self.seed,
            "generator": self.generator.value,
            "operations": list(self.operations),
            "kinds": [k.value for k in self.kinds],
        }


@dataclass
class KindStat:
    checked: int = 0
    applicable: int = 0
    violations: int = 0
    max_ratio: ExactScalar | None = None
    argmax: dict | None = None
    exact_zero: int = 0

    def as_record(self) -> dict:
        return {
            "checked": self.checked,
            "applicable": self.applicable,
            "violations": self.violations,
            "max_ratio": None if self.max_ratio is None else format_scalar(self.max_ratio),
            "exact_zero": self.exact_zero,
            "argmax": self.argmax,
        }

    def merge(self, other: "KindStat"):
        """Fold a later chunk into this one (strictly greater ratios win)."""
        self.checked += other.checked
        self.applicable += other.applicable
        self.violations += other.violations
        self.exact_zero += other.exact_zero
        if other.max_ratio is not None and (self.max_ratio is None or other.max_ratio > self.max_ratio):
            self.max_ratio, self.argmax = other.max_ratio, other.argmax


@dataclass
class SweepReport:
    config: SweepConfig
    stats: dict = field(default_factory=dict)
    violation_samples: list = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def violations(self) -> int:
        return sum(s.violations for s in self.stats.values())

    def as_record(self) -> dict:
        return {
            "type": "sweep",
            "label": self.config.label,
            "config": self.config.describe(),
            "violations": self.violations,
            "kinds": {k.value: s.as_record() for k, s in self.stats.items()},
            "violation_samples": self.violation_samples[:5],
        }


# ---------------------------------------------------------------------------
# Random inputs
# ---------------------------------------------------------------------------

def _nu_decade(sys: FpSystem) -> int:
    return 0 if sys.perfect else sys.emin + sys.mu


def random_element(rng: random.Random, sys: FpSystem, d: int) -> ExactScalar:
    """A positive element of F with magnitude in [beta**d, beta**(d+1))."""
    return random_element_spaced(rng, sys, d)[0]


def random_element_spaced(rng: random.Random, sys: FpSystem, d: int):
    """(x, gap): a random positive element and the distance to its successor."""
    beta, mu = sys.base, sys.mu
    bm = ipow(beta, mu)
    if sys.perfect or d >= sys.emin + mu:
        r = rng.randrange((beta - 1) * bm)
        g = pow_base(beta, d - mu)
        return g * (bm + r), g
    if sys.kind is Kind.IEEE and d >= sys.emin:
        lo = ipow(beta, d - sys.emin)
        g = pow_base(beta, sys.emin)
        return g * rng.randrange(lo, lo * beta), g
    # MPFR has nothing below nu: use the lowest binade
    return random_element_spaced(rng, sys, sys.emin + mu)


def _window(sys: FpSystem, gen: Generator) -> tuple[int, int]:
    dn = _nu_decade(sys)
    if gen is Generator.SUBNORMAL_HEAVY and not sys.perfect:
        return sys.emin, dn + 1
    return dn - 1, dn + 5


def _half_spacing(sys: FpSystem, x) -> ExactScalar:
    lo, hi = neighbors(sys, x + pow_base(sys.base, -4 * sys.mu) * x)
    return (hi - lo) / 2


def _draw(rng, sys, gen, count, signed):
    """Random elements of a magnitude window; half of the draws move every
    element onto a midpoint with probability 1/2."""
    lo, hi = _window(sys, gen)
    perturb = rng.random() < 0.5
    below_nu = gen is Generator.SUBNORMAL_HEAVY and not sys.perfect
    out = []
    for _ in range(count):
        x, g = random_element_spaced(rng, sys, rng.randint(lo, hi))
        if below_nu and rng.random() < 0.25:
            # an arbitrary rational below nu, usually not in F
            x = sys.nu * rng.randint(1, 4 * sys.base) / rng.randint(1, 4 * sys.base)
        elif perturb and rng.random() < 0.5:
            x = x + g / 2
        if signed and rng.random() < 0.5:
            x = -x
        out.append(x)
    return out


def _near_midpoints(rng, sys, count, rounders, signed):
    """Inputs chosen so that many partial sums land exactly on midpoints."""
    lo, hi = _window(sys, Generator.NEAR_MIDPOINTS)
    xs = [random_element(rng, sys, rng.randint(lo, hi)) for _ in range(2)]
    s = rounders[0](xs[0] + xs[1])
    for k in range(2, count):
        x = random_element(rng, sys, rng.randint(lo, hi))
        if signed and rng.random() < 0.3:
            x = -x
        if rng.random() < 0.75:
            t = s + x
            a, b = neighbors(sys, t)
            if a != b:
                x = (a + b) / 2 - s
        xs.append(x)
        s = rounders[k - 1](s + x)
    return xs


def generate(rng: random.Random, sys: FpSystem, gen: Generator, count: int, rounders) -> list:
    if gen is Generator.NEAR_MIDPOINTS:
        return _near_midpoints(rng, sys, count, rounders, rng.random() < 0.5)
    signed = gen is Generator.MIXED_SIGNS or (gen is Generator.SUBNORMAL_HEAVY and rng.random() < 0.5)
    return _draw(rng, sys, gen, count, signed)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def _record_inputs(op, policies, xs, ys=None) -> dict:
    rec = {"operation": op, "policies": [p.value for p in policies],
           "x": [format_scalar(v) for v in xs]}
    if ys is not None:
        rec["y"] = [format_scalar(v) for v in ys]
    return rec


def _check(stats, samples, sys, op, n, agg, kinds, where):
    for kind in kinds:
        if kind not in stats:
            continue
        st = stats[kind]
        st.checked += 1
        rep = evaluate(kind, sys, n, agg)
        if not rep.applicable:
            continue
        st.applicable += 1
        obs, bound = rep.observed_error, rep.bound_value
        if obs > bound:
            st.violations += 1
            if len(samples) < 20:
                samples.append({"kind": kind.value, "bound": format_scalar(bound),
                                "observed": format_scalar(obs), **where()})
        if bound > 0:
            r = obs / bound
            if st.max_ratio is None or r > st.max_ratio:
                st.max_ratio, st.argmax = r, where()
        elif obs == 0:
            st.exact_zero += 1


@lru_cache(maxsize=None)
def _rounder(sys: FpSystem, policy: TiePolicy) -> Rounder:
    return Rounder(sys, policy)


@lru_cache(maxsize=None)
def _kinds(op: str) -> tuple:
    return tuple(kinds_for(op))


def _run_trial(cfg: SweepConfig, i: int, stats, samples):
    sys = cfg.system
    rng = random.Random(f"{cfg.seed}/{cfg.label}/{i}")
    n = rng.randint(*cfg.n_range)
    gen = cfg.generator if cfg.generator is not Generator.ROUND_ROBIN else GENERATOR_CYCLE[i % 4]
    op = cfg.operations[(i // 4) % len(cfg.operations)]
    pols = cfg.policies
    policy_seq = [pols[0]] * (n + 1) if len(pols) == 1 else [rng.choice(pols) for _ in range(n + 1)]
    rounders = [_rounder(sys, p) for p in policy_seq]
    if op == SUM:
        xs = generate(rng, sys, gen, n + 1, rounders)
        t = fp_sum(rounders[:n], xs)
        agg = aggregate_terms(SUM, xs, sys, t.total_error)
        where = lambda: {"trial": i, "generator": gen.value, **_record_inputs(op, policy_seq[:n], xs)}
    else:
        xs = generate(rng, sys, gen, n + 1, rounders)
        ys = _draw(rng, sys, Generator.LOG_UNIFORM, n + 1, gen is Generator.MIXED_SIGNS)
        ys = [y * pow_base(sys.base, -_nu_decade(sys)) if not sys.perfect else y for y in ys]
        if op == DOT:
            prs = [_rounder(sys, rng.choice(pols)) for _ in range(n + 1)]
            t = fp_dot(rounders[:n], prs, xs, ys)
            pol_rec = policy_seq[:n] + [r.policy for r in prs]
        else:
            t = fma_dot(rounders, xs, ys)
            pol_rec = policy_seq
        agg = aggregate_terms(op, t.products, sys, t.total_error)
        where = lambda: {"trial": i, "generator": gen.value, **_record_inputs(op, pol_rec, xs, ys)}
    _check(stats, samples, sys, op, n, agg, _kinds(op), where)


def _witness_traces(cfg: SweepConfig):
    """Closed-form witnesses compatible with the configuration (perfect systems only)."""
    sys = cfg.system
    if not sys.perfect or SUM not in cfg.operations:
        return []
    lo, hi = cfg.n_range
    u = sys.u
    out = []
    for p in cfg.policies:
        if p in (TiePolicy.DOWNWARD, TiePolicy.UPWARD):
            n = hi if p is TiePolicy.DOWNWARD or 2 * hi * u < 1 else lo
            out.append(W.norm_one_sharp(sys, n, p))
        if p is TiePolicy.UPWARD:
            out.append(W.max_cumulative(sys, hi))
            if sys.base == 2:
                n = max([k for k in range(lo, hi + 1) if 2 ** k * u <= 1], default=None)
                if n is not None:
                    out.append(W.mixed_signs(sys, n))
        if p is TiePolicy.DOWNWARD and sys.base == 2:
            out.append(W.min_cumulative(sys, hi))
    return out


def _sweep_chunk(cfg: SweepConfig, start: int, stop: int):
    stats = {k: KindStat() for k in cfg.kinds}
    samples = []
    for i in range(start, stop):
        _run_trial(cfg, i, stats, samples)
    return stats, samples


def sweep(cfg: SweepConfig, workers: int = 1, chunk: int = 2000) -> SweepReport:
    """Run cfg.trials random trials (plus injected witnesses) and reduce in trial order."""
    t0 = time.perf_counter()
    stats = {k: KindStat() for k in cfg.kinds}
    samples: list = []
    if cfg.inject_witnesses:
        for j, w in enumerate(_witness_traces(cfg)):
            t = w.run()
            agg = aggregate_terms(SUM, w.inputs, cfg.system, t.total_error)
            where = lambda w=w, j=j: {"trial": f"witness:{w.name}", **_record_inputs(SUM, [w.policy] * w.n, w.inputs)}
            _check(stats, samples, cfg.system, SUM, w.n, agg, kinds_for(SUM), where)
    bounds_ = [(s, min(s + chunk, cfg.trials)) for s in range(0, cfg.trials, chunk)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_sweep_chunk, [cfg] * len(bounds_), *zip(*bounds_)))
    else:
        parts = [_sweep_chunk(cfg, a, b) for a, b in bounds_]
    for part_stats, part_samples in parts:
        for k, st in part_stats.items():
            stats[k].merge(st)
        samples.extend(part_samples)
    return SweepReport(cfg, stats, samples[:20], time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Exhaustive and targeted checks
# ---------------------------------------------------------------------------

def exhaustive_pairs(sys: FpSystem, max_abs=None) -> dict:
    """Check the exact-sum and Sterbenz conclusions on every pair of a finite slab."""
    if sys.perfect:
        raise ConfigurationError("exhaustive enumeration needs an unperfect system")
    if max_abs is None:
        max_abs = sys.base ** 2 * sys.nu
    elems = slab(sys, max_abs)
    members = set(elems)
    rep = {"type": "exhaustive-pairs", "system": str(sys), "max_abs": format_scalar(max_abs),
           "elements": len(elems), "pairs": 0,
           "small_sum_hypothesis": 0, "small_sum_counterexamples": [],
           "sterbenz_hypothesis": 0, "sterbenz_counterexamples": []}
    for x in elems:
        for y in elems:
            rep["pairs"] += 1
            s = x + y
            if small_sum_hypothesis(sys, x, y):
                rep["small_sum_hypothesis"] += 1
                if s not in members and not contains(sys, s):
                    rep["small_sum_counterexamples"].append([format_scalar(x), format_scalar(y)])
            if sterbenz_hypothesis(sys, x, y):
                rep["sterbenz_hypothesis"] += 1
                d = y - x
                if d not in members and not contains(sys, d):
                    rep["sterbenz_counterexamples"].append([format_scalar(x), format_scalar(y)])
    rep["passed"] = not rep["small_sum_counterexamples"] and not rep["sterbenz_counterexamples"]
    return rep


def mpfr_pair_remark(sys: FpSystem) -> dict:
    """The pair (3 alpha/2, -alpha): excluded by the hypotheses and its sum is not in F."""
    x, y = 3 * sys.alpha / 2, -sys.alpha
    rec = {"type": "mpfr-pair", "system": str(sys), "x": format_scalar(x), "y": format_scalar(y),
           "x_in_F": contains(sys, x), "y_in_F": contains(sys, y),
           "hypothesis": small_sum_hypothesis(sys, x, y), "sum_in_F": contains(sys, x + y)}
    rec["passed"] = rec["x_in_F"] and rec["y_in_F"] and not rec["hypothesis"] and not rec["sum_in_F"]
    return rec


def sqrt_roundtrip(sys: FpSystem, window=(-2, 2), policies=tuple(TiePolicy)) -> dict:
    """fl(sqrt(fl(x^2))) against |x| and fl(|x| / fl(sqrt(fl(x^2)))) against 1."""
    xs = [x for x in magnitude_window(sys, *window)]
    rep = {"type": "sqrt-roundtrip", "system": str(sys), "window": list(window),
           "checked": 0, "identity_failures": [], "ratio_failures": []}
    for x in xs:
        for sx in (x, -x):
            for p1 in policies:
                q = Rounder(sys, p1)(sx * sx)
                if q < sys.nu or sx * sx < sys.nu:
                    continue
                for p2 in policies:
                    r2 = Rounder(sys, p2)
                    s = r2.sqrt(q)
                    rep["checked"] += 1
                    if sys.base == 2 and s != x:
                        rep["identity_failures"].append([format_scalar(sx), p1.value, p2.value])
                    for p3 in policies:
                        if Rounder(sys, p3)(x / s) > 1:
                            rep["ratio_failures"].append([format_scalar(sx), p1.value, p2.value, p3.value])
    rep["passed"] = not rep["identity_failures"] and not rep["ratio_failures"]
    return rep


def _random_real(rng, sys):
    x = random_element(rng, sys, rng.randint(-3, 3))
    if rng.random() < 0.5:
        x = x * (1 + mpq(rng.randint(-999, 999), 1000) * sys.u)
    return -x if rng.random() < 0.5 else x


def product_chain_check(sys: FpSystem, trials: int, seed: int, policies=tuple(TiePolicy)) -> dict:
    """1 - ku <= fl-chain / exact product <= 1 + ku for k = 1, 2, 3."""
    u = sys.u
    rep = {"type": "product-chain", "system": str(sys), "trials": trials, "seed": seed,
           "resampled": 0, "violations": [], "max_dev": [None, None, None]}
    maxdev = [mpq(0)] * 3
    for i in range(trials):
        rng = random.Random(f"{seed}/chain/{sys}/{i}")
        while True:
            x, y, z, w = (_random_real(rng, sys) for _ in range(4))
            r = [Rounder(sys, rng.choice(policies)) for _ in range(3)]
            args, exacts, hats = [], [], []
            p_hat, p = x, x
            for f, rr in zip((y, z, w), r):
                a = p_hat * f
                p = p * f
                p_hat = rr(a)
                args.append(a)
                exacts.append(p)
                hats.append(p_hat)
            if all(e != 0 for e in exacts) and all(abs(a) >= sys.nu for a in args):
                break
            rep["resampled"] += 1
        for k in range(3):
            q = hats[k] / exacts[k]
            dev = abs(q - 1)
            if dev > maxdev[k]:
                maxdev[k] = dev
            if not (1 - (k + 1) * u <= q <= 1 + (k + 1) * u):
                rep["violations"].append({"trial": i, "k": k + 1,
                                          "inputs": [format_scalar(v) for v in (x, y, z, w)]})
    rep["max_dev"] = [format_scalar(d / ((k + 1) * u)) for k, d in enumerate(maxdev)]
    rep["passed"] = not rep["violations"]
    return rep


def _ratio(kind, sys, n, xs, policies):
    rs = [Rounder(sys, p) for p in policies]
    t = fp_sum(rs, xs)
    agg = aggregate_terms(SUM, xs, sys, t.total_error)
    rep = evaluate(kind, sys, n, agg)
    return rep.ratio if rep.ratio is not None else mpq(0), t


def worst_ratio_search(sys: FpSystem, kind: BoundKind, n: int, budget: int, seed: int,
                       policy: TiePolicy = TiePolicy.DOWNWARD, start: Sequence | None = None):
    """Hill climbing that pushes partial sums onto midpoints; returns (inputs, ratio).

    Moves either retarget one parcel so that the partial sum it feeds becomes
    the midpoint of its neighbours, or nudge one input by a grid step.  A move
    is kept when the ratio does not decrease.
    """
    if budget < 1:
        raise UsageError("budget must be at least 1")
    rng = random.Random(f"{seed}/search/{kind.value}/{sys}/{n}")
    policies = [policy] * n
    if start is None:
        xs = [random_element(rng, sys, rng.randint(-2, 0)) for _ in range(n + 1)]
    else:
        xs = list(start)
    best, t = _ratio(kind, sys, n, xs, policies)
    for _ in range(budget - 1):
        cand = list(xs)
        k = rng.randint(1, n)
        if rng.random() < 0.6:
            s = t.partials[k - 1]
            cur = s + t.parcels[k - 1]
            a, b = neighbors(sys, cur)
            if a == b:
                a, b = neighbors(sys, cur + _half_spacing(sys, cur) / 2)
            target = (a + b) / 2
            shift = target - cur
            cand[k if k >= 2 else rng.randint(0, 1)] += shift
        else:
            j = rng.randint(0, n)
            step = _half_spacing(sys, cand[j]) * 2 if cand[j] != 0 else sys.u
            cand[j] += step * rng.choice((-1, 1))
        r, tc = _ratio(kind, sys, n, cand, policies)
        if r >= best:
            best, xs, t = r, cand, tc
    return xs, best


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------

ACCEPTANCE_PRECISION = {2: 8, 3: 5, 10: 3}


def acceptance_systems() -> list[FpSystem]:
    out = []
    for kind in (Kind.PERFECT, Kind.IEEE, Kind.MPFR):
        for beta, mu in ACCEPTANCE_PRECISION.items():
            emin = None if kind is Kind.PERFECT else -mu - 4
            out.append(FpSystem(kind, beta, mu, emin))
    return out


def sweep_configs(seed: int, trials: int, policies=tuple(TiePolicy)) -> list[SweepConfig]:
    return [SweepConfig(sys, (p,), (1, 20), trials, seed)
            for sys in acceptance_systems() for p in policies]


def run_suite(seed: int, trials: int, workers: int = 1, small: bool = False, corpus: str | None = None,
              progress=None) -> list[dict]:
    """Everything the verify command checks, as machine-readable records."""
    records = []
    for cfg in sweep_configs(seed, trials):
        rep = sweep(cfg, workers)
        records.append(rep.as_record())
        if progress:
            progress(f"{cfg.label}: {rep.violations} violations, {rep.wall_clock:.1f}s")
        if corpus:
            write_corpus(corpus, rep)
    records.append(exhaustive_pairs(FpSystem(Kind.IEEE, 2, 3, -6)))
    records.append(exhaustive_pairs(FpSystem(Kind.MPFR, 2, 3, -6)))
    records.append(mpfr_pair_remark(FpSystem(Kind.MPFR, 2, 3, -6)))
    for mu in ((3, 4) if small else range(3, 9)):
        records.append(sqrt_roundtrip(FpSystem(Kind.PERFECT, 2, mu)))
    for beta in (3, 4, 5, 10):
        for mu in (2, 3):
            records.append(sqrt_roundtrip(FpSystem(Kind.PERFECT, beta, mu)))
    chain_trials = max(1, min(trials, 10_000))
    for beta, mu in ACCEPTANCE_PRECISION.items():
        records.append(product_chain_check(FpSystem(Kind.PERFECT, beta, mu), chain_trials, seed))
    records.append(witness_records())
    return records


def witness_records() -> dict:
    rows = []
    for mu in (7, 10):
        sys = FpSystem(Kind.PERFECT, 2, mu)
        for n in (1, 2, 3, 10):
            for p in (TiePolicy.DOWNWARD, TiePolicy.UPWARD):
                _, ok = W.norm_one_sharp(sys, n, p).replay()
                rows.append(["norm-one-sharp", str(sys), n, p.value, ok])
    for beta in (2, 3):
        sys = FpSystem(Kind.PERFECT, beta, 8)
        for n in range(1, 7):
            _, ok = W.max_cumulative(sys, n).replay()
            rows.append(["max-cumulative", str(sys), n, "up", ok])
    sys = FpSystem(Kind.PERFECT, 2, 12)
    for n in range(1, 9):
        _, ok = W.mixed_signs(sys, n).replay()
        rows.append(["mixed-signs", str(sys), n, "up", ok])
    for m in range(1, 9):
        _, ok = W.quadratic_growth(sys, m).replay()
        rows.append(["quadratic-growth", str(sys), m, "down", ok])
    return {"type": "witness-replay", "rows": rows, "passed": all(r[-1] for r in rows)}


def suite_passed(records: Iterable[dict]) -> bool:
    for r in records:
        if r["type"] == "sweep":
            if r["violations"]:
                return False
        elif not r.get("passed", True):
            return False
    return True


def dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def write_corpus(directory: str, rep: SweepReport):
    """Append the argmax inputs of each bound as one record per line."""
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, "argmax.jsonl")
    with open(path, "a", encoding="utf-8") as fh:
        for kind, st in rep.stats.items():
            if st.argmax is None:
                continue
            fh.write(dumps({"system": str(rep.config.system), "kind": kind.value,
                            "ratio": format_scalar(st.max_ratio), **st.argmax}) + "\n")


# ---------------------------------------------------------------------------
# key=value configuration files
# ---------------------------------------------------------------------------

def parse_config_text(text: str, seed_override: int | None = None) -> SweepConfig:
    vals = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        vals[k.replace("-", "_")] = v
    known = {"system", "policies", "policy", "n_min", "n_max", "trials", "seed", "generator",
             "kinds", "operations", "label", "inject_witnesses"}
    unknown = set(vals) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "system" not in vals or not ({"policies", "policy"} & set(vals)):
        raise UsageError("config needs system and policies")
    kw = {
        "system": parse_system(vals["system"]),
        "policies": tuple(parse_policies(vals.get("policies") or vals["policy"])),
        "n_range": (int(vals.get("n_min", 1)), int(vals.get("n_max", 20))),
        "trials": int(vals.get("trials", 1000)),
        "seed": int(vals.get("seed", 0)),
        "generator": Generator(vals.get("generator", "round-robin")),
        "inject_witnesses": vals.get("inject_witnesses", "true").lower() in ("1", "true", "yes"),
        "label": vals.get("label", ""),
    }
    if "kinds" in vals:
        kw["kinds"] = tuple(BoundKind.parse(k) for k in vals["kinds"].split(",") if k.strip())
    if "operations" in vals:
        ops = tuple(o.strip() for o in vals["operations"].split(",") if o.strip())
        bad = [o for o in ops if o not in (SUM, DOT, FMA_DOT)]
        if bad:
            raise UsageError(f"unknown operations: {bad}")
        kw["operations"] = ops
    if seed_override is not None:
        kw["seed"] = seed_override
    return SweepConfig(**kw)
