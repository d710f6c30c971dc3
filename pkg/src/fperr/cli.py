"""Command line interface: ``fperr <command> ...``.

Every command that rounds takes an explicit ``--system`` and ``--policy``.
Exit status is 0 on success, 1 when a check fails (a bound is violated or a
witness does not replay) and 2 on usage errors.  Systems have no largest
exponent, so overflow never happens.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from typing import Sequence

from . import verifier as V
from . import witnesses as W
from .accumulate import DOT, FMA_DOT, SUM, Aggregates, error_summary, fma_dot, fp_dot, fp_sum
from .bounds import OPERATION, BoundKind, evaluate, evaluate_all
from .errors import FperrError
from .exactnum import decimal_approx, format_scalar, parse
from .fpsys import FpSystem, Kind, parse_system
from .rounding import Rounder, TiePolicy, parse_policies

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # accept -17/16, -1.5e-3 and -3@-2 as values rather than options
        self._negative_number_matcher = re.compile(r"^-(\d|\.\d)[\d./eE+@-]*$")

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class Out:
    """Number formatting and record emission shared by the commands."""

    def __init__(self, args, stream=None):
        self.digits = getattr(args, "decimal", None)
        self.json = getattr(args, "json", False)
        self.stream = stream or sys.stdout

    def num(self, x) -> str:
        s = format_scalar(x)
        if self.digits is not None:
            s += f" (approx {decimal_approx(x, self.digits)})"
        return s

    def line(self, text=""):
        print(text, file=self.stream)

    def record(self, rec: dict):
        print(V.dumps(rec), file=self.stream)


def _system(args) -> FpSystem:
    return parse_system(args.system)


def _values(items, sys_: FpSystem | None = None) -> list:
    base = sys_.base if sys_ is not None else None
    out = []
    for item in items:
        out += [parse(t.strip(), base) for t in item.split(",") if t.strip()]
    return out


# ---------------------------------------------------------------------------
# round / sqrt-round
# ---------------------------------------------------------------------------

def cmd_round(args, out: Out) -> int:
    s = _system(args)
    r = Rounder(s, TiePolicy.parse(args.policy))
    for z in _values(args.values, s):
        v = r.sqrt(z) if args.command == "sqrt-round" else r(z)
        if out.json:
            out.record({"type": args.command, "system": str(s), "policy": r.policy.value,
                        "input": format_scalar(z), "result": format_scalar(v),
                        "error": format_scalar(v - z) if args.command == "round" else None})
        else:
            out.line(out.num(v))
    return EXIT_OK


# ---------------------------------------------------------------------------
# sum / dot / fma-dot
# ---------------------------------------------------------------------------

def _trace(args, s: FpSystem):
    if args.command == SUM:
        xs = _values(args.values, s)
        fuse = not args.no_fuse_first
        steps = len(xs) - 1 if fuse else len(xs)
        rs = [Rounder(s, p) for p in parse_policies(args.policy, steps)]
        return fp_sum(rs, xs, fuse_first=fuse)
    xs, ys = _values([args.x], s), _values([args.y], s)
    if args.command == DOT:
        rs = [Rounder(s, p) for p in parse_policies(args.policy, len(xs) - 1)] if len(xs) > 1 else []
        pp = args.product_policy or args.policy.split(",")[0]
        prs = [Rounder(s, p) for p in parse_policies(pp, len(xs))]
        return fp_dot(rs, prs, xs, ys)
    rs = [Rounder(s, p) for p in parse_policies(args.policy, len(xs))]
    return fma_dot(rs, xs, ys)


def cmd_accumulate(args, out: Out) -> int:
    s = _system(args)
    t = _trace(args, s)
    agg = error_summary(t, s)
    reports = [r for r in evaluate_all(s, agg.n, agg)]
    shown = reports if args.all_bounds else [r for r in reports if r.applicable]
    violated = any(r.violated for r in reports)
    if out.json:
        for rec in t.records():
            out.record({"type": "step", **rec})
        out.record({"type": "result", "operation": t.operation, "system": str(s),
                    "fused_first": t.fused_first, "result": format_scalar(t.result),
                    "exact": format_scalar(t.reference), "error": format_scalar(t.total_error)})
        for r in shown:
            out.record({"type": "bound", **r.as_record()})
    else:
        if t.operation == SUM and not t.fused_first:
            out.line("note: every addition rounded (not the fused-first-pair convention of the bounds)")
        out.line(f"{'k':>3}  {'parcel':>20}  {'partial':>20}  {'step error':>20}")
        for rec in t.records():
            out.line(f"{rec['k']:>3}  {rec['input']:>20}  {rec['partial_after']:>20}  {rec['step_error']:>20}")
        out.line(f"result {out.num(t.result)}")
        out.line(f"exact {out.num(t.reference)}")
        out.line(f"error {out.num(t.total_error)}")
        if shown:
            out.line("")
            _bound_table(out, shown)
    return EXIT_FAIL if violated else EXIT_OK


def _bound_table(out: Out, reports):
    out.line(f"{'bound':<26} {'applicable':<10} {'value':>24} {'ratio':>16}")
    for r in reports:
        out.line(f"{r.kind.value:<26} {('yes' if r.applicable else 'no'):<10} "
                 f"{format_scalar(r.bound_value):>24} {r.ratio_text():>16}")


# ---------------------------------------------------------------------------
# bound
# ---------------------------------------------------------------------------

def _flag(text):
    if text is None:
        return None
    t = text.lower()
    if t in ("yes", "true", "1"):
        return True
    if t in ("no", "false", "0"):
        return False
    raise FperrError(f"expected yes or no, got {text!r}")


def cmd_bound(args, out: Out) -> int:
    kind = BoundKind.parse(args.kind)
    s = _system(args)
    num = lambda v: None if v is None else parse(v, s.base)
    op = OPERATION[kind]
    agg = Aggregates(op, args.n, norm1=num(args.norm1), cumulative=num(args.cumulative),
                     cumulative_abs=num(args.cumulative_abs), max_abs=num(args.max_abs),
                     nonnegative=_flag(args.nonnegative), in_system=_flag(args.in_system),
                     value=num(args.value), min_abs=num(args.min_abs))
    rep = evaluate(kind, s, args.n, agg, num(args.error))
    if out.json:
        out.record({"type": "bound", "system": str(s), "n": args.n, **rep.as_record()})
    else:
        out.line(out.num(rep.bound_value))
        for name, holds, detail in rep.hypotheses:
            if not holds:
                shown = detail if isinstance(detail, str) else format_scalar(detail)
                out.line(f"hypothesis fails: {name} {shown}".rstrip())
        if rep.variant:
            out.line(f"variant {rep.variant}")
        if rep.observed_error is not None:
            out.line(f"ratio {rep.ratio_text()}" + (", VIOLATED" if rep.violated else ""))
    return EXIT_FAIL if rep.violated else EXIT_OK


# ---------------------------------------------------------------------------
# witness
# ---------------------------------------------------------------------------

def _witness_system(args, name) -> FpSystem:
    if args.system:
        return parse_system(args.system)
    if args.mu is None:
        raise FperrError("give --system or --mu")
    return FpSystem(Kind.PERFECT, args.base, args.mu)


def cmd_witness(args, out: Out) -> int:
    name = args.name
    if name not in W.GENERATORS:
        raise FperrError(f"unknown witness {name!r}; known: {', '.join(W.GENERATORS)}")
    s = _witness_system(args, name)
    pol = TiePolicy.parse(args.policy)
    if name == "quadratic-growth":
        if args.m is None:
            raise FperrError("quadratic-growth needs --m")
        w = W.quadratic_growth(s, args.m, pol)
    else:
        if args.n is None:
            raise FperrError(f"{name} needs --n")
        if name == "max-cumulative":
            es = None if args.exponents is None else [int(e) for e in args.exponents.split(",")]
            w = W.max_cumulative(s, args.n, es, pol)
        elif name == "norm-one-sharp":
            w = W.norm_one_sharp(s, args.n, pol)
        else:
            w = W.GENERATORS[name](s, args.n, pol)
    t, ok = w.replay()
    status = "PASS" if ok else "FAIL"
    if out.json:
        out.record({"type": "witness", "name": w.name, "system": str(s), "policy": pol.value,
                    "inputs": [format_scalar(x) for x in w.inputs],
                    "predicted_result": format_scalar(w.predicted_result),
                    "predicted_error": format_scalar(w.predicted_error),
                    "result": format_scalar(t.result), "error": format_scalar(t.total_error),
                    "notes": w.constraint_notes,
                    "extra": {k: (format_scalar(v) if not isinstance(v, (list, int)) else v)
                              for k, v in w.extra.items()},
                    "replay": status})
    else:
        out.line("inputs " + ", ".join(out.num(x) for x in w.inputs))
        for note in w.constraint_notes:
            out.line(f"constraint {note}")
        if "stated_error" in w.extra:
            st = w.extra["stated_error"]
            out.line(f"closed form -(n^2+2n+3)/3 u = {out.num(st)} "
                     f"({'equal' if st == t.total_error else 'differs'} from the replayed error)")
        out.line(f"result {out.num(t.result)} error {out.num(t.total_error)}, replay: {status}")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# verify / sweep-report
# ---------------------------------------------------------------------------

def _seed(args, default=0):
    """--seed, then FPERR_SEED, then ``default``."""
    if args.seed is not None:
        return args.seed
    env = os.environ.get("FPERR_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise FperrError(f"FPERR_SEED must be an integer, got {env!r}") from None
    return default


def _summary_lines(records):
    rows = []
    for r in records:
        if r["type"] == "sweep":
            for kind, st in r["kinds"].items():
                if st["applicable"]:
                    rows.append((r["label"], kind, st["applicable"], st["violations"], st["max_ratio"] or "-"))
        else:
            rows.append((r.get("system", "-"), r["type"], "-", "ok" if r.get("passed", True) else "FAIL", "-"))
    lines = [f"{'config':<28} {'check':<26} {'applied':>8} {'viol.':>6}  max ratio"]
    for label, kind, app, viol, ratio in rows:
        lines.append(f"{label:<28} {kind:<26} {str(app):>8} {str(viol):>6}  {ratio}")
    return lines


def cmd_verify(args, out: Out) -> int:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = V.parse_config_text(fh.read(), _seed(args, None))
        if args.trials is not None:
            cfg = V.SweepConfig(**{**cfg.__dict__, "trials": args.trials})
        rep = V.sweep(cfg, args.workers)
        records = [rep.as_record()]
        if args.corpus:
            V.write_corpus(args.corpus, rep)
    else:
        trials = args.trials if args.trials is not None else 100_000
        progress = (lambda m: print(m, file=sys.stderr)) if args.progress else None
        records = V.run_suite(_seed(args), trials, args.workers, args.small, args.corpus, progress)
    ok = V.suite_passed(records)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for r in records:
                fh.write(V.dumps(r) + "\n")
    if out.json:
        for r in records:
            out.record(r)
    else:
        for line in _summary_lines(records):
            out.line(line)
        out.line("verify: " + ("PASS" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sweep_report(args, out: Out) -> int:
    records = []
    with open(args.path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise FperrError(f"{args.path}:{lineno}: {exc.msg}") from None
    for line in _summary_lines(records):
        out.line(line)
    ok = V.suite_passed(records)
    out.line("report: " + ("PASS" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--decimal", type=int, metavar="K",
                        help="append a K-digit decimal approximation to every number")
    common.add_argument("--json", action="store_true", help="line-delimited JSON records")

    p = _Parser(prog="fperr", description="Exact rounding-error analysis of floating point sums.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, helptext in (("round", "round rationals to nearest"),
                           ("sqrt-round", "round square roots to nearest")):
        c = sub.add_parser(name, parents=[common], help=helptext)
        c.add_argument("--system", required=True)
        c.add_argument("--policy", required=True, help="down, up or even")
        c.add_argument("values", nargs="+")
        c.set_defaults(func=cmd_round)

    c = sub.add_parser(SUM, parents=[common], help="rounded recursive sum")
    c.add_argument("--system", required=True)
    c.add_argument("--policy", required=True, help="one policy or a comma list, one per rounding")
    c.add_argument("--no-fuse-first", action="store_true",
                   help="round every addition, including 0 + x_0 and the first pair")
    c.add_argument("--all-bounds", action="store_true", help="also list bounds whose hypotheses fail")
    c.add_argument("values", nargs="+")
    c.set_defaults(func=cmd_accumulate)

    for name in (DOT, FMA_DOT):
        c = sub.add_parser(name, parents=[common], help=f"rounded {name} product")
        c.add_argument("--system", required=True)
        c.add_argument("--policy", required=True)
        if name == DOT:
            c.add_argument("--product-policy", help="policies of the product roundings (default: first --policy)")
        c.add_argument("--x", required=True, help="comma separated")
        c.add_argument("--y", required=True, help="comma separated")
        c.add_argument("--all-bounds", action="store_true")
        c.set_defaults(func=cmd_accumulate)

    c = sub.add_parser("bound", parents=[common], help="evaluate one bound")
    c.add_argument("kind")
    c.add_argument("--system", required=True)
    c.add_argument("--n", type=int, required=True)
    for flag in ("norm1", "cumulative", "cumulative-abs", "max-abs", "value", "min-abs", "error"):
        c.add_argument(f"--{flag}")
    c.add_argument("--nonnegative", help="yes or no")
    c.add_argument("--in-system", help="yes or no: whether every term lies in F")
    c.set_defaults(func=cmd_bound)

    c = sub.add_parser("witness", parents=[common], help="generate and replay a witness")
    c.add_argument("name", help=", ".join(W.GENERATORS))
    c.add_argument("--policy", required=True)
    c.add_argument("--system")
    c.add_argument("--mu", type=int, help="precision of a perfect system (instead of --system)")
    c.add_argument("--base", type=int, default=2, help="base used with --mu (default 2)")
    c.add_argument("--n", type=int)
    c.add_argument("--m", type=int)
    c.add_argument("--exponents", help="comma list e_1..e_n for max-cumulative")
    c.set_defaults(func=cmd_witness)

    c = sub.add_parser("verify", parents=[common], help="run the verification suite")
    c.add_argument("--seed", type=int, help="sweep seed (default: FPERR_SEED or 0)")
    c.add_argument("--trials", type=int, help="trials per configuration (default 100000)")
    c.add_argument("--config", help="key=value file describing a single sweep")
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--small", action="store_true", help="smaller exhaustive windows")
    c.add_argument("--out", help="write the machine-readable report here")
    c.add_argument("--corpus", help="directory receiving argmax inputs")
    c.add_argument("--progress", action="store_true")
    c.set_defaults(func=cmd_verify)

    c = sub.add_parser("sweep-report", parents=[common], help="summarize a verify report")
    c.add_argument("path")
    c.set_defaults(func=cmd_sweep_report)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Out(args)
    try:
        return args.func(args, out)
    except FperrError as exc:
        print(f"fperr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fperr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
