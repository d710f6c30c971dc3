"""Golden-file and exit-code tests of the command line.

Regenerate the golden files with ``FPERR_REGEN=1 pytest tests/test_cli.py``
after checking the new output by hand.
"""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from fperr.cli import main

GOLDEN = Path(__file__).parent / "golden"

CASES = {
    "round": ["round", "--system", "perfect:b2:m3", "--policy", "down", "17/16"],
    "round_up_json": ["round", "--system", "ieee:b2:m3:e-6", "--policy", "up", "--json", "1/128", "-17/16"],
    "sqrt_round": ["sqrt-round", "--system", "perfect:b2:m3", "--policy", "down", "5/4"],
    "witness_norm_one": ["witness", "norm-one-sharp", "--n", "3", "--mu", "7", "--policy", "up"],
    "witness_quadratic": ["witness", "quadratic-growth", "--m", "2", "--mu", "7", "--policy", "down"],
    "witness_max_json": ["witness", "max-cumulative", "--n", "3", "--system", "perfect:b3:m4",
                         "--policy", "up", "--json"],
    "bound_norm_one": ["bound", "norm-one-sharp", "--system", "perfect:b2:m7", "--n", "2", "--norm1", "258/256"],
    "bound_signed_json": ["bound", "signed-unperfect-reduced", "--system", "ieee:b2:m8:e-12", "--n", "3",
                          "--cumulative-abs", "1/1000", "--error", "1/10000", "--json"],
    "sum": ["sum", "--system", "perfect:b2:m7", "--policy", "down", "--decimal", "6", "1", "1/256", "1/256"],
    "sum_no_fuse_json": ["sum", "--system", "mpfr:b2:m4:e-8", "--policy", "down,up,even", "--no-fuse-first",
                         "--json", "1", "1/32", "3/64"],
    "dot": ["dot", "--system", "perfect:b2:m7", "--policy", "down", "--x", "1,1,1", "--y", "1,1/256,1/256"],
    "fma_dot_json": ["fma-dot", "--system", "perfect:b2:m7", "--policy", "down", "--x", "1,1",
                     "--y", "1,1/65536", "--json"],
    "verify_config_json": ["verify", "--config", str(GOLDEN / "sweep.cfg"), "--json"],
}


def run(argv, env=None):
    e = dict(os.environ)
    e.pop("FPERR_SEED", None)
    e.update(env or {})
    return subprocess.run([sys.executable, "-m", "fperr", *argv], capture_output=True, text=True, env=e)


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_output(name):
    p = run(CASES[name])
    assert p.returncode == 0, p.stderr
    path = GOLDEN / f"{name}.txt"
    if os.environ.get("FPERR_REGEN"):
        path.write_text(p.stdout, encoding="utf-8")
    assert p.stdout == path.read_text(encoding="utf-8")


def test_documented_examples_in_process(capsys):
    assert main(["round", "--system", "perfect:b2:m3", "--policy", "down", "17/16"]) == 0
    assert capsys.readouterr().out == "1\n"
    assert main(["witness", "norm-one-sharp", "--n", "3", "--mu", "7", "--policy", "up"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "inputs 1, 1/256, 1/256, 1/256"
    assert out.splitlines()[-1] == "result 131/128 error 3/256, replay: PASS"
    assert main(["bound", "norm-one-sharp", "--system", "perfect:b2:m7", "--n", "2", "--norm1", "258/256"]) == 0
    assert capsys.readouterr().out == "1/128\n"


@pytest.mark.parametrize("argv", [
    ["round", "--system", "perfect:b2", "--policy", "down", "1"],
    ["round", "--system", "perfect:b2:m3", "--policy", "nearest", "1"],
    ["round", "--system", "perfect:b2:m3", "--policy", "down", "1/0"],
    ["round", "--system", "perfect:b2:m3", "1"],
    ["round", "--policy", "down", "1"],
    ["sqrt-round", "--system", "perfect:b2:m3", "--policy", "down", "-4"],
    ["bound", "norm-one-sharp", "--system", "perfect:b2:m7", "--n", "2"],
    ["witness", "nope", "--n", "2", "--mu", "7", "--policy", "down"],
    ["witness", "mixed-signs", "--n", "9", "--mu", "7", "--policy", "up"],
    ["sum", "--system", "perfect:b2:m7", "--policy", "down,up", "1", "2"],
    ["verify", "--trials", "0"],
    ["sweep-report", "/nonexistent/report.jsonl"],
])
def test_usage_errors_exit_2(argv):
    p = run(argv)
    assert p.returncode == 2
    assert p.stderr


def test_violated_bound_exits_1():
    p = run(["bound", "norm-one-sharp", "--system", "perfect:b2:m7", "--n", "2", "--norm1", "1",
             "--error", "1/10"])
    assert p.returncode == 1
    assert "VIOLATED" in p.stdout


def test_failing_report_exits_1(tmp_path):
    bad = tmp_path / "r.jsonl"
    bad.write_text(json.dumps({"type": "sweep", "label": "x", "violations": 1, "kinds": {}}) + "\n")
    p = run(["sweep-report", str(bad)])
    assert p.returncode == 1 and "report: FAIL" in p.stdout


def test_verify_out_corpus_and_seed_env(tmp_path):
    cfg = GOLDEN / "sweep.cfg"
    out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    p = run(["verify", "--config", str(cfg), "--out", str(out1), "--corpus", str(tmp_path / "c")],
            env={"FPERR_SEED": "99"})
    assert p.returncode == 0, p.stderr
    rec = json.loads(out1.read_text().splitlines()[0])
    assert rec["config"]["seed"] == 99
    assert (tmp_path / "c" / "argmax.jsonl").exists()
    run(["verify", "--config", str(cfg), "--seed", "99", "--out", str(out2)], env={"FPERR_SEED": "1"})
    assert out1.read_bytes() == out2.read_bytes()
    p = run(["sweep-report", str(out1)])
    assert p.returncode == 0 and p.stdout.rstrip().endswith("report: PASS")


def test_console_script_help():
    p = run(["--help"])
    assert p.returncode == 0
    for cmd in ("round", "sqrt-round", "sum", "dot", "fma-dot", "bound", "witness", "verify", "sweep-report"):
        assert cmd in p.stdout
