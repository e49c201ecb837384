"""Command-line surface: subcommands, file formats, exit codes."""

import json
import subprocess
import sys

import numpy as np
import numpy.testing as npt
import pytest
import scipy.linalg

from gepsolve import SyntheticSpec, gen_synthetic
from gepsolve.cli import main
from gepsolve.linalg import read_dense_text, read_matrix_market
from gepsolve.solvers import TRACE_HEADER


def gen_files(tmp_path, n=10, kappa_b=10.0, seed=0, fmt="mm"):
    prefix = str(tmp_path / "pair")
    rc = main(["gen", "--n", str(n), "--kappa-b", str(kappa_b),
               "--seed", str(seed), "--out", prefix, "--format", fmt])
    assert rc == 0
    ext = "mtx" if fmt == "mm" else "txt"
    return f"{prefix}_A.{ext}", f"{prefix}_B.{ext}"


def test_gen_round_trips_through_matrix_market(tmp_path, capsys):
    a_path, b_path = gen_files(tmp_path, n=8, kappa_b=10.0, seed=3)
    out = capsys.readouterr().out
    assert "wrote" in out
    direct = gen_synthetic(SyntheticSpec(n=8, kappa_b=10.0, seed=3))
    assert read_matrix_market(a_path).fingerprint() == direct.a.fingerprint()
    assert read_matrix_market(b_path).fingerprint() == direct.b.fingerprint()


def test_gen_dense_format(tmp_path):
    a_path, b_path = gen_files(tmp_path, n=6, kappa_b=5.0, seed=1, fmt="dense")
    direct = gen_synthetic(SyntheticSpec(n=6, kappa_b=5.0, seed=1))
    npt.assert_array_equal(read_dense_text(a_path).dense(), direct.a.dense())
    npt.assert_array_equal(read_dense_text(b_path).dense(), direct.b.dense())


def test_gen_invalid_order_exit_three(tmp_path, capsys):
    rc = main(["gen", "--n", "1", "--kappa-b", "5", "--out",
               str(tmp_path / "x")])
    assert rc == 3
    assert "error:" in capsys.readouterr().err


def test_solve_converged_exit_zero_and_trace(tmp_path, capsys):
    a_path, b_path = gen_files(tmp_path)
    trace_path = tmp_path / "trace.csv"
    rc = main(["solve", "--a", a_path, "--b", b_path, "--method", "split-merge",
               "--trace", str(trace_path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "status      converged" in out
    assert "lambda" in out and "reference" in out
    lines = open(trace_path, encoding="ascii").read().splitlines()
    assert lines[0] == TRACE_HEADER
    assert len(lines) >= 2


def test_solve_every_method_runs(tmp_path):
    a_path, b_path = gen_files(tmp_path, n=12, kappa_b=5.0, seed=4)
    for method in ("gd", "pmd", "power", "split-merge", "lanczos"):
        rc = main(["solve", "--a", a_path, "--b", b_path, "--method", method,
                   "--tol", "1e-4"])
        assert rc == 0, method


def test_solve_reference_free_mode(tmp_path, capsys):
    a_path, b_path = gen_files(tmp_path)
    rc = main(["solve", "--a", a_path, "--b", b_path, "--ref", "none"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "criterion   gradient" in out
    assert "reference   " not in out


def test_solve_iteration_cap_exit_two(tmp_path, capsys):
    a_path, b_path = gen_files(tmp_path, n=16, kappa_b=50.0, seed=5)
    rc = main(["solve", "--a", a_path, "--b", b_path, "--method", "power",
               "--max-iters", "1"])
    assert rc == 2
    assert "status      max-iterations" in capsys.readouterr().out


def test_solve_missing_file_exit_three(tmp_path, capsys):
    rc = main(["solve", "--a", str(tmp_path / "no_A.mtx"),
               "--b", str(tmp_path / "no_B.mtx")])
    assert rc == 3
    assert "error:" in capsys.readouterr().err


def test_solve_corrupt_file_exit_three(tmp_path, capsys):
    bad = tmp_path / "bad.mtx"
    bad.write_text("%%MatrixMarket matrix coordinate real symmetric\n2 2\n",
                   encoding="ascii")
    rc = main(["solve", "--a", str(bad), "--b", str(bad)])
    assert rc == 3
    assert "error:" in capsys.readouterr().err


def test_solve_indefinite_metric_exit_four(tmp_path, capsys):
    a_path, _ = gen_files(tmp_path, n=6, kappa_b=5.0, seed=6, fmt="dense")
    bad_b = tmp_path / "indefinite_B.txt"
    rows = np.diag([1.0, 1.0, 1.0, 1.0, 1.0, -2.0])
    lines = ["6"]
    for i in range(6):
        for j in range(i + 1):
            lines.append(repr(float(rows[i, j])))
    bad_b.write_text("\n".join(lines) + "\n", encoding="ascii")
    rc = main(["solve", "--a", a_path, "--b", str(bad_b), "--format", "dense"])
    assert rc == 4
    assert "error:" in capsys.readouterr().err


def test_topk_json_output(tmp_path, capsys):
    a_path, b_path = gen_files(tmp_path, n=10, kappa_b=8.0, seed=7)
    out_path = tmp_path / "pairs.json"
    rc = main(["topk", "--a", a_path, "--b", b_path, "--k", "3",
               "--tol", "1e-7", "--out", str(out_path)])
    stdout = capsys.readouterr().out
    assert rc == 0
    assert "lambda_1" in stdout and "lambda_3" in stdout
    payload = json.loads(out_path.read_text(encoding="ascii"))
    assert len(payload["lambdas"]) == 3
    assert len(payload["vectors"]) == 3
    assert len(payload["vectors"][0]) == 10
    pair = gen_synthetic(SyntheticSpec(n=10, kappa_b=8.0, seed=7))
    vals = scipy.linalg.eigh(pair.a.dense(), pair.b.dense(), eigvals_only=True)
    npt.assert_allclose(payload["lambdas"], vals[::-1][:3], rtol=0,
                        atol=1e-5 * float(vals[-1]))
    assert payload["lambdas"] == sorted(payload["lambdas"], reverse=True)


def test_topk_k_out_of_range_exit_three(tmp_path, capsys):
    a_path, b_path = gen_files(tmp_path, n=6, kappa_b=5.0, seed=8)
    rc = main(["topk", "--a", a_path, "--b", b_path, "--k", "99"])
    assert rc == 3
    assert "error:" in capsys.readouterr().err


def test_bench_custom_suite(tmp_path, capsys):
    suite = {"cells": [{"n": 8, "kappa_b": 5.0}], "methods": ["power"],
             "trials": 2, "seed": 1}
    suite_path = tmp_path / "suite.json"
    suite_path.write_text(json.dumps(suite), encoding="ascii")
    out_dir = tmp_path / "report"
    rc = main(["bench", "--suite", str(suite_path), "--out", str(out_dir)])
    assert rc == 0
    assert "wrote" in capsys.readouterr().out
    report = json.loads((out_dir / "report.json").read_text(encoding="ascii"))
    assert report["schema_version"] == 1
    assert len(report["cells"]) == 1
    assert (out_dir / "report.csv").exists()


def test_bench_trace_bundling(tmp_path):
    suite = {"cells": [{"n": 8, "kappa_b": 5.0}], "methods": ["power"],
             "trials": 1, "seed": 1}
    suite_path = tmp_path / "suite.json"
    suite_path.write_text(json.dumps(suite), encoding="ascii")
    out_dir = tmp_path / "report"
    rc = main(["bench", "--suite", str(suite_path), "--out", str(out_dir),
               "--traces"])
    assert rc == 0
    trace = out_dir / "n8_kb5" / "power_t0.csv"
    assert trace.exists()


def test_bench_malformed_suite_exit_three(tmp_path, capsys):
    suite_path = tmp_path / "suite.json"
    suite_path.write_text("{broken", encoding="ascii")
    rc = main(["bench", "--suite", str(suite_path), "--out",
               str(tmp_path / "report")])
    assert rc == 3
    assert "error:" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    prefix = str(tmp_path / "pair")
    proc = subprocess.run(
        [sys.executable, "-m", "gepsolve", "gen", "--n", "4", "--kappa-b", "5",
         "--out", prefix],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "wrote" in proc.stdout
