"""End-to-end tests of the command line: exit codes, files, reports."""

import json

import numpy as np
import pytest

from odeql.cli import main
from odeql.encoder import TaylorParams, build_matrix
from odeql.fileio import load_instance, load_matrix, load_vector, save_vector
from odeql.instances import GenSpec, generate


@pytest.fixture
def instance_dir(tmp_path):
    out = tmp_path / "inst"
    code = main(["gen", "--out", str(out), "--N", "3", "--kappa", "2",
                 "--b-mode", "random", "--seed", "5", "--unit-norm"])
    assert code == 0
    return out


def test_gen_writes_loadable_instance(instance_dir):
    inst = load_instance(instance_dir)
    assert inst.N == 3
    assert inst.kappa_V == pytest.approx(2.0, rel=1e-6)


def test_encode_round_trip_entrywise(instance_dir, tmp_path):
    out_matrix = tmp_path / "C.mtx"
    out_rhs = tmp_path / "rhs.txt"
    code = main(["encode", "--instance", str(instance_dir),
                 "--m", "2", "--k", "5", "--p", "2", "--h", "0.9",
                 "--out-matrix", str(out_matrix), "--out-rhs", str(out_rhs)])
    assert code == 0
    inst = load_instance(instance_dir)
    expected = build_matrix(inst.A, TaylorParams(m=2, k=5, p=2, h=0.9))
    written = load_matrix(out_matrix)
    assert (expected != written).nnz == 0
    rhs = load_vector(out_rhs)
    np.testing.assert_array_equal(rhs[:3], inst.x_in)


def test_encode_auto_selection(instance_dir, tmp_path):
    code = main(["encode", "--instance", str(instance_dir),
                 "--T", "1.5", "--epsilon", "1e-4",
                 "--out-matrix", str(tmp_path / "C.mtx"),
                 "--out-rhs", str(tmp_path / "rhs.txt")])
    assert code == 0
    C = load_matrix(tmp_path / "C.mtx")
    assert C.shape[0] % 3 == 0


def test_encode_from_raw_files(tmp_path):
    inst = generate(GenSpec(N=2, kappa_V=1.0, b_mode="random", seed=3,
                            unit_norm=True))
    from odeql.fileio import save_matrix
    save_matrix(tmp_path / "A.mtx", inst.A)
    save_vector(tmp_path / "x.txt", inst.x_in)
    save_vector(tmp_path / "b.txt", inst.b)
    code = main(["encode", "--matrix", str(tmp_path / "A.mtx"),
                 "--x-in", str(tmp_path / "x.txt"), "--b", str(tmp_path / "b.txt"),
                 "--m", "1", "--k", "5", "--p", "1", "--h", "0.5",
                 "--out-matrix", str(tmp_path / "C.mtx"),
                 "--out-rhs", str(tmp_path / "r.txt")])
    assert code == 0


def test_solve_reports_residual(instance_dir, tmp_path):
    report_path = tmp_path / "report.json"
    code = main(["solve", "--instance", str(instance_dir),
                 "--m", "2", "--k", "6", "--p", "2", "--h", "0.8",
                 "--history", "--block", "2,0",
                 "--out-dir", str(tmp_path / "sol"),
                 "--report", str(report_path)])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["residual"] <= 1e-12
    assert report["schema"] == 1
    assert report["command"].startswith("odeql solve")
    assert (tmp_path / "sol" / "step_0000.txt").exists()
    assert (tmp_path / "sol" / "block_2_0.txt").exists()
    # the step-0 file is exactly x_in
    inst = load_instance(instance_dir)
    np.testing.assert_array_equal(load_vector(tmp_path / "sol" / "step_0000.txt"),
                                  inst.x_in)


def test_step_bound_violation_exits_2(instance_dir, tmp_path):
    code = main(["encode", "--instance", str(instance_dir),
                 "--m", "1", "--k", "5", "--p", "1", "--h", "50.0",
                 "--out-matrix", str(tmp_path / "C.mtx"),
                 "--out-rhs", str(tmp_path / "rhs.txt")])
    assert code == 2


def test_verify_taylor_suite(tmp_path):
    report_path = tmp_path / "taylor.json"
    code = main(["verify", "--suite", "taylor", "--trials", "50",
                 "--seed", "7", "--report", str(report_path)])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["passed"]
    assert report["command"] == "odeql verify --suite taylor --trials 50 " \
                                "--seed 7 --report " + str(report_path)


def test_verify_appendix_b(tmp_path):
    code = main(["verify", "--suite", "appendixB", "--trials", "200",
                 "--seed", "1", "--report", str(tmp_path / "b.json")])
    assert code == 0


def test_run_with_inline_gen(tmp_path):
    report_path = tmp_path / "run.json"
    code = main(["run", "--gen", "N=3,kappa=2,b=random,seed=4", "--T", "1.2",
                 "--epsilon", "1e-4", "--seed", "9", "--inject-delta", "auto",
                 "--report", str(report_path)])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["success_prob"] > 0
    assert report["params"]["k"] >= 5
    assert report["success_conditioned_error"] <= 1e-4


def test_run_deterministic(tmp_path):
    args = ["run", "--gen", "N=2,kappa=1,seed=2", "--T", "1.0",
            "--epsilon", "1e-3", "--seed", "21"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--report", str(a)]) == 0
    assert main(args + ["--report", str(b)]) == 0
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    ra.pop("command"), rb.pop("command")
    assert ra == rb


def test_sweep_writes_csv(tmp_path):
    csv_path = tmp_path / "sweep.csv"
    code = main(["sweep", "--gen", "N=2,kappa=1,seed=3,b=random",
                 "--T", "1.0", "--epsilon", "1e-2,1e-4",
                 "--kappa", "1,3", "--seed", "5",
                 "--csv", str(csv_path), "--report", str(tmp_path / "s.json")])
    assert code == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0].startswith("kappa_V,T,epsilon,k,d,success_prob")
    assert len(lines) == 1 + 2 * 2  # header + kappa x epsilon grid


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "taylor", "--frobnicate"])
    assert exc.value.code == 2


def test_failing_suite_exits_1(monkeypatch, tmp_path):
    from odeql import cli as cli_module

    monkeypatch.setattr(cli_module.suites, "run_suite",
                        lambda *a, **k: {"passed": False, "suite": "stub"})
    code = main(["verify", "--suite", "taylor",
                 "--report", str(tmp_path / "r.json")])
    assert code == 1


def test_gen_sparse_mode(tmp_path):
    out = tmp_path / "sparse"
    code = main(["gen", "--out", str(out), "--N", "8", "--sparsity", "2",
                 "--seed", "3"])
    assert code == 0
    inst = load_instance(out)
    dense = inst.A.toarray()
    assert (dense != 0).sum(axis=1).max() <= 2
