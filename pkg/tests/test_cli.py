import json
import subprocess
import sys

import numpy as np
import pytest

from covseed.cli import main


def write_doc(tmp_path, doc, name="in.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run_main(tmp_path, doc, *args, capsys=None):
    path = write_doc(tmp_path, doc)
    code = main(["run", path, *args])
    out = capsys.readouterr().out if capsys else None
    return code, out


def decode_matrix(entries):
    return np.array([[complex(e[0], e[1]) for e in row] for row in entries])


SPIN1_DOC = {
    "version": "1",
    "scenario": {"builder": "spin_j", "params": {"j": 1}},
    "rho": [[0.5, 0, 0], [0, 0.3, 0], [0, 0, 0.2]],
    "tasks": [{"task": "decompose"}, {"task": "optimize"},
              {"task": "check-seed"}, {"task": "extremal"},
              {"task": "rank-bounds"}],
}


def test_report_is_deterministic(tmp_path, capsys):
    code1, out1 = run_main(tmp_path, SPIN1_DOC, capsys=capsys)
    code2, out2 = run_main(tmp_path, SPIN1_DOC, capsys=capsys)
    assert code1 == code2 == 0
    assert out1 == out2  # byte-identical reports
    report = json.loads(out1)
    assert report["file_version"] == "1"
    assert [r["task"] for r in report["results"]] == [
        "decompose", "optimize", "check-seed", "extremal", "rank-bounds"]


def test_optimize_threads_into_later_tasks(tmp_path, capsys):
    code, out = run_main(tmp_path, SPIN1_DOC, capsys=capsys)
    assert code == 0
    report = json.loads(out)
    dec, opt, chk, ext, rb = report["results"]

    assert sorted((c["dim_irrep"], c["multiplicity"])
                  for c in dec["rep_classes"]) == [(3, 1)]
    assert dec["rep_check_violation"] < 1e-8
    assert dec["stabilizer_check_violation"] < 1e-8

    assert abs(opt["value"] - 1.5) < 1e-6
    assert opt["converged"] and opt["unique"] and opt["certified_optimal"]
    assert abs(opt["stability_alpha_max"] - 0.625) < 1e-9
    xi = decode_matrix(opt["seed_matrix"])
    assert np.max(np.abs(xi - np.diag([3.0, 0.0, 0.0]))) < 1e-6

    # the optimized seed is what the later tasks checked
    assert chk["valid"] is True
    assert ext["extremal"] is True
    assert rb["support_rank"] == 1
    assert rb["lower_bound"] == 1 and rb["budget_ok"] is True


def test_json_matrices_reparse_exactly(tmp_path, capsys):
    code, out = run_main(tmp_path, SPIN1_DOC, capsys=capsys)
    report = json.loads(out)
    xi_first = decode_matrix(report["results"][1]["seed_matrix"])

    doc = dict(SPIN1_DOC)
    doc["seed"] = report["results"][1]["seed_matrix"]
    doc["tasks"] = [{"task": "optimize"}]
    code, out = run_main(tmp_path, doc, capsys=capsys)
    assert code == 0
    xi_second = decode_matrix(json.loads(out)["results"][0]["seed_matrix"])
    # restarting from the emitted matrix must not move the optimum
    assert np.max(np.abs(xi_second - xi_first)) < 1e-9


def test_md_format(tmp_path, capsys):
    code, out = run_main(tmp_path, SPIN1_DOC, "--format", "md", capsys=capsys)
    assert code == 0
    assert out.startswith("# seed analysis report")
    assert "## task 2: optimize" in out
    assert "- value: 1.5" in out
    # six significant digits in matrix entries
    assert "0.625" in out


def test_out_file(tmp_path, capsys):
    path = write_doc(tmp_path, SPIN1_DOC)
    dest = tmp_path / "report.json"
    code = main(["run", path, "--out", str(dest)])
    assert code == 0
    assert capsys.readouterr().out == ""
    assert json.loads(dest.read_text())["results"]


def test_console_entry_point(tmp_path):
    path = write_doc(tmp_path, {"version": "1",
                                "scenario": {"builder": "u1_phase",
                                             "params": {"d": 2}},
                                "tasks": [{"task": "decompose"}]})
    proc = subprocess.run([sys.executable, "-m", "covseed.cli", "run", path],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["scenario"]["dim"] == 2


@pytest.mark.parametrize("mangle", [
    lambda d: d.pop("version"),
    lambda d: d.pop("tasks"),
    lambda d: d.update(tasks=[]),
    lambda d: d.update(tasks=[{"task": "frobnicate"}]),
    lambda d: d.update(scenario={"builder": "nope", "params": {}}),
    lambda d: d.update(rho=[[1, 0], [0, 0]]),          # dim mismatch
    lambda d: d.update(seed=[[1, "x"], [0, 1]]),       # bad entry
])
def test_validation_exit_code(tmp_path, capsys, mangle):
    doc = json.loads(json.dumps(SPIN1_DOC))
    mangle(doc)
    path = write_doc(tmp_path, doc)
    code = main(["run", path])
    err = capsys.readouterr().err
    assert code == 2
    assert err.startswith("error: ")


def test_validation_messages_carry_paths(tmp_path, capsys):
    doc = {"version": "1",
           "scenario": {"builder": "spin_j", "params": {"j": 1}},
           "tasks": [{"task": "check-seed"}]}  # no seed anywhere
    path = write_doc(tmp_path, doc)
    assert main(["run", path]) == 2
    err = capsys.readouterr().err
    assert "seed" in err

    assert main(["run", str(tmp_path / "absent.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "JSON" in err


def test_weight_vocabulary_validation(tmp_path, capsys):
    # identity_indicator needs a finite model
    doc = {"version": "1",
           "scenario": {"builder": "spin_j", "params": {"j": 1}},
           "rho": [[1, 0, 0], [0, 0, 0], [0, 0, 0]],
           "seed": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
           "tasks": [{"task": "merit", "weight": {"type": "identity_indicator"}}]}
    assert main(["run", write_doc(tmp_path, doc)]) == 2
    assert "identity_indicator" in capsys.readouterr().err

    # cosine needs a one-parameter model
    doc["tasks"] = [{"task": "merit",
                     "weight": {"type": "cosine", "coefficients": [1, 0.5]}}]
    assert main(["run", write_doc(tmp_path, doc)]) == 2
    assert "cosine" in capsys.readouterr().err

    # merit requires a weight
    doc["tasks"] = [{"task": "merit"}]
    assert main(["run", write_doc(tmp_path, doc)]) == 2


def test_weighted_merit_and_optimize(tmp_path, capsys):
    doc = {"version": "1",
           "scenario": {"builder": "cyclic", "params": {"n": 3,
                                                        "charges": [0, 1, 2]}},
           "rho": [[0.5, 0, 0], [0, 0.5, 0], [0, 0, 0]],
           "seed": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
           "tasks": [{"task": "merit", "weight": {"type": "identity_indicator"}},
                     {"task": "optimize", "weight": {"type": "uniform"}}]}
    code, out = run_main(tmp_path, doc, capsys=capsys)
    assert code == 0
    merit, opt = json.loads(out)["results"]
    # point mass at identity: merit = (1/3) * Tr[rho * I] = 1/3
    assert abs(merit["normalization"] - 1.0 / 3.0) < 1e-12
    assert abs(merit["value"] - 1.0 / 3.0) < 1e-12
    assert opt["converged"]
    assert abs(opt["merit_value"] - opt["value"]) < 1e-12  # k = 1 for uniform


def test_split_task_auto_perturbation(tmp_path, capsys):
    doc = {"version": "1",
           "scenario": {"builder": "u1_phase", "params": {"d": 2}},
           "seed": [[1, 0], [0, 1]],
           "tasks": [{"task": "split"}]}
    code, out = run_main(tmp_path, doc, capsys=capsys)
    assert code == 0
    res = json.loads(out)["results"][0]
    assert abs(res["weight"] - 0.5) < 1e-9
    plus = decode_matrix(res["plus"])
    minus = decode_matrix(res["minus"])
    recomb = res["weight"] * plus + (1 - res["weight"]) * minus
    assert np.max(np.abs(recomb - np.eye(2))) < 1e-9

    # an extremal seed has no admissible direction to split along
    doc["seed"] = [[1, [0.6, 0.8]], [[0.6, -0.8], 1]]
    assert main(["run", write_doc(tmp_path, doc)]) == 2
    assert "perturbation" in capsys.readouterr().err


def test_nonconvergence_exit_code(tmp_path, capsys):
    doc = {"version": "1",
           "scenario": {"builder": "su_d_tensor2", "params": {"d": 3}},
           "rho": None,
           "tasks": [{"task": "optimize"}]}
    rho = np.zeros((9, 9))
    rho[0, 0] = 0.6
    rho[4, 4] = 0.4
    doc["rho"] = rho.tolist()
    path = write_doc(tmp_path, doc)
    code = main(["run", path, "--max-iter", "1"])
    assert code == 3


def test_inline_model_scenario(tmp_path, capsys):
    doc = {"version": "1",
           "scenario": {"name": "two charges",
                        "rep": {"kind": "one_parameter",
                                "generator": [[0, 0], [0, 1]]},
                        "stabilizer": {"kind": "trivial", "dim": 2}},
           "seed": [[1, [0, 0.5]], [[0, -0.5], 1]],
           "tasks": [{"task": "check-seed"}, {"task": "extremal"}]}
    code, out = run_main(tmp_path, doc, capsys=capsys)
    assert code == 0
    report = json.loads(out)
    assert report["scenario"]["name"] == "two charges"
    chk, ext = report["results"]
    assert chk["valid"] is True
    assert ext["extremal"] is False  # interior point of the disk
