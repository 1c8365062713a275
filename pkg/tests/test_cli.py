"""
End-to-end tests of the command line: reports on stdout, exit codes, CSV output.
"""

import json

import pandas as pd
import pytest

from src.cli import EXIT_INVALID, EXIT_NUMERIC, EXIT_PASS, EXIT_VIOLATED, build_parser, main, phi_sweep
from src.errors import InvalidInputError

Z2_FAST = ["--lambda-grid", "12", "--grid-spec", "grid:radial=5,angular=8", "--no-refine"]


def run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr()


def test_validate_sample(capsys, sample_dir):
    code, out = run(capsys, ["validate", str(sample_dir / "e1.json"), "--seed", "3"])
    assert code == EXIT_PASS
    document = json.loads(out.out)
    assert document["kind"] == "operator_class"
    assert document["seed"] == 3
    assert document["payload"]["markovian"] is True


def test_validate_reports_witness(capsys, sample_dir):
    code, out = run(capsys, ["validate", str(sample_dir / "row_sum_1_1.json"), "--seed", "0"])
    assert code == EXIT_PASS
    witness = json.loads(out.out)["payload"]["witnesses"]["linf_contraction"]
    assert witness["index"] == [0]


def test_truncated_operator_file(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"weights": [0.5, 0.5], "matrix": [[', encoding="utf-8")
    code, out = run(capsys, ["validate", str(path)])
    assert code == EXIT_INVALID
    assert out.out == ""
    assert "malformed JSON" in out.err


def test_report_failing_its_schema_is_a_numeric_failure(capsys, sample_dir, monkeypatch):
    class Incomplete:
        def to_dict(self):
            return {"symmetric": True}

    monkeypatch.setattr("src.cli.classify", lambda T, tol: Incomplete())
    code, out = run(capsys, ["validate", str(sample_dir / "e1.json")])
    assert code == EXIT_NUMERIC
    assert out.out == ""
    assert "operator_class does not match its schema" in out.err


def test_bad_flags_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["check-z2", "--lambda-grid", "many"])
    assert info.value.code == 2


def test_seed_default_is_per_command():
    parser = build_parser()
    assert parser.parse_args(["verify"]).seed == 0
    assert parser.parse_args(["validate", "op.json"]).seed is None


def test_disintegrate_needs_flag_for_noncontractive(capsys, sample_dir):
    argv = ["disintegrate", "--operator", str(sample_dir / "row_sum_1_1.json"), "--seed", "0"]
    code, _ = run(capsys, argv)
    assert code == EXIT_INVALID
    code, out = run(capsys, argv + ["--allow-noncontractive"])
    assert code == EXIT_PASS
    payload = json.loads(out.out)["payload"]
    assert payload["warnings"] and payload["residual"] <= 1e-12


def test_disintegrate_markov_chain(capsys, sample_dir):
    code, out = run(capsys, ["disintegrate", "--operator", str(sample_dir / "markov_chain.json"),
                             "--mode", "markovian", "--seed", "0"])
    assert code == EXIT_PASS
    payload = json.loads(out.out)["payload"]
    assert payload["diagonal"] == [0.0, 0.0, 0.0]
    assert all(pair["phase"] == [1.0, 0.0] for pair in payload["pairs"])


def test_modulus(capsys, sample_dir):
    code, out = run(capsys, ["modulus", "--operator", str(sample_dir / "general.json"), "--seed", "1"])
    assert code == EXIT_PASS
    document = json.loads(out.out)
    assert document["payload"]["oracle"]["ok"] is True
    assert document["tolerances"]["oracle"] == 1e-12 and "verdict" in document["tolerances"]


def test_check_z2_verdicts(capsys):
    code, out = run(capsys, ["check-z2", "--p", "3", "--phi", "1.0", "--zero-operator", "--seed", "0"] + Z2_FAST)
    assert code == EXIT_PASS
    document = json.loads(out.out)
    assert document["payload"]["verdict"] == "pass"
    assert document["payload"]["checks"][0]["sampler"]["radial"] == 5
    code, out = run(capsys, ["check-z2", "--p", "3", "--phi", "1.6", "--sign", "plus", "--seed", "0"] + Z2_FAST)
    assert code == EXIT_VIOLATED
    check = json.loads(out.out)["payload"]["checks"][0]
    assert check["verdict"] == "violated" and check["note"]


def test_check_z2_custom_family(capsys):
    code, _ = run(capsys, ["check-z2", "--family", "custom", "--d", "1", "--pairs", "x1:conj(x1)",
                           "--seed", "0"] + Z2_FAST)
    assert code == EXIT_PASS
    code, out = run(capsys, ["check-z2", "--family", "custom", "--d", "1", "--pairs", "x1:conj(x2)"] + Z2_FAST)
    assert code == EXIT_INVALID
    assert "position" in out.err


def test_check_z2_singular_family_is_numeric_failure(capsys):
    code, _ = run(capsys, ["check-z2", "--family", "custom", "--d", "1", "--pairs", "x1:1/(x1-x1)"] + Z2_FAST)
    assert code == EXIT_NUMERIC


def test_check_form_with_functions(capsys, sample_dir):
    code, out = run(capsys, ["check-form", "--operator", str(sample_dir / "general.json"), "--p", "3",
                             "--functions", str(sample_dir / "general_functions.json"),
                             "--samples", "20", "--seed", "1"])
    assert code == EXIT_PASS
    payload = json.loads(out.out)["payload"]
    assert len(payload["checks"]) == 2
    assert len(payload["crosscheck"]) == 4
    assert all(c["ok"] for c in payload["crosscheck"])


def test_check_form_markovian_crosscheck(capsys, sample_dir):
    code, out = run(capsys, ["check-form", "--operator", str(sample_dir / "markov_chain.json"), "--p", "3",
                             "--mode", "markovian", "--samples", "20", "--seed", "1"])
    assert code == EXIT_PASS
    crosschecks = json.loads(out.out)["payload"]["crosscheck"]
    assert crosschecks and all(c["mode"] == "markovian" and c["ok"] for c in crosschecks)
    code, _ = run(capsys, ["check-form", "--operator", str(sample_dir / "general.json"), "--p", "3",
                           "--mode", "markovian", "--samples", "5", "--seed", "1"])
    assert code == EXIT_INVALID


def test_semigroup(capsys, sample_dir):
    code, out = run(capsys, ["semigroup", "--operator", str(sample_dir / "e1.json"), "--t", "0.5",
                             "--check", "resolvent,generator,contraction,law,spectral", "--seed", "2"])
    assert code == EXIT_PASS
    checks = json.loads(out.out)["payload"]["checks"]
    assert set(checks) == {"resolvent", "generator", "contraction", "law", "spectral"}
    code, _ = run(capsys, ["semigroup", "--operator", str(sample_dir / "e1.json"), "--check", "heat"])
    assert code == EXIT_INVALID


def test_angle_with_csv(capsys, tmp_path):
    csv = tmp_path / "angle.csv"
    code, out = run(capsys, ["angle", "--p", "4", "--csv", str(csv), "--phi-step", "0.1", "--seed", "0"])
    assert code == EXIT_PASS
    assert json.loads(out.out)["payload"]["gap"] <= 1e-3
    frame = pd.read_csv(csv)
    assert list(frame.columns) == ["p", "phi", "min_normalized_value"]
    assert len(frame) == 16


def test_report_csv(capsys, tmp_path):
    out_path = tmp_path / "sweep.csv"
    code, _ = run(capsys, ["report-csv", "--p", "3", "--phi-min", "1.0", "--phi-max", "1.1", "--step", "0.05",
                           "--lambda-grid", "12", "--grid-spec", "grid:radial=5,angular=8", "--out", str(out_path)])
    assert code == EXIT_PASS
    frame = pd.read_csv(out_path)
    assert list(frame.columns) == ["phi", "min_value"]
    assert frame["phi"].tolist() == pytest.approx([1.0, 1.05, 1.1])


def test_report_csv_empty_range(capsys):
    code, _ = run(capsys, ["report-csv", "--p", "3", "--phi-min", "1.2", "--phi-max", "1.0"])
    assert code == EXIT_INVALID


def test_phi_sweep():
    assert phi_sweep(0.0, 0.3, 0.1).tolist() == pytest.approx([0.0, 0.1, 0.2, 0.3])
    with pytest.raises(InvalidInputError):
        phi_sweep(0.0, 1.0, 0.0)


def test_verify_single_suite(capsys, tmp_path):
    out_path = tmp_path / "verify.json"
    code, out = run(capsys, ["verify", "--suite", "norm_axioms", "--out", str(out_path)])
    assert code == EXIT_PASS
    document = json.loads(out_path.read_text(encoding="utf-8"))
    assert document["payload"]["master_seed"] == 0
    assert [s["name"] for s in document["payload"]["suites"]] == ["norm_axioms"]
    assert "Lp norm axioms" in out.err
