import argparse
import json
import logging

import numpy as np
import pytest

from cli.commands import EXIT_FAILED, EXIT_INPUT, EXIT_OK, build_parser, run
from cli.config import TOL_ENV_VAR, RunConfig
from cli.report import ReportLogHandler, emit_report, encode
from core.check_report import CheckReport
from core.errors import InputError
from core.shifts import ShiftClass


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv(TOL_ENV_VAR, raising=False)


def run_json(capsys, *argv):
    code = run(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_dilate_two_atom(capsys, samples_dir):
    code, doc = run_json(capsys, "dilate", str(samples_dir / "two_atom.json"))
    assert code == EXIT_OK
    assert doc["kdim"] == 2
    assert doc["passed"] is True
    assert doc["command"] == "dilate"
    assert set(doc["checks"]) >= {"reconstruction", "projection", "minimality", "norm_eq", "injectivity"}
    assert doc["config"]["seed"] == 0
    assert doc["config"]["alpha_spec"] == "dyadic"


def test_report_keys_are_sorted(capsys, samples_dir):
    run(["dilate", str(samples_dir / "two_atom.json")])
    text = capsys.readouterr().out
    doc = json.loads(text)
    assert list(doc) == sorted(doc)


def test_diagonalize_and_verify(capsys, samples_dir):
    code, doc = run_json(capsys, "diagonalize", str(samples_dir / "trine.json"))
    assert code == EXIT_OK
    assert [atom["n"] for atom in doc["atoms"]] == [1, 1, 1]
    assert doc["kdim"] == 3

    code, doc = run_json(capsys, "verify", str(samples_dir / "trine.json"))
    assert code == EXIT_OK
    assert doc["spectral"] is False
    assert set(doc["reports"]) == {"dilation", "direct_integral", "traceclass", "spectral_detection"}


def test_spectral_detect(capsys, samples_dir):
    code, doc = run_json(capsys, "spectral-detect", str(samples_dir / "spectral.json"))
    assert code == EXIT_OK
    assert doc["spectral"] is True

    code, doc = run_json(capsys, "spectral-detect", str(samples_dir / "two_atom.json"))
    assert code == EXIT_OK
    assert doc["spectral"] is False


def test_non_positive_atom_rejected(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dim": 1, "atoms": [{"label": "neg", "form": {"dim": 1, "entries": [[-0.1]]}}]}))
    code, doc = run_json(capsys, "dilate", str(path))
    assert code == EXIT_INPUT
    assert doc["passed"] is False
    assert doc["error"]["type"] == "ContractViolation"
    assert "'neg'" in doc["error"]["message"]
    assert "-0.1" in doc["error"]["message"]


def test_no_validate_defers_to_construction(capsys, tmp_path):
    path = tmp_path / "indefinite.json"
    path.write_text(json.dumps({"dim": 2, "atoms": [{"form": {"dim": 2, "entries": [[1, 2], [2, 1]]}}]}))
    code, doc = run_json(capsys, "dilate", "--no-validate", str(path))
    assert code == EXIT_INPUT
    assert doc["error"]["type"] == "ContractViolation"
    assert doc["config"]["validate"] is False


def test_malformed_json_position(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"dim": 1,\n  "atoms": [\n')
    code, doc = run_json(capsys, "dilate", str(path))
    assert code == EXIT_INPUT
    assert doc["error"]["type"] == "InputError"
    assert doc["error"]["position"].startswith("line ")


def test_shift_classify(capsys):
    code, doc = run_json(capsys, "shift", "classify", "--weights", "1,1,1")
    assert code == EXIT_OK
    assert doc["classification"] == "Spectral"
    assert doc["command"] == "shift classify"

    code, doc = run_json(capsys, "shift", "classify", "--weights", "1.5")
    assert doc["classification"] == "NotPositive"


def test_shift_minor_arc_and_moment(capsys):
    code, doc = run_json(capsys, "shift", "minor", "--weights", "0.6,0.8", "--indices", "-1,0,1")
    assert code == EXIT_OK
    assert float(doc["formula"]) == pytest.approx(0.2304)

    code, doc = run_json(capsys, "shift", "arc", "--weights", "0.9,0.9", "--t0", "0", "--t1", "1.5")
    assert code == EXIT_OK
    assert doc["report"]["checks"]["positive"] is True

    code, doc = run_json(capsys, "shift", "moment", "--weights", "0.9", "--window", "2", "--k", "2")
    assert code == EXIT_OK
    assert float(doc["form"][0][2][0]) == pytest.approx(0.81)


def test_shift_bad_weights(capsys):
    code, doc = run_json(capsys, "shift", "classify", "--weights", "1,oops")
    assert code == EXIT_INPUT
    assert doc["error"]["position"] == 1


def test_normal_expand(capsys, samples_dir):
    code, doc = run_json(capsys, "normal", "expand", str(samples_dir / "normal.json"))
    assert code == EXIT_OK
    points = [complex(float(re), float(im)) for re, im in doc["points"]]
    np.testing.assert_allclose(sorted(points, key=lambda z: (z.real, z.imag)), [-1j, 1j, 2], atol=1e-12)
    assert doc["multiplicities"] == [1, 1, 1]


def test_shift_eigen(capsys):
    code, doc = run_json(capsys, "shift-eigen", "--lambda", "1", "--window", "3")
    assert code == EXIT_OK
    assert doc["simultaneous"] is True
    assert [float(re) for re, _ in doc["coefficients"]] == [1.0] * 7

    code, doc = run_json(capsys, "shift-eigen", "--lambda", "0")
    assert code == EXIT_OK
    assert doc["solution"] is None


def test_haar(capsys):
    code, doc = run_json(capsys, "haar", "--window", "8", "--grid", "64")
    assert code == EXIT_OK
    code, doc = run_json(capsys, "haar", "--window", "8", "--grid", "16")
    assert code == EXIT_INPUT
    assert doc["error"]["type"] == "AliasingError"


def test_cex_commands(capsys):
    code, doc = run_json(capsys, "cex", "spectrum", "--a", "geom:8,2", "--sizes", "64")
    assert code == EXIT_OK
    assert float(doc["max_abs_eig"]["64"]) < 0.707

    code, doc = run_json(capsys, "cex", "eigencheck", "--size", "25")
    assert code == EXIT_OK
    assert doc["complete_rows_checked"] == [0, 1]

    code, doc = run_json(capsys, "cex", "build", "--size", "25")
    assert code == EXIT_OK
    assert float(doc["partial_square_sum"]) == 0.345703125
    assert doc["b_values"] == ["1/8", "7/128"]


def test_cex_slow_growth_fails_with_warning(capsys):
    code, doc = run_json(capsys, "cex", "build", "--a", "geom:2,2", "--size", "40")
    assert code == EXIT_FAILED
    assert doc["passed"] is False
    assert any("not below one" in warning for warning in doc["warnings"])


def test_suite(capsys):
    code, doc = run_json(capsys, "suite", "--cases", "2", "--seed", "7")
    assert code == EXIT_OK
    assert doc["seed"] == 7
    assert doc["report"]["passed"] is True


def test_output_file(capsys, tmp_path, samples_dir):
    target = tmp_path / "report.json"
    code = run(["dilate", "--output", str(target), str(samples_dir / "two_atom.json")])
    assert code == EXIT_OK
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text())["kdim"] == 2


def test_unwritable_output_exits_2(capsys, samples_dir, tmp_path):
    target = tmp_path / "missing" / "report.json"
    code, doc = run_json(capsys, "dilate", str(samples_dir / "two_atom.json"), "--output", str(target))
    assert code == EXIT_INPUT
    assert doc["error"]["type"] == "InputError"
    assert "Cannot write report" in doc["error"]["message"]
    assert not target.exists()


def test_usage_errors_exit_2(capsys):
    assert run(["bogus"]) == EXIT_INPUT
    assert run(["dilate"]) == EXIT_INPUT
    assert run(["shift"]) == EXIT_INPUT


def test_bad_tolerance_is_input_error(capsys, samples_dir):
    code, doc = run_json(capsys, "dilate", "--tol-psd", "-1", str(samples_dir / "two_atom.json"))
    assert code == EXIT_INPUT
    assert "tol_psd" in doc["error"]["message"]


def test_file_logging_hook(capsys, tmp_path, samples_dir):
    calls = []
    run(["dilate", "--log-file", str(tmp_path / "run.log"), str(samples_dir / "two_atom.json")],
        file_logging=calls.append)
    assert calls == [str(tmp_path / "run.log")]


# ---------------------------------------------------------------- config

def _args(**overrides) -> argparse.Namespace:
    values = dict(tol_rank=1e-10, tol_psd=1e-10, tol_verify=1e-10, alpha="dyadic",
                  output=None, seed=0, no_validate=False)
    values.update(overrides)
    return argparse.Namespace(**values)


def test_env_overrides_verify_tolerance():
    config = RunConfig.from_args(_args(), environ={TOL_ENV_VAR: "1e-8"})
    assert config.tol_verify == 1e-8
    with pytest.raises(InputError, match=TOL_ENV_VAR):
        RunConfig.from_args(_args(), environ={TOL_ENV_VAR: "tight"})


def test_config_validation():
    with pytest.raises(InputError):
        RunConfig(tol_rank=0.0)
    with pytest.raises(InputError):
        RunConfig(alpha_spec="bogus")
    with pytest.raises(InputError):
        RunConfig(alpha_spec="geometric:x")


def test_config_weights():
    np.testing.assert_allclose(RunConfig().weights(2).alphas, [0.5, 0.25])
    np.testing.assert_allclose(RunConfig(alpha_spec="geometric:3").weights(2).alphas, [1 / 3, 1 / 9])
    np.testing.assert_allclose(RunConfig(alpha_spec="0.3,0.2,0.1").weights(2).alphas, [0.3, 0.2, 0.1])
    with pytest.raises(InputError):
        RunConfig(alpha_spec="0.5").weights(3)


def test_parser_builds_every_command():
    parser = build_parser()
    args = parser.parse_args(["cex", "spectrum", "--sizes", "64,128"])
    assert args.sizes == "64,128"
    assert args.a == "geom:8,2"


# ---------------------------------------------------------------- report

def test_encode_floats_and_complex():
    assert encode(0.1) == "0.10000000000000001"
    assert encode(1 + 2j) == ["1", "2"]
    assert encode(np.array([0.5])) == ["0.5"]
    assert encode(ShiftClass.SPECTRAL) == "Spectral"
    assert encode(np.bool_(True)) is True
    assert encode({"n": np.int64(3), "x": None}) == {"n": 3, "x": None}


def test_encode_check_report():
    report = CheckReport("demo")
    report.record("defect", 1e-3, 1e-2)
    doc = encode(report)
    assert doc["passed"] is True
    assert doc["max_defects"]["defect"] == "0.001"


def test_emit_report_failure_shape(capsys):
    text = emit_report({"kdim": 0}, RunConfig(), False, ["WARNING: x"])
    doc = json.loads(text)
    assert doc["passed"] is False
    assert doc["warnings"] == ["WARNING: x"]
    assert capsys.readouterr().out == text


def test_log_handler_is_bounded():
    handler = ReportLogHandler(max_entries=2)
    log = logging.getLogger("tests.report")
    log.addHandler(handler)
    try:
        log.info("ignored")
        for i in range(3):
            log.warning(f"w{i}")
    finally:
        log.removeHandler(handler)
    assert handler.entries == ["WARNING: w1", "WARNING: w2"]
