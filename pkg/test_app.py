"""
Test script for the command-line entry point
Runs every subcommand through main() and checks exit codes and emitted data
"""

import csv
import io
import json
import logging
from collections import defaultdict

import pytest

from main import EXIT_DATA_ERROR, EXIT_OK, EXIT_USAGE_ERROR, main
from src.cli.config import CONFIG_ENV_VAR, DEFAULT_COUPLING_LADDER, build_run_config
from src.exceptions import UsageError

logger = logging.getLogger(__name__)


def run(capsys, *argv):
    """Run main() and return (exit code, stdout)"""
    code = main(list(argv))
    return code, capsys.readouterr().out


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_kernel_sweep_defaults(capsys):
    """Default sweep covers the coupling ladder on 61 points of [0, 3]"""
    code, out = run(capsys, "kernel-sweep")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "gamma0_omega_tau,x,re_k,im_k,re_k_quadratic"
    rows = read_csv(out)
    assert len(rows) == len(DEFAULT_COUPLING_LADDER) * 61
    first = rows[0]
    assert (first["x"], first["re_k"], first["im_k"], first["re_k_quadratic"]) == ("0", "0", "0", "0")
    assert float(rows[60]["x"]) == 3.0
    logger.info("✓ Kernel sweep defaults")


def test_kernel_sweep_json(capsys):
    code, out = run(capsys, "kernel-sweep", "--format", "json", "--steps", "3", "--gamma0-omega-tau", "1e-3")
    assert code == EXIT_OK
    records = json.loads(out)
    assert [r["x"] for r in records] == [0.0, 1.5, 3.0]
    assert all(r["re_k"] >= 0.0 for r in records)
    assert records[-1]["re_k"] > records[1]["re_k"]
    logger.info("✓ Kernel sweep as JSON")


def test_kernel_sweep_with_shift(capsys):
    code, out = run(capsys, "kernel-sweep", "--steps", "2", "--x-end", "1", "--delta0", "1e-3",
                    "--gamma0-omega-tau", "1e-3")
    assert code == EXIT_OK
    assert float(read_csv(out)[1]["im_k"]) > 0.0


def test_cost_sweep_dominance(capsys):
    """Stronger coupling never costs less at the same gate time"""
    code, out = run(capsys, "cost-sweep", "--steps", "7",
                    "--gamma0-omega-tau", "7e-4", "--gamma0-omega-tau", "7e-3")
    assert code == EXIT_OK
    curves = defaultdict(list)
    for row in read_csv(out):
        curves[float(row["gamma0_omega_tau"])].append(float(row["cost_numeric"]))
    weak, strong = (curves[key] for key in sorted(curves))
    assert weak[0] == strong[0] == 1.0
    assert all(s >= w for w, s in zip(weak, strong))
    assert all(b >= a for a, b in zip(strong, strong[1:]))
    logger.info("✓ Cost sweep ordering")


def test_cost_sweep_identity_gate(capsys):
    code, out = run(capsys, "cost-sweep", "--gate", "identity", "--steps", "3", "--gamma0-omega-tau", "1e-3")
    assert code == EXIT_OK
    rows = read_csv(out)
    assert len(rows) == 3
    # No closed form exists for the identity gate
    assert all(row["cost_closed_form"] == "nan" for row in rows)
    assert all(row["cost_numeric"] != "nan" for row in rows)
    logger.info("✓ Identity gate cost sweep")


def test_cost_sweep_cnot_closed_form_column(capsys):
    code, out = run(capsys, "cost-sweep", "--steps", "3", "--gamma0-omega-tau", "1e-3")
    assert code == EXIT_OK
    rows = read_csv(out)
    assert float(rows[0]["cost_closed_form"]) == 1.0
    assert all(row["cost_closed_form"] != "nan" for row in rows)


def test_gaussian_sweep(capsys):
    code, out = run(capsys, "gaussian-sweep", "--steps", "4", "--gamma0-omega-tau", "7e-4")
    assert code == EXIT_OK
    rows = read_csv(out)
    assert float(rows[0]["rho11_gaussian"]) == 1.0
    values = [float(r["rho11_gaussian"]) for r in rows]
    assert values == sorted(values, reverse=True)
    logger.info("✓ Gaussian sweep decays")


def test_evolve_with_alpha(capsys):
    code, out = run(capsys, "evolve", "--gate", "identity", "--initial-state", "m1", "--alpha", "6e-3")
    assert code == EXIT_OK
    result = json.loads(out)
    probabilities = result["probabilities"]
    assert probabilities["00"] == pytest.approx(0.988)
    assert probabilities["01"] == pytest.approx(0.006)
    assert probabilities["10"] == pytest.approx(0.006)
    assert probabilities["11"] == pytest.approx(0.0, abs=1e-15)
    assert sum(probabilities.values()) == pytest.approx(1.0)
    assert len(result["population_matrix"]) == 4
    logger.info("✓ Evolve with explicit alpha")


def test_evolve_from_kernel(capsys):
    code, out = run(capsys, "evolve", "--gamma0-omega-tau", "7e-3", "--t-over-tau-s", "2")
    assert code == EXIT_OK
    result = json.loads(out)
    assert result["gate"] == "cnot"
    assert 0.0 < result["alpha"] < 0.05


@pytest.mark.parametrize("t_over_tau_s", ["nan", "inf", "-1"])
def test_evolve_time_not_finite_or_negative(capsys, t_over_tau_s):
    code, out = run(capsys, "evolve", "--t-over-tau-s", t_over_tau_s)
    assert code == EXIT_USAGE_ERROR
    assert out == ""


@pytest.mark.parametrize("alpha", ["0.7", "-0.1"])
def test_evolve_alpha_out_of_range(capsys, alpha):
    code, out = run(capsys, "evolve", "--alpha", alpha)
    assert code == EXIT_USAGE_ERROR
    assert out == ""


def test_calibrate_bundled_tables(capsys):
    code, out = run(capsys, "calibrate", "--estimator", "single_outcome")
    assert code == EXIT_OK
    records = json.loads(out)["records"]
    assert len(records) == 10
    for record in records:
        assert record["alpha_hat"] == pytest.approx(record["quoted_alpha"], rel=1e-9)
        assert set(record["couplings"]) == {"quadratic_prefactor", "identity_table_implied", "cnot_tables_implied"}
    logger.info("✓ Calibration of bundled tables")


def test_calibrate_conversion_rule(capsys):
    code, out = run(capsys, "calibrate", "--conversion-rule", "cnot_tables_implied")
    assert code == EXIT_OK
    record = json.loads(out)["records"][0]
    assert record["conversion_rule"] == "cnot_tables_implied"
    assert record["coupling_hat"] == pytest.approx(record["alpha_hat"] * 7.0 / 16.0)


def test_calibrate_bad_counts_file(capsys, tmp_path):
    path = tmp_path / "counts.json"
    path.write_text('[{"device": "dev", "gate": "cnot"}]', encoding="utf-8")
    code, out = run(capsys, "calibrate", "--counts", str(path))
    assert code == EXIT_DATA_ERROR
    assert out == ""


def test_calibrate_invalid_utf8(capsys, tmp_path):
    path = tmp_path / "counts.json"
    path.write_bytes(b'[{"device": "\xff\xfe", "gate": "cnot"}]')
    code, out = run(capsys, "calibrate", "--counts", str(path))
    assert code == EXIT_DATA_ERROR
    assert out == ""
    logger.info("✓ Undecodable counts file rejected")


def test_calibrate_empty_file(capsys, tmp_path):
    path = tmp_path / "counts.json"
    path.write_text("", encoding="utf-8")
    code, out = run(capsys, "calibrate", "--counts", str(path))
    assert code == EXIT_OK
    assert json.loads(out) == {"records": []}
    logger.info("✓ Empty counts file")


def test_calibrate_missing_counts_file(capsys, tmp_path):
    code, _ = run(capsys, "calibrate", "--counts", str(tmp_path / "absent.json"))
    assert code == EXIT_DATA_ERROR


def test_verify_report(capsys):
    """The discrepancy report lists oracle checks and published-expression comparisons"""
    code, out = run(capsys, "verify")
    assert code == EXIT_OK
    report = json.loads(out)
    status = {entry["name"]: entry["status"] for entry in report["entries"]}
    assert status["kernel_closed_form"] == "pass"
    assert status["bath_correlation"] == "pass"
    assert status["gaussian_bound"] == "pass"
    assert status["cnot_population_matrix"] == "mismatch"
    assert status["cnot_outcome_probabilities"] == "match"
    assert status["population_only_outcomes"] == "mismatch"
    assert status["closed_form_denominator_root"] == "match"
    assert status["alpha_zero"] == "match"
    assert sum(report["summary"].values()) == len(report["entries"])
    logger.info("✓ Discrepancy report")


@pytest.mark.parametrize("argv", [
    ["kernel-sweep", "--steps", "5", "--gamma0-omega-tau", "7e-4", "--delta0", "1e-3"],
    ["gaussian-sweep", "--steps", "5"],
    ["cost-sweep", "--steps", "5", "--format", "json"],
    ["evolve", "--gamma0-omega-tau", "7e-3", "--t-over-tau-s", "1.5"],
    ["calibrate"],
    ["verify"],
])
def test_subcommands_are_deterministic(capsys, argv):
    """Identical inputs give byte-identical output"""
    first_code, first = run(capsys, *argv)
    second_code, second = run(capsys, *argv)
    assert first_code == second_code == EXIT_OK
    assert first.encode("utf-8") == second.encode("utf-8")
    logger.info(f"✓ Deterministic output for {argv[0]}")


def test_output_file(capsys, tmp_path):
    target = tmp_path / "sweep.csv"
    code, out = run(capsys, "kernel-sweep", "--steps", "2", "--gamma0-omega-tau", "1e-3", "--out", str(target))
    assert code == EXIT_OK
    assert out == ""
    assert target.read_text(encoding="utf-8").startswith("gamma0_omega_tau,x,")
    logger.info("✓ Output written to file")


def test_output_file_unwritable(capsys, tmp_path):
    code, _ = run(capsys, "kernel-sweep", "--steps", "2", "--out", str(tmp_path / "missing" / "sweep.csv"))
    assert code == EXIT_DATA_ERROR


@pytest.mark.parametrize("argv", [
    ["kernel-sweep", "--steps", "1"],
    ["kernel-sweep", "--x-start", "2", "--x-end", "1"],
    ["kernel-sweep", "--x-start", "-1"],
    ["cost-sweep", "--omega-c-tau-s", "0"],
])
def test_invalid_sweep_arguments(capsys, argv):
    code, out = run(capsys, *argv)
    assert code == EXIT_USAGE_ERROR
    assert out == ""


def test_unknown_choice_rejected_by_parser(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["evolve", "--gate", "swap"])
    assert excinfo.value.code == 2


def test_config_file_precedence(capsys, tmp_path):
    """Flags override the config file, which overrides the defaults"""
    config = tmp_path / "run.env"
    config.write_text("steps=4\ngamma0_omega_tau=1e-3,2e-3\nformat=json\nx_end=2\n", encoding="utf-8")
    code, out = run(capsys, "kernel-sweep", "--config", str(config), "--steps", "3")
    assert code == EXIT_OK
    records = json.loads(out)
    assert len(records) == 2 * 3
    assert records[-1]["x"] == 2.0
    assert sorted({r["gamma0_omega_tau"] for r in records}) == pytest.approx([1e-3, 2e-3])
    logger.info("✓ Config file precedence")


def test_config_from_environment(capsys, tmp_path, monkeypatch):
    config = tmp_path / "env.cfg"
    config.write_text("GATE=identity\nINITIAL_STATE=m1\nALPHA=0.01\n", encoding="utf-8")
    monkeypatch.setenv(CONFIG_ENV_VAR, str(config))
    code, out = run(capsys, "evolve")
    assert code == EXIT_OK
    assert json.loads(out)["probabilities"]["00"] == pytest.approx(0.98)


def test_config_unknown_key_is_ignored(tmp_path, caplog):
    config = tmp_path / "run.env"
    config.write_text("colour=blue\nsteps=5\n", encoding="utf-8")
    with caplog.at_level(logging.WARNING):
        settings = build_run_config({}, config_path=str(config), environ={})
    assert settings.steps == 5
    assert "colour" in caplog.text


@pytest.mark.parametrize("content", ["steps=many\n", "gate=swap\n", "gamma0_omega_tau=\n"])
def test_config_bad_value(tmp_path, content):
    config = tmp_path / "run.env"
    config.write_text(content, encoding="utf-8")
    with pytest.raises(UsageError):
        build_run_config({}, config_path=str(config), environ={})


def test_config_missing_file(capsys, tmp_path):
    code, _ = run(capsys, "kernel-sweep", "--config", str(tmp_path / "nope.env"))
    assert code == EXIT_USAGE_ERROR
