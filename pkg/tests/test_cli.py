import json
import xml.etree.ElementTree as ET

import pytest

from cli import main as cli_main
from cli.errors import ExitCode
from cli.runtime_config import _env_bool, _env_grid, _env_int, _env_log_level, _env_tol
from frel.models.reports import DualityReport
from tests.conftest import BILAPLACIAN, NOT_ELLIPTIC

SMALL_GRID = ["--grid", "256"]


def _stderr_payload(captured) -> dict:
    return json.loads(captured.err.strip().splitlines()[-1])


def test_constants_for_bilaplacian(capsys):
    assert cli_main.main(["constants", "--symbol", BILAPLACIAN, *SMALL_GRID]) == ExitCode.OK
    data = json.loads(capsys.readouterr().out)
    assert data["A"] == "9/16"
    assert data["m"] == 2
    assert data["c"] == pytest.approx(1.0)
    assert data["s"] == pytest.approx(1.0, abs=1e-6)
    assert data["stronger"] == "equal"


def test_constants_for_family_member(capsys):
    assert cli_main.main(["constants", "--family", "example1", "--param", "b=0", *SMALL_GRID]) == ExitCode.OK
    data = json.loads(capsys.readouterr().out)
    assert data["symbol"] == "x1^4 + x2^4"
    assert data["c"] == pytest.approx(0.5)
    assert data["s"] > data["c"]


def test_constants_as_csv(capsys):
    args = ["constants", "--family", "example2", "--param", "b=3", "--format", "csv", *SMALL_GRID]
    assert cli_main.main(args) == ExitCode.OK
    header, row, *rest = capsys.readouterr().out.splitlines()
    assert rest == []
    columns = header.split(",")
    assert {"lambda", "Lambda", "mu", "M", "A", "s", "c"} <= set(columns)
    assert dict(zip(columns, row.split(","), strict=True))["A"] == "225/64"


def test_non_elliptic_symbol_exits_with_its_own_code(capsys):
    assert cli_main.main(["constants", "--symbol", NOT_ELLIPTIC]) == ExitCode.NOT_ELLIPTIC
    assert _stderr_payload(capsys.readouterr())["code"] == "NOT_ELLIPTIC"


def test_malformed_symbol_is_a_parse_error(capsys):
    assert cli_main.main(["constants", "--symbol", "x1^4 + * x2^4"]) == ExitCode.PARSE
    payload = _stderr_payload(capsys.readouterr())
    assert payload["code"] == "SYNTAX"
    assert "position 7" in payload["detail"]


def test_missing_symbol_is_a_parse_error(capsys):
    assert cli_main.main(["constants"]) == ExitCode.PARSE
    assert _stderr_payload(capsys.readouterr())["code"] == "SYNTAX"


def test_unsettled_table_is_a_convergence_error(capsys):
    args = ["constants", "--family", "example1", "--param", "b=0", "--grid", "16", "--max-grid", "32"]
    assert cli_main.main([*args, "--grid-tol", "1e-15"]) == ExitCode.CONVERGENCE
    assert _stderr_payload(capsys.readouterr())["code"] == "CONVERGENCE"


def test_unknown_subcommand_exits_from_argparse():
    with pytest.raises(SystemExit) as exc:
        cli_main.main(["plot"])
    assert exc.value.code == 2


def test_sweep_is_byte_identical_across_runs(tmp_path):
    outputs = []
    for name in ("first", "second"):
        csv_path, svg_path = tmp_path / f"{name}.csv", tmp_path / f"{name}.svg"
        args = [
            "sweep",
            "--family",
            "example1",
            "--points",
            "5",
            "--beta-min",
            "-0.5",
            "--beta-max",
            "10",
            "--workers",
            "2",
            *SMALL_GRID,
            "--out",
            str(csv_path),
            "--svg",
            str(svg_path),
        ]
        assert cli_main.main(args) == ExitCode.OK
        outputs.append((csv_path.read_bytes(), svg_path.read_bytes()))

    assert outputs[0] == outputs[1]
    lines = outputs[0][0].decode().splitlines()
    assert lines[0] == "beta,lambda,Lambda,c,mu,M,s"
    assert len(lines) == 1 + 6
    assert "1.0" in [line.split(",")[0] for line in lines[1:]]
    root = ET.fromstring(outputs[0][1])
    assert root.tag.endswith("svg")
    assert len(root.findall(".//{http://www.w3.org/2000/svg}polyline")) == 2


def test_sweep_json_output(capsys):
    args = ["sweep", "--family", "example2", "--points", "2", "--beta-min", "0", "--beta-max", "5", "--no-collapse"]
    assert cli_main.main([*args, "--format", "json", *SMALL_GRID]) == ExitCode.OK
    rows = json.loads(capsys.readouterr().out)
    assert [row["beta"] for row in rows] == pytest.approx([0.0, 5.0])
    assert all(row["ok"] for row in rows)


def test_sweep_where_every_row_fails(capsys):
    args = ["sweep", "--symbol", "x1^4 - b*x1^2*x2^2 + x2^4", "--beta-min", "3", "--beta-max", "4", "--points", "2"]
    assert cli_main.main([*args, *SMALL_GRID]) == ExitCode.NOT_ELLIPTIC
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].endswith(",error")
    assert all("NOT_ELLIPTIC" in line for line in lines[1:])


def test_custom_sweep_needs_a_template(capsys):
    assert cli_main.main(["sweep", "--family", "custom"]) == ExitCode.PARSE
    assert _stderr_payload(capsys.readouterr())["code"] == "UNBOUND_PARAMETER"


def test_sweep_range_must_stay_inside_family_domain(capsys):
    assert cli_main.main(["sweep", "--family", "example1", "--beta-min", "-1"]) == ExitCode.PARSE
    assert _stderr_payload(capsys.readouterr())["code"] == "INVALID_CONFIG"


def test_verify_on_halfspace(capsys):
    args = ["verify", "--family", "example1", "--param", "b=0", "--halfspace", "0,1", "--seed", "9", *SMALL_GRID]
    assert cli_main.main(args) == ExitCode.OK
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    assert report["kind"] == "halfspace"
    assert report["bound"] == pytest.approx(9 / 16)
    assert report["seed"] == 9
    assert report["box"] == [["0/1", "1/1"], ["0/1", "1/1"]]


def test_verify_duality_and_remark(capsys):
    base = ["verify", "--family", "example1", "--param", "b=2"]
    assert cli_main.main([*base, "--duality", "--samples", "2000"]) == ExitCode.OK
    assert json.loads(capsys.readouterr().out)["samples"] == 2000
    assert cli_main.main([*base, "--remark", "--grid", "1024"]) == ExitCode.OK
    assert json.loads(capsys.readouterr().out)["points"] == 1024


def test_verify_needs_a_domain(capsys):
    assert cli_main.main(["verify", "--symbol", BILAPLACIAN]) == ExitCode.PARSE
    assert _stderr_payload(capsys.readouterr())["code"] == "INVALID_DOMAIN"


def test_verify_rejects_malformed_support_box(capsys):
    args = ["verify", "--symbol", BILAPLACIAN, "--halfspace", "0,1", "--box", "0,1,0"]
    assert cli_main.main(args) == ExitCode.PARSE
    assert _stderr_payload(capsys.readouterr())["code"] == "INVALID_DOMAIN"


def test_failed_verification_dumps_report(monkeypatch, tmp_path, capsys):
    failing = DualityReport(
        symbol=BILAPLACIAN,
        samples=10,
        seed=1,
        worst_slack=-0.5,
        worst_xi=(1.0, 0.0),
        worst_omega=(0.0, 1.0),
        threshold=-1e-9,
        passed=False,
    )
    monkeypatch.setattr(cli_main, "symbol_duality_check", lambda *args, **kwargs: failing)
    out = tmp_path / "reports" / "verify.json"
    args = ["verify", "--symbol", BILAPLACIAN, "--duality", "--out", str(out)]
    assert cli_main.main(args) == ExitCode.VERIFY_FAILED
    dump = tmp_path / "reports" / cli_main.FAILURE_DUMP
    assert json.loads(dump.read_text())["worst_slack"] == -0.5
    assert not out.exists()
    assert json.loads(capsys.readouterr().out)["passed"] is False


def test_dual_table_csv(capsys):
    assert cli_main.main(["dual", "--symbol", "x1^2 + x2^2", "--grid", "64"]) == ExitCode.OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "angle,fstar,fstarstar,f"
    assert len(lines) == 1 + 64
    angle, fstar, fstarstar, f = (float(v) for v in lines[1].split(","))
    assert angle == 0.0
    assert fstar == pytest.approx(1.0)
    assert fstarstar == pytest.approx(1.0)
    assert f == pytest.approx(1.0)


def test_dual_table_json(capsys):
    assert cli_main.main(["dual", "--symbol", "x1^2 + x2^2", "--grid", "64", "--format", "json"]) == ExitCode.OK
    data = json.loads(capsys.readouterr().out)
    assert data["symbol_text"] == "x1^2 + x2^2"
    assert data["points"] == 64


def test_quotient1d(capsys):
    assert cli_main.main(["quotient1d", "--m", "2", "--eps", "0.1,0.01"]) == ExitCode.OK
    points = json.loads(capsys.readouterr().out)
    assert [p["eps"] for p in points] == [0.1, 0.01]
    for point in points:
        assert point["limit"] == "9/16"
        assert point["numeric"] == pytest.approx(point["closed_form"], rel=1e-10)


def test_quotient1d_rejects_bad_orders(capsys):
    assert cli_main.main(["quotient1d", "--m", "0"]) == ExitCode.PARSE
    assert _stderr_payload(capsys.readouterr())["code"] == "INVALID_CONFIG"


def test_flags_override_config_file(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"family": "example1", "params": {"b": "0"}, "grid_points": 256}))
    assert cli_main.main(["constants", "--config", str(config)]) == ExitCode.OK
    assert json.loads(capsys.readouterr().out)["c"] == pytest.approx(0.5)
    assert cli_main.main(["constants", "--config", str(config), "--param", "b=2"]) == ExitCode.OK
    assert json.loads(capsys.readouterr().out)["c"] == pytest.approx(2 / 3)


def test_unknown_config_field_is_rejected(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"symbol": BILAPLACIAN, "bogus": 1}))
    assert cli_main.main(["constants", "--config", str(config)]) == ExitCode.PARSE
    assert _stderr_payload(capsys.readouterr())["code"] == "INVALID_CONFIG"


def test_missing_config_file_is_an_io_error(tmp_path, capsys):
    assert cli_main.main(["constants", "--config", str(tmp_path / "absent.json")]) == ExitCode.PARSE
    assert _stderr_payload(capsys.readouterr())["code"] == "IO_ERROR"


def test_log_file_gets_json_lines(tmp_path, capsys):
    log_file = tmp_path / "logs" / "run.jsonl"
    args = ["constants", "--symbol", BILAPLACIAN, *SMALL_GRID, "--log-level", "info", "--log-file", str(log_file)]
    assert cli_main.main(args) == ExitCode.OK
    capsys.readouterr()
    records = [json.loads(line) for line in log_file.read_text().splitlines()]
    assert any(r["message"].startswith("Computed constants") for r in records)
    assert {r["level"] for r in records} <= {"debug", "info", "warning", "error"}


def test_output_file_is_written(tmp_path, capsys):
    out = tmp_path / "nested" / "constants.json"
    assert cli_main.main(["constants", "--symbol", BILAPLACIAN, *SMALL_GRID, "--out", str(out)]) == ExitCode.OK
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["A"] == "9/16"


def test_env_helpers_fall_back_on_bad_values(monkeypatch):
    monkeypatch.setenv("FREL_TEST_INT", "abc")
    monkeypatch.setenv("FREL_TEST_TOL", "1.5")
    monkeypatch.setenv("FREL_TEST_BOOL", "maybe")
    monkeypatch.setenv("FREL_TEST_LEVEL", "chatty")
    assert _env_int("FREL_TEST_INT", 7) == 7
    assert _env_tol("FREL_TEST_TOL", 1e-6) == 1e-6
    assert _env_bool("FREL_TEST_BOOL", True) is True
    assert _env_log_level("FREL_TEST_LEVEL", "WARNING") == "WARNING"
    monkeypatch.setenv("FREL_TEST_INT", "-4")
    monkeypatch.setenv("FREL_TEST_TOL", "1e-3")
    monkeypatch.setenv("FREL_TEST_BOOL", "off")
    monkeypatch.setenv("FREL_TEST_LEVEL", " debug ")
    assert _env_int("FREL_TEST_INT", 7, min_value=2) == 2
    assert _env_tol("FREL_TEST_TOL", 1e-6) == 1e-3
    assert _env_bool("FREL_TEST_BOOL", True) is False
    assert _env_log_level("FREL_TEST_LEVEL", "WARNING") == "DEBUG"


def test_env_grid_rounds_up_to_power_of_two(monkeypatch):
    monkeypatch.setenv("FREL_TEST_GRID", "1000")
    assert _env_grid("FREL_TEST_GRID", 4096) == 1024
    monkeypatch.setenv("FREL_TEST_GRID", "3")
    assert _env_grid("FREL_TEST_GRID", 4096) == 16
    monkeypatch.delenv("FREL_TEST_GRID")
    assert _env_grid("FREL_TEST_GRID", 4096) == 4096
