from __future__ import annotations

import json

from faultloc import FaultScenario, FaultType, MeasurementTaps, bundled_case
from faultloc.cli import main
from faultloc import FaultStudy

from importlib import resources

CASE_PATH = str(resources.files("faultloc").joinpath("cases", "fourbus.case"))
CASE14_PATH = str(resources.files("faultloc").joinpath("cases", "ieee14.case"))


def run_cli(args):
    return main(args)


def parse_csv(text):
    rows = []
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    for ln in lines[1:]:
        rows.append(dict(zip(header, ln.split(","))))
    return rows


def test_single_run_hybrid_row(capsys):
    rc = run_cli(
        [
            "--case", CASE_PATH, "--line", "T2", "--type", "LG", "--m", "0.56",
            "--rf-ohm", "1", "--method", "hybrid", "--branches", "T1", "--buses", "2",
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    rows = parse_csv(out)
    assert len(rows) == 1
    assert rows[0]["method"] == "hybrid"
    assert abs(float(rows[0]["m_est"]) - 0.56) < 1e-9
    assert float(rows[0]["pct_error"]) < 1e-9
    assert rows[0]["feasible"] == "true"


def test_single_run_method_dispatch(capsys):
    rc = run_cli(
        [
            "--case", CASE_PATH, "--line", "T2", "--type", "LG", "--m", "0.56",
            "--rf-ohm", "1", "--method", "ssvm", "--buses", "1,2",
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    rows = parse_csv(out)
    assert [r["method"] for r in rows] == ["ssvm"]


def test_all_methods_with_endpoint_branch_tokens(capsys):
    rc = run_cli(
        [
            "--case", CASE_PATH, "--line", "T2", "--type", "LLL", "--m", "0.28",
            "--rf-ohm", "10", "--method", "all", "--buses", "1,2",
            "--branches", "3-1,2-4",
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    rows = parse_csv(out)
    assert sorted(r["method"] for r in rows) == ["hybrid", "hybrid-quad", "sscm", "ssvm"]
    for r in rows:
        assert abs(float(r["m_est"]) - 0.28) < 1e-6


def test_invalid_case_path_exits_one(capsys):
    rc = run_cli(["--case", "/nonexistent.case", "--line", "T2", "--type", "LG", "--m", "0.5"])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_missing_scenario_flags_exit_one(capsys):
    rc = run_cli(["--case", CASE_PATH])
    assert rc == 1


def test_infeasible_placement_exits_two(capsys):
    rc = run_cli(
        [
            "--case", CASE_PATH, "--line", "T2", "--type", "LG", "--m", "0.5",
            "--method", "ssvm", "--buses", "3,1",
        ]
    )
    assert rc == 2
    assert "infeasible" in capsys.readouterr().err


def _write_sweep(tmp_path, name="sweep.json", **overrides):
    spec = {
        "case": CASE_PATH,
        "lines": ["T2"],
        "types": ["LG", "LL", "LLG", "LLL"],
        "m_values": [0.28, 0.56],
        "rf_ohm": [1.0, 10.0],
        "methods": ["ssvm", "sscm", "hybrid"],
        "buses": [1, 2],
        "branches": ["T1", "T3"],
    }
    spec.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(spec))
    return str(path)


def test_sweep_full_fourbus_grid(tmp_path, capsys):
    out = tmp_path / "report.csv"
    rc = run_cli(["--case", CASE_PATH, "--sweep", _write_sweep(tmp_path), "--out", str(out)])
    assert rc == 0
    text = out.read_text()
    rows = parse_csv(text)
    assert len(rows) == 48  # 4 types x 2 positions x 2 resistances x 3 methods
    for r in rows:
        assert float(r["pct_error"]) <= 1e-4
    assert sum(1 for ln in text.splitlines() if ln.startswith("# aggregate")) == 3


def test_sweep_report_is_deterministic(tmp_path):
    spec = _write_sweep(tmp_path)
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(["--case", CASE_PATH, "--sweep", spec, "--out", str(out_a)]) == 0
    assert run_cli(["--case", CASE_PATH, "--sweep", spec, "--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_sweep_json_schema(tmp_path, capsys):
    out = tmp_path / "report.json"
    spec = _write_sweep(tmp_path, format="json")
    rc = run_cli(["--case", CASE_PATH, "--sweep", spec, "--out", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == 1
    assert len(doc["rows"]) == 48
    assert set(doc["aggregates"]) == {"ssvm", "sscm", "hybrid"}
    for agg in doc["aggregates"].values():
        assert agg["max_pct_error"] <= 1e-4


def test_sweep_empty_type_list_rejected(tmp_path, capsys):
    out = tmp_path / "never.csv"
    spec = _write_sweep(tmp_path, types=[])
    rc = run_cli(["--case", CASE_PATH, "--sweep", spec, "--out", str(out)])
    assert rc == 1
    assert not out.exists()  # failure must not leave a partial file


def _segment_clamp(fraction=0.5):
    net = bundled_case("fourbus")
    ms = FaultStudy(net).measurements(
        FaultScenario("T2", 0.56, FaultType.LLL, 1.0),
        MeasurementTaps(faulted_segments=True),
    )
    return fraction * abs(ms.fault_branch_i["T2@from"][1])


def test_ct_saturation_leaves_voltage_and_hybrid_rows_unchanged(tmp_path):
    clamp = _segment_clamp()
    spec_clean = _write_sweep(tmp_path, "clean.json", types=["LLL"], m_values=[0.56], rf_ohm=[1.0])
    spec_sat = _write_sweep(
        tmp_path, "sat.json", types=["LLL"], m_values=[0.56], rf_ohm=[1.0],
        distort=[f"branchI:T2@from:clamp:{clamp!r}"],
    )
    out_clean, out_sat = tmp_path / "clean.csv", tmp_path / "sat.csv"
    assert run_cli(["--case", CASE_PATH, "--sweep", spec_clean, "--out", str(out_clean)]) == 0
    assert run_cli(["--case", CASE_PATH, "--sweep", spec_sat, "--out", str(out_sat)]) == 0
    # None of these methods consume the clamped channel: reports identical.
    assert out_clean.read_bytes() == out_sat.read_bytes()


def test_ct_saturation_degrades_consuming_sscm(tmp_path):
    clamp = _segment_clamp()
    base = dict(
        types=["LLL"], m_values=[0.56], rf_ohm=[1.0],
        methods=["sscm"], branches=["T2@from", "T3"],
    )
    spec_clean = _write_sweep(tmp_path, "clean.json", **base)
    spec_sat = _write_sweep(
        tmp_path, "sat.json", **base, distort=[f"branchI:T2@from:clamp:{clamp!r}"]
    )
    out_clean, out_sat = tmp_path / "c.csv", tmp_path / "s.csv"
    assert run_cli(["--case", CASE_PATH, "--sweep", spec_clean, "--out", str(out_clean)]) == 0
    assert run_cli(["--case", CASE_PATH, "--sweep", spec_sat, "--out", str(out_sat)]) == 0
    clean = parse_csv(out_clean.read_text())[0]
    sat = parse_csv(out_sat.read_text())[0]
    assert clean["m_est"] != sat["m_est"]


def test_unknown_distortion_channel_exits_one(capsys):
    rc = run_cli(
        [
            "--case", CASE_PATH, "--line", "T2", "--type", "LG", "--m", "0.5",
            "--method", "ssvm", "--buses", "1,2", "--distort", "busV:77:gain:1.01",
        ]
    )
    assert rc == 1
    assert "unknown voltage channel" in capsys.readouterr().err


def test_bad_distortion_spec_exits_one(capsys):
    rc = run_cli(
        [
            "--case", CASE_PATH, "--line", "T2", "--type", "LG", "--m", "0.5",
            "--method", "ssvm", "--buses", "1,2", "--distort", "busV:1:wobble:2",
        ]
    )
    assert rc == 1


def test_unknown_branch_token_exits_one(capsys):
    rc = run_cli(
        [
            "--case", CASE_PATH, "--line", "T2", "--type", "LG", "--m", "0.5",
            "--method", "sscm", "--branches", "T1,T9",
        ]
    )
    assert rc == 1
