import subprocess
import sys

import pytest
import yaml

from edgefed.cli import main
from edgefed.reporting import Table
from edgefed.scenario_file import dump_scenario, load_scenario, scenario_to_dict
from edgefed.synthetic import unit_scenario


def _write(tmp_path, doc, name="scen.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc, sort_keys=False))
    return str(path)


@pytest.mark.parametrize("name", ["unit4", "toronto30", "toronto50"])
def test_bundled_scenarios_validate(name, capsys):
    assert main(["--scenario", name, "--command", "validate"]) == 0
    assert "valid" in capsys.readouterr().out


def test_bundled_file_matches_generator():
    assert load_scenario("unit4") == unit_scenario()


def test_missing_prices_is_a_usage_error(tmp_path, capsys):
    doc = scenario_to_dict(unit_scenario())
    del doc["prices"]
    assert main(["--scenario", _write(tmp_path, doc), "--command", "validate"]) == 1
    assert "prices" in capsys.readouterr().err


def test_short_profile_fails_validation(tmp_path, capsys):
    doc = scenario_to_dict(unit_scenario())
    doc["services"][0]["profile"] = doc["services"][0]["profile"][:23]
    assert main(["--scenario", _write(tmp_path, doc), "--command", "validate"]) == 2
    out = capsys.readouterr().out
    assert "web" in out and "23" in out


def test_unknown_scenario_and_bad_flags(capsys):
    assert main(["--scenario", "nowhere.yaml"]) == 1
    assert main(["--command", "explode"]) == 1
    assert main(["--scenario", "unit4", "--command", "compare", "--models", "federation,barter"]) == 1


def test_compare_is_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert main(["--scenario", "unit4", "--command", "compare", "--groups", "1", "--out", str(out)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outs[0] == outs[1] and len(outs[0]) == 5


def test_single_eip_scenario_has_zero_savings(tmp_path):
    doc = scenario_to_dict(unit_scenario())
    for e in doc["edge_nodes"]:
        e["owner_eip"] = "A"
    doc["contracts"] = {"fixed_contract": {"web": ["A"], "video": ["A"]},
                        "multihoming": {"web": ["A"], "video": ["A"]}}
    out = tmp_path / "out"
    assert main(["--scenario", _write(tmp_path, doc), "--command", "compare", "--out", str(out)]) == 0
    fed = [r for r in Table.from_csv((out / "unit4_all_cost.csv").read_text()).records()
           if r["model"] == "federation"][0]
    assert abs(float(fed["savings_vs_fixed"])) <= 1e-9
    assert abs(float(fed["savings_vs_multihoming"])) <= 1e-9


def test_environment_supplies_defaults(tmp_path, monkeypatch):
    out = tmp_path / "env-out"
    monkeypatch.setenv("EDGEFED_SCENARIO", "unit4")
    monkeypatch.setenv("EDGEFED_COMMAND", "run")
    monkeypatch.setenv("EDGEFED_OUT", str(out))
    monkeypatch.setenv("EDGEFED_GROUPS", "2")
    assert main([]) == 0
    assert (out / "unit4-g2_federation_average_cost.csv").exists()
    # Flags win over the environment.
    assert main(["--groups", "1"]) == 0
    assert (out / "unit4-g1_all_summary.json").exists()


def test_abort_on_infeasible_exits_3(tmp_path, capsys):
    code = main(["--scenario", "unit4", "--command", "run", "--latency", "web=0.01", "--latency", "video=0.01",
                 "--abort-on-infeasible", "--out", str(tmp_path)])
    assert code == 3
    assert "infeasible" in capsys.readouterr().err


def test_infeasible_slots_do_not_abort_by_default(tmp_path, capsys):
    code = main(["--scenario", "unit4", "--command", "run", "--latency", "web=0.01", "--latency", "video=0.01",
                 "--out", str(tmp_path)])
    assert code == 0
    assert "24 infeasible slots" in capsys.readouterr().out


def test_custom_group_equals_table_group(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--scenario", "toronto30", "--command", "compare", "--models", "federation", "--groups", "3",
                 "--out", str(a)]) == 0
    assert main(["--scenario", "toronto30", "--command", "compare", "--models", "federation",
                 "--latency", "facebook=64", "--latency", "valve=32", "--latency", "netflix=48",
                 "--out", str(b)]) == 0
    ta = Table.from_csv((a / "toronto30-g3_all_cost.csv").read_text()).records()
    tb = Table.from_csv((b / "toronto30-gcustom_all_cost.csv").read_text()).records()
    assert ta[0]["total_cost"] == tb[0]["total_cost"]


def test_sweep_reports_monotonicity(tmp_path, capsys):
    assert main(["--scenario", "unit4", "--command", "sweep", "--groups", "1,2", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "monotonicity federation/cost: PASS" in out
    table = Table.from_csv((tmp_path / "unit4_sweep_cost.csv").read_text())
    assert table.column("group") == ["1", "1", "1", "2", "2", "2"]


def test_solver_choice_does_not_change_results(tmp_path):
    for solver in ("bundled:bland", "highs"):
        assert main(["--scenario", "unit4", "--command", "compare", "--groups", "1", "--solver", solver,
                     "--models", "federation", "--out", str(tmp_path / solver)]) == 0
    ta, tb = (Table.from_csv((tmp_path / s / "unit4-g1_all_cost.csv").read_text()).records()[0]
              for s in ("bundled:bland", "highs"))
    assert float(ta["total_cost"]) == pytest.approx(float(tb["total_cost"]), rel=1e-8)


def test_module_entry_point(tmp_path):
    path = tmp_path / "u.yaml"
    path.write_text(dump_scenario(unit_scenario(), "copy"))
    proc = subprocess.run([sys.executable, "-m", "edgefed", "--scenario", str(path), "--command", "validate"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "unit4: valid" in proc.stdout


def test_scenario_can_read_a_trace(tmp_path):
    rows = "\n".join(f"2024-05-01T{h:02d}:30:00,web,{10 + h}" for h in range(24))
    (tmp_path / "web.csv").write_text("timestamp,service,value\n" + rows + "\n")
    doc = scenario_to_dict(unit_scenario())
    web = doc["services"][0]
    del web["profile"]
    web["trace"] = "web.csv"
    web["trace_start"] = "2024-05-01T00:00:00"
    scen = load_scenario(_write(tmp_path, doc))
    profile = scen.services[0].profile
    assert len(profile) == 24 and max(profile) == 1.0
    assert profile[0] == pytest.approx(10 / 33) and profile[23] == 1.0


def test_missing_trace_file_is_reported(tmp_path):
    doc = scenario_to_dict(unit_scenario())
    del doc["services"][0]["profile"]
    doc["services"][0]["trace"] = "absent.csv"
    assert main(["--scenario", _write(tmp_path, doc)]) == 1
