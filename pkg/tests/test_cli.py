from __future__ import annotations

import json

import pytest

from junctionlab.cli import dispatch


def _run(argv, capsys):
    code = dispatch(argv)
    return code, capsys.readouterr()


def test_color_output(tmp_path, capsys):
    code, cap = _run(["color", "--net", "triod", "--out", str(tmp_path)], capsys)
    assert code == 0
    lines = cap.out.splitlines()
    assert lines[0] == "region_id,gap,color"
    assert [l.split(",")[2] for l in lines[1:]] == ["1", "2", "3"]
    assert (tmp_path / "colors.csv").read_text() == cap.out


def test_network_file_input(tmp_path, capsys):
    from junctionlab.geometry import dumps_network
    from junctionlab.networks import h_network
    f = tmp_path / "h.json"
    f.write_text(dumps_network(h_network("vertical")))
    code, cap = _run(["color", "--net", str(f), "--out", str(tmp_path)], capsys)
    assert code == 0
    assert [l.split(",")[2] for l in cap.out.splitlines()[1:]] == ["1", "2", "1", "3"]


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["color", "--net", "no-such-network"],
    ["ac-run", "--eps", "0.9", "--grid-h", "0.5"],
    ["separate", "--k", "3"],
    ["flow", "--T", "-1"],
    ["color", "--wat"],
])
def test_invalid_input_exit_1(argv, tmp_path, capsys):
    code, _ = _run(argv + (["--out", str(tmp_path)] if argv and argv[0] != "bogus" and "--wat" not in argv else []),
                   capsys)
    assert code == 1


def test_numerical_failure_exit_2(tmp_path, capsys):
    from junctionlab.geometry import dumps_network
    from junctionlab.networks import h_network
    f = tmp_path / "h.json"
    f.write_text(dumps_network(h_network("horizontal", angles_deg=(60, 120, 240, 300), half_bridge=0.2)))
    code, cap = _run(["flow", "--net", str(f), "--T", "1.0", "--out", str(tmp_path)], capsys)
    assert code == 2
    assert "ArcCollapse" in cap.err


def test_config_precedence(tmp_path, capsys, monkeypatch):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"net": "h-horizontal", "out": str(tmp_path / "from_config")}))
    monkeypatch.delenv("JUNCTIONLAB_OUT", raising=False)
    code, cap = _run(["color", "--config", str(conf)], capsys)
    assert code == 0 and len(cap.out.splitlines()) == 5
    assert (tmp_path / "from_config" / "colors.csv").exists()
    # flags beat the config file
    code, cap = _run(["color", "--config", str(conf), "--net", "triod"], capsys)
    assert len(cap.out.splitlines()) == 4
    # environment beats the config file, --out beats both
    monkeypatch.setenv("JUNCTIONLAB_OUT", str(tmp_path / "from_env"))
    _run(["color", "--config", str(conf)], capsys)
    assert (tmp_path / "from_env" / "colors.csv").exists()
    _run(["color", "--config", str(conf), "--out", str(tmp_path / "from_flag")], capsys)
    assert (tmp_path / "from_flag" / "colors.csv").exists()


def test_config_rejects_unknown_keys(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"nett": "triod"}))
    assert _run(["color", "--config", str(conf), "--out", str(tmp_path)], capsys)[0] == 1
    conf.write_text("[1, 2]")
    assert _run(["color", "--config", str(conf), "--out", str(tmp_path)], capsys)[0] == 1


def test_flow_and_gamma(tmp_path, capsys):
    assert _run(["flow", "--T", "0.01", "--out", str(tmp_path)], capsys)[0] == 0
    s = json.loads((tmp_path / "flow_summary.json").read_text())
    assert s["signature"] == "1(2,3)" and s["max_junction_residual"] <= 1e-8
    assert _run(["gamma", "--out", str(tmp_path)], capsys)[0] == 0
    g = json.loads((tmp_path / "gamma.json").read_text())
    assert g["gamma"][0][1] == pytest.approx(0.6495216, abs=2e-6)


def test_report_collects(tmp_path, capsys):
    from junctionlab.experiments import ExperimentReport
    assert _run(["report", "--out", str(tmp_path)], capsys)[0] == 1
    ExperimentReport("a", {}, flags={"x": True}).write(tmp_path)
    ExperimentReport("b", {}, flags={"x": False, "y": True}).write(tmp_path)
    code, cap = _run(["report", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert cap.out.splitlines() == ["scenario,passed,flags", "a,1,x=1", "b,0,x=0;y=1"]
