from __future__ import annotations

import json

import pytest

from junctionlab.errors import ClassInfeasible, NoAlternateClass, UnresolvedEpsilon
from junctionlab.experiments import (ExperimentReport, class_separation, convergence_study, expander_config,
                                     strictly_decreasing, uniqueness_experiment)
from junctionlab.networks import triod


def test_strictly_decreasing():
    assert strictly_decreasing([3, 2, 1])
    assert not strictly_decreasing([3, 3, 1])
    assert strictly_decreasing([1.0])


def test_report_roundtrip(tmp_path):
    rep = ExperimentReport("demo", {"eps": [0.1, 0.05]}, metrics=[{"eps": 0.1, "sup": 1 / 3}],
                           flags={"ok": True}, notes=["n"], figures={"pic.svg": "<svg/>\n", "pic.pgm": b"P5"})
    back = ExperimentReport.from_json(rep.to_json())
    assert back.to_json() == rep.to_json()
    assert back.passed
    assert back.metrics[0]["sup"] == pytest.approx(1 / 3, rel=1e-11)
    names = sorted(p.name for p in rep.write(tmp_path))
    assert names == ["demo_metrics.csv", "demo_pic.pgm", "demo_pic.svg", "demo_report.json"]
    assert (tmp_path / "demo_metrics.csv").read_text().splitlines()[0] == "eps,sup"
    assert not ExperimentReport("empty", {}).passed


def test_convergence_ladder_validation():
    net = triod()
    with pytest.raises(ValueError):
        convergence_study(net, [0.05, 0.08])
    with pytest.raises(ValueError):
        convergence_study(net, [])
    with pytest.raises(UnresolvedEpsilon):
        convergence_study(net, [0.08, 0.05], grid_rule=lambda e: e)


def test_uniqueness_guards():
    with pytest.raises(ClassInfeasible):
        uniqueness_experiment("1(2,3)", 4, angles_deg=(45, 135, 225, 315), cfg=expander_config(0.03))
    with pytest.raises(ValueError):
        uniqueness_experiment("1(2,3)", 3, perturbations=({"bogus": 1}, {"sigma": 0.02}))
    with pytest.raises(NoAlternateClass):
        class_separation(3)


def test_uniqueness_report_is_deterministic():
    cfg = expander_config(0.03)
    a = uniqueness_experiment("1(2,3)", 3, R=2.0, cfg=cfg, angles_deg=(0, 150, 240))
    b = uniqueness_experiment("1(2,3)", 3, R=2.0, cfg=cfg, angles_deg=(0, 150, 240))
    assert a.to_json() == b.to_json()
    assert a.figures == b.figures
    d = json.loads(a.to_json())
    assert d["params"]["uniqueness_tol"] == pytest.approx(0.04)
    assert set(d["flags"]) == {"within_tolerance"}
