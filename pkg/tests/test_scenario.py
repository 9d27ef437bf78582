import pytest

from setguard.design import CartDesign
from setguard.polytope import equals
from setguard.scenario import (
    BUNDLED_DIR,
    TRACE_HEADER,
    Disturbance,
    Scenario,
    ScenarioError,
    bundled_scenario,
    load_model,
    parse_model,
    parse_scenario,
    read_trace,
    run_scenario,
    trace_csv,
    write_trace,
)
from setguard.plant import StudentController
from setguard.polytope import load
from setguard.supervisor import Mode

MINIMAL = """
[plant]
kind = Cart2D
[controller]
kind = StepPD
ref = 0.1
[run]
horizon = 0.5
"""


def test_bundled_model_is_default_design():
    assert load_model(BUNDLED_DIR / "cart_model.ini") == CartDesign()


def test_parse_model_errors():
    with pytest.raises(ScenarioError):
        parse_model("[other]\nx = 1\n")
    with pytest.raises(ScenarioError):
        parse_model("[model]\na.0 = 0 1\n")


def test_bundled_sets_match_fresh_computation(sup_sets):
    assert equals(load(BUNDLED_DIR / "sets" / "oinf.poly"), sup_sets.o_inf)
    assert equals(load(BUNDLED_DIR / "sets" / "sinf.poly"), sup_sets.s_inf)


def test_parse_minimal_scenario():
    sc = parse_scenario(MINIMAL)
    assert sc.plant == "Cart2D" and sc.supervisor is None and sc.n_ticks == 250
    assert sc.controller.params == {"ref": 0.1}


def test_parse_scenario_errors():
    with pytest.raises(ScenarioError):
        parse_scenario("[plant]\nkind = Cart2D\n")
    with pytest.raises(ScenarioError):
        parse_scenario(MINIMAL.replace("Cart2D", "Boat"))
    with pytest.raises(ScenarioError):
        parse_scenario(MINIMAL + "[disturbance.0]\ntime = 0.1\ntarget = pendulum_angular_velocity\nmagnitude = 1\n")
    with pytest.raises(ScenarioError):
        parse_scenario(MINIMAL + "[supervisor]\nsinf = missing.poly\n")


def test_auto_sets(sup_sets):
    sc = parse_scenario(MINIMAL + "[supervisor]\nsinf = auto\noinf = auto\n")
    assert equals(sc.supervisor.s_inf, sup_sets.s_inf)


def test_trace_csv_format(tmp_path):
    sc = parse_scenario(MINIMAL)
    tr = run_scenario(sc, None)
    text = trace_csv(tr)
    lines = text.splitlines()
    assert lines[0] == ",".join(TRACE_HEADER)
    assert len(lines) == 1 + sc.n_ticks
    first = lines[1].split(",")
    assert first[3] == "" and first[4] == ""
    path = tmp_path / "t.csv"
    write_trace(tr, path)
    rows = read_trace(path)
    assert len(rows) == sc.n_ticks and rows[-1]["mode"] == "Nominal"


def test_disturbance_applied_after_step():
    ctrl = StudentController("StepPD", {"ref": 0.0, "kp": 0.0, "kd": 0.0})
    sc = Scenario("Cart2D", ctrl, (0.0, 0.0), 0.01, disturbances=(Disturbance(0.002, "cart_velocity", 0.5),))
    tr = run_scenario(sc, None)
    assert tr[1].state == (0.0, 0.0) and tr[2].state[1] == 0.5


def test_determinism_with_noise():
    sc = Scenario("Cart2D", StudentController("BangBang", {"u_big": 5.0}), (0.0, 0.0), 1.0, seed=3, input_noise=2.0)
    assert trace_csv(run_scenario(sc, None)) == trace_csv(run_scenario(sc, None))


def test_bundled_scenarios_parse():
    names = sorted(p.stem for p in (BUNDLED_DIR / "scenarios").glob("*.ini"))
    assert names == ["fig3_bottom", "fig3_top", "nominal_step", "unsupervised_unstable"]
    for n in names:
        bundled_scenario(n)


def test_nominal_step_never_flags():
    sc = bundled_scenario("nominal_step")
    tr = run_scenario(sc, sc.supervisor)
    assert all(t.flags == 0 and t.mode is Mode.NOMINAL for t in tr)
    assert abs(tr[-1].state[0] - 0.2) < 1e-3
