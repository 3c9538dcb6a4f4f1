import numpy as np
import pytest

from bctrack import scenario
from bctrack.errors import ParseError, ValidationError




def edit(old, new, name="vehicle"):
    text = scenario.preset_text(name)
    assert old in text
    return text.replace(old, new)


@pytest.mark.parametrize("name", scenario.PRESETS)
def test_presets_load(name):
    sc = scenario.load_preset(name)
    assert sc.name == name
    assert sc.graph.n == 4 and sc.models[0].order == 2 and sc.models[0].M == 2
    assert sc.integrator.steps == 200_000


def test_preset_values(numerical, vehicle):
    assert numerical.integrator.dt == 1e-4 and numerical.integrator.seed == 42
    assert numerical.acceptance.metric == "z_sup"
    assert vehicle.acceptance.h_bar == 2.0
    assert vehicle.gains[0].k == (5.0, 5.0)


def test_unknown_preset():
    with pytest.raises(ParseError):
        scenario.load_preset("nope")


def test_no_leader_links_is_invalid():
    with pytest.raises(ValidationError) as exc:
        scenario.parse_scenario(edit("leader = [2.0, -2.0, 2.0, 2.0]", "leader = [0.0, 0.0, 0.0, 0.0]"))
    assert any("spanning tree" in f for f in exc.value.failures)


def test_initial_error_on_boundary_is_invalid():
    text = edit("x = [[0.1, 0.0], [-0.1, 0.0], [0.3, 0.0], [0.2, 0.0]]",
                "x = [[5.0, 0.0], [-0.1, 0.0], [0.3, 0.0], [0.2, 0.0]]")
    with pytest.raises(ValidationError) as exc:
        scenario.parse_scenario(text)
    assert any("initial error inside envelope" in f for f in exc.value.failures)


def test_every_failure_is_listed():
    text = edit("leader = [2.0, -2.0, 2.0, 2.0]", "leader = [0.0, 0.0, 0.0, 0.0]")
    text = text.replace("dt = 1e-4", "dt = 0.01")
    text = text.replace("[ 0.0,  0.0, 0.0, 0.1],", "[ 0.0,  0.0, 0.0, -0.1],")
    with pytest.raises(ValidationError) as exc:
        scenario.parse_scenario(text)
    f = " | ".join(exc.value.failures)
    assert "dt must be" in f and "spanning tree" in f and "structural balance" in f


def test_all_actuators_lost_is_invalid():
    text = edit('mode = "ploe", value = 0.5', 'mode = "tloe", value = 0.5')
    with pytest.raises(ValidationError) as exc:
        scenario.parse_scenario(text)
    assert any("one actuator effective" in f for f in exc.value.failures)


@pytest.mark.parametrize("old,new,field", [
    ("dt = 1e-4", 'dt = "fast"', "integrator.dt"),
    ("sigma0 = 1.05\n", "", "profile.sigma0"),
    ('metric = "tracking_norm"', 'metric = "other"', "acceptance.metric"),
    ('mode = "ploe"', 'mode = "broken"', "mode"),
    ("k = 5.0", "k = [1.0, 2.0, 3.0]", "gains.k"),
])
def test_parse_errors_name_the_field(old, new, field):
    with pytest.raises(ParseError) as exc:
        scenario.parse_scenario(edit(old, new))
    assert field in str(exc.value)


def test_malformed_toml():
    with pytest.raises(ParseError):
        scenario.parse_scenario("name = [", "bad.toml")


def test_expression_plant_round_trip():
    text = edit('model = "vehicle"\nmass = 0.5\ngravity = 10.0\nkappa = 0.02\nfriction = 0.5\nspread = 0.1',
                'model = "expression"\norder = 2\nl = [1.0, 2.0]\ndrift = ["0.2*x1", "0.2*x1*x2"]\n'
                'diffusion = ["0.2*sin(6*x1)", "0.2*sin(6*x1*x2)"]')
    sc = scenario.parse_scenario(text)
    assert sc.models[0].l.tolist() == [1.0, 2.0]
    assert sc.models[0].drift[1](np.array([2.0, 3.0])) == pytest.approx(1.2)


def test_check_scenario_reports_file_errors(tmp_path):
    p = tmp_path / "s.toml"
    p.write_text(edit("leader = [2.0, -2.0, 2.0, 2.0]", "leader = [0.0, 0.0, 0.0, 0.0]"))
    assert scenario.check_scenario(p)
    assert scenario.check_scenario(tmp_path / "missing.toml")
    p.write_text(scenario.preset_text("vehicle"))
    assert scenario.check_scenario(p) == []
