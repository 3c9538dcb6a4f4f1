import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bctrack import dynamics
from bctrack.dynamics import FaultInterval, FaultMode, FaultSchedule
from bctrack.errors import AssumptionViolation, ParseError
from bctrack.expr import compile_expression

SCHED = dynamics.alternating_schedule()


def test_alternating_schedule_at_seven_seconds():
    assert dynamics.apply_faults(SCHED, [3.0, 2.0], 7.0).tolist() == [1.0, 1.0]


def test_modes():
    assert FaultMode.normal().apply(4.2) == 4.2
    assert FaultMode.ploe(0.5).apply(0.0) == 0.0
    assert FaultMode.tloe(1.0).apply(123.0) == 1.0
    with pytest.raises(ValueError):
        FaultMode.ploe(1.5)


def test_schedule_validation():
    iv = FaultInterval(0, 1, FaultMode.tloe(0.0))
    with pytest.raises(AssumptionViolation):
        FaultSchedule(((iv,), (iv,)))
    with pytest.raises(ValueError):
        FaultSchedule(((FaultInterval(2, 1, FaultMode.normal()),),))
    with pytest.raises(ValueError):
        FaultSchedule(((FaultInterval(0, 2, FaultMode.ploe(0.5)), FaultInterval(1, 3, FaultMode.ploe(0.5))),))
    with pytest.raises(ValueError):
        FaultSchedule(((FaultInterval(0, 12, FaultMode.ploe(0.5)),),), period=10)


def test_single_actuator_total_loss_is_refused():
    with pytest.raises(AssumptionViolation):
        FaultSchedule(((FaultInterval(0, 1, FaultMode.tloe(0.0)),),))


def test_boundary_sweep():
    u = np.array([2.0, -3.0])
    for t, slope in [(0.0, 1), (4.9999, 1), (5.0, 0), (9.9999, 0), (10.0, 1), (15.0, 0), (20.0, 1)]:
        w = dynamics.apply_faults(SCHED, u, t)
        if slope:
            assert w.tolist() == u.tolist()
        else:
            assert w.tolist() == [1.0, 0.5 * u[1]]


@given(st.floats(0, 100), st.floats(-10, 10), st.floats(-10, 10))
def test_faults_piecewise_linear(t, u1, u2):
    w = dynamics.apply_faults(SCHED, [u1, u2], t)
    faulty = math.fmod(t, 10.0) >= 5.0
    assert w[0] == (1.0 if faulty else u1)
    assert w[1] == (0.5 * u2 if faulty else u2)


def test_numerical_model():
    m = dynamics.numerical_model()
    assert dynamics.drift_increment(m, [0, 0], [0, 0]).tolist() == [0, 0]
    assert dynamics.drift_increment(m, [1, 0], [0, 0]) == pytest.approx([0.2, 0.0])
    assert dynamics.drift_increment(m, [0, 0], [1, 1]) == pytest.approx([0.0, 3.0])
    assert not dynamics.diffusion_row(m, [0, 0]).any()
    assert dynamics.diffusion_row(m, [math.pi / 12, 1]).ravel() == pytest.approx([0.2, 0.2])


def test_vehicle_model():
    m = dynamics.vehicle_model()
    assert dynamics.drift_increment(m, [0, 1], [0, 0]) == pytest.approx([1.0, -1.2])
    assert dynamics.diffusion_row(m, [3.0, -2.0]).ravel() == pytest.approx([0.0, 0.2])
    assert m.l.tolist() == [2.0, 2.0]
    assert m.drift[0]([5.0, 1.0]) == 0


def test_builtins():
    models, leader, sched = dynamics.builtin_numerical_example()
    assert len(models) == 4 and all(m.l.tolist() == [1, 2] for m in models)
    assert leader.value(0) == 0 and leader.derivative(0) == pytest.approx(8 / 3)
    kinds = [m.kind for m in sched.modes(7.0)]
    assert kinds == [dynamics.FaultKind.TLOE, dynamics.FaultKind.PLOE]
    models, leader, _ = dynamics.builtin_vehicle_example()
    assert leader.derivative(0) == pytest.approx(0.8)


def test_model_requires_actuation():
    with pytest.raises(ValueError):
        dynamics.FollowerModel(2, (lambda x: 0, lambda x: 0), (lambda x: 0, lambda x: 0), np.zeros(2))


def test_expression_grammar():
    f = compile_expression("0.2*sin(6*x1*x2) - -x2 + 3", 2)
    x = [0.3, -0.7]
    assert f(x) == pytest.approx(0.2 * math.sin(6 * 0.3 * -0.7) + (-0.7) + 3)
    for bad in ("x3", "x1**2", "exp(x1)", "x1/2", "__import__('os')", "1 +"):
        with pytest.raises(ParseError):
            compile_expression(bad, 2)


def test_expression_model_matches_builtin():
    m = dynamics.FollowerModel(
        2, (compile_expression("0.2*x1", 2), compile_expression("0.2*x1*x2", 2)),
        (compile_expression("0.2*sin(6*x1)", 2), compile_expression("0.2*sin(6*x1*x2)", 2)),
        np.array([1.0, 2.0]))
    ref = dynamics.numerical_model()
    for x in ([0.1, 0.3], [-1.0, 2.0]):
        assert np.allclose(dynamics.drift_increment(m, x, [0.5, -1]), dynamics.drift_increment(ref, x, [0.5, -1]))
        assert np.allclose(dynamics.diffusion_row(m, x), dynamics.diffusion_row(ref, x))
