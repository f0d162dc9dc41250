import math

import numpy as np
import pytest

from setguard import simkit as sk
from setguard import transforms as tf
from setguard.controllers import OpenLoop, StateFeedbackGain
from setguard.errors import NonFiniteState, OutOfSet
from setguard.plants import LinearPlant


# ---------------------------------------------------------------- disturbance

def test_noise_is_zero_order_hold_and_seeded():
    spec = sk.DisturbanceSpec(seed=4)
    a, b = sk.NoiseStream(spec), sk.NoiseStream(spec)
    ts = np.arange(0, 3, 0.01)
    fa = [sk.disturbance_eval(spec, t, a)[0] - (0.1 + math.sin(3 * t)) for t in ts]
    fb = [sk.disturbance_eval(spec, t, b)[0] - (0.1 + math.sin(3 * t)) for t in ts]
    assert fa == fb
    held = np.array(fa).reshape(30, 10)
    assert np.allclose(held, held[:, :1], atol=1e-12)
    assert np.all(np.abs(held) <= 1.0)


def test_noise_statistics():
    spec = sk.DisturbanceSpec(seed=1, noise_power=0.1, sample_time=0.1)
    s = sk.NoiseStream(spec)
    d = np.array([s.sample(i)[0] for i in range(20000)])
    # variance noise_power / sample_time = 1
    assert d.mean() == pytest.approx(0.0, abs=0.03)
    assert d.std() == pytest.approx(1.0, rel=0.03)


def test_other_disturbance_kinds():
    assert sk.disturbance_eval(sk.DisturbanceSpec("zero"), 1.0)[0] == 0.0
    assert sk.disturbance_eval(sk.DisturbanceSpec("constant", value=2.5), 1.0, channels=2).tolist() == [2.5, 2.5]
    spec = sk.DisturbanceSpec("tabulated", times=(0.0, 2.0), values=(0.0, 4.0))
    assert sk.disturbance_eval(spec, 0.5)[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        sk.DisturbanceSpec("tabulated", times=(0.0,), values=(1.0,))
    with pytest.raises(ValueError):
        sk.DisturbanceSpec("bogus")


def test_hold_index_boundaries():
    spec = sk.DisturbanceSpec(sample_time=0.1)
    assert [sk.hold_index(spec, t) for t in (0.0, 0.0999, 0.1, 0.3)] == [0, 0, 1, 3]


# ---------------------------------------------------------------- integrator

def test_rk4_step_exact_on_linear():
    f = lambda x, t: np.array([x[1], -x[0]])  # noqa: E731
    x = np.array([1.0, 0.0])
    h = 0.01
    for k in range(100):
        x = sk.rk4_step(f, x, k * h, h)
    assert x == pytest.approx([math.cos(1.0), -math.sin(1.0)], abs=1e-9)


def test_rk4_step_non_finite():
    with pytest.raises(NonFiniteState):
        sk.rk4_step(lambda x, t: x * 1e308, np.array([1e10]), 0.0, 1.0)
    with pytest.raises(ValueError):
        sk.rk4_step(lambda x, t: x, np.array([1.0]), 0.0, 0.0)


# ---------------------------------------------------------------- scenarios

def short(s, horizon=1.0, **kw):
    from dataclasses import replace
    return replace(s, horizon=horizon, **kw)


def test_scenario_rejects_start_outside_set():
    with pytest.raises(OutOfSet):
        sk.preset_example5(x0=np.array([3.0, 1.0]))


def test_margin_start_needs_augmented_boundaries():
    with pytest.raises(OutOfSet):
        sk.preset_example6("margin", augmented=False)
    s = sk.preset_example6("margin")
    assert s.transform.profiles[0].kind == "margin_augmented"


def test_scenario_validation():
    with pytest.raises(ValueError):
        sk.preset_example5(x0=np.array([2.0, 1.0, 0.0]))
    with pytest.raises(ValueError):
        sk.preset_example5(h=0.0)


def test_short_run_shapes_and_margins():
    s = short(sk.preset_example5(), 0.5)
    traj, rep = sk.run_scenario(s)
    assert len(traj) == 501
    assert traj.x.shape == (501, 2) and traj.y.shape == (501, 1) and traj.u.shape == (501, 1)
    assert traj.t[-1] == pytest.approx(0.5)
    assert rep.violation_count == 0 and rep.min_margin[0] > 0
    assert rep.tightened_inside
    assert np.all(traj.g_lower[:, 0] < traj.y[:, 0]) and np.all(traj.y[:, 0] < traj.g_upper[:, 0])


def test_stride_subsamples():
    traj, _ = sk.run_scenario(short(sk.preset_example5(), 0.5, stride=10))
    assert len(traj) == 51
    assert traj.t[1] == pytest.approx(0.01)


def test_control_matches_law_on_samples():
    s = short(sk.preset_example5(), 0.3)
    traj, _ = sk.run_scenario(s)
    from setguard.controllers import state_feedback_u
    for k in (0, 100, 300):
        u = state_feedback_u(s.controller, s.plant, traj.x[k], traj.eps[k])
        assert traj.u[k] == pytest.approx(u, rel=1e-12)
        assert traj.eps[k] == pytest.approx(tf.phi_inverse(s.transform, traj.y[k], traj.t[k]), abs=1e-12)


def test_cross_check_integrated_eps_converges():
    """eps integrated from its own ODE and eps recovered from y must agree up to RK4 error."""
    errs = []
    for h in (1e-3, 5e-4):
        s = short(sk.preset_example5(disturbance=False), 1.0, cross_check=True, h=h)
        traj, _ = sk.run_scenario(s)
        assert traj.eps_integrated is not None
        errs.append(np.max(np.abs(traj.eps_integrated - traj.eps)))
    assert errs[0] < 1e-4
    assert math.log2(errs[0] / errs[1]) > 3.5


def test_open_loop_violates():
    s = sk.open_loop_variant(short(sk.preset_example5(disturbance=False), 2.0))
    assert isinstance(s.controller, OpenLoop)
    traj, rep = sk.run_scenario(s)
    assert rep.violation_count > 0
    assert rep.first_violation_time is not None
    assert any(k == "ConstraintViolation" for _, k, _ in traj.events)
    assert not traj.aborted


def test_blow_up_aborts():
    plant = LinearPlant([[1e6]], [[1.0]], [[0.0]], [[1.0]])
    T = tf.Transform("logistic_between", (tf.tabulated([0.0, 10.0], [-1e300, -1e300], [1e300, 1e300]),))
    s = sk.Scenario("blowup", plant, T, OpenLoop(1), sk.DisturbanceSpec("zero"), [1.0], horizon=1.0,
                    h=0.1, max_level=6)
    traj, _ = sk.run_scenario(s)
    assert traj.aborted
    assert traj.events[-1][1] == "NonFiniteState"


def test_example7_hurwitz_variant_short():
    s = short(sk.preset_example7(nonhurwitz=False), 1.0)
    traj, rep = sk.run_scenario(s)
    assert rep.violation_count == 0
    assert traj.z.shape == (1001, 3)


def test_certify_dispatch():
    r5 = sk.certify(sk.preset_example5())
    assert r5.feasible and r5.beta == pytest.approx(0.5)
    r7 = sk.certify(sk.preset_example7())
    assert r7.feasible and any("not Hurwitz" in f for f in r7.hypothesis_flags)
    rol = sk.certify(sk.open_loop_variant(sk.preset_example5()))
    assert not rol.feasible


def test_csv_format():
    traj, _ = sk.run_scenario(short(sk.preset_example6("base", gamma=100.0), 0.01))
    text = sk.trajectory_csv(traj)
    lines = text.splitlines()
    assert lines[0] == "t,x1,x2,x3,y1,y2,eps1,eps2,u1,u2,f,glo1,glo2,ghi1,ghi2"
    assert len(lines) == 1 + len(traj)
    row = [float(v) for v in lines[5].split(",")]
    assert row[1] == traj.x[4, 0]  # 17 significant digits roundtrip exactly


def test_csv_events_block():
    traj, _ = sk.run_scenario(sk.open_loop_variant(short(sk.preset_example5(disturbance=False), 0.2)))
    tail = [ln for ln in sk.trajectory_csv(traj).splitlines() if ln.startswith("#")]
    assert tail and tail[0].startswith("# event t=") and "ConstraintViolation" in tail[0]


def test_monitor_empty_trajectory():
    traj = sk.Trajectory(*(np.zeros((0, 1)) for _ in range(9)))
    traj.t = np.zeros(0)
    rep = sk.monitor(traj)
    assert rep.violation_count == 0 and rep.first_violation_time is None


def test_state_feedback_gain_changes_trajectory():
    a, _ = sk.run_scenario(short(sk.preset_example5(K=1.0), 0.2))
    b, _ = sk.run_scenario(short(sk.preset_example5(K=5.0), 0.2))
    assert not np.allclose(a.y, b.y)
    assert isinstance(sk.preset_example5(K=5.0).controller, StateFeedbackGain)
