import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as orc
from setguard import controllers as ct
from setguard.errors import NonHurwitzFilter, SingularLB
from setguard.plants import LinearPlant

EX5 = LinearPlant([[0, 1], [1, 2]], [[0], [1]], [[1], [1]], [[1, 2]])


def test_state_feedback_law():
    g = ct.StateFeedbackGain(1.0, [1.0, 1.0])
    x = np.array([2.0, 1.0])
    # LB = 2, LA x = [1*0+2*1, 1*1+2*2] @ x = 2*2 + 5*1 = 9
    assert ct.state_feedback_u(g, EX5, x, [0.5]) == pytest.approx([-(9 + 0.5) / 2])


def test_state_feedback_singular_lb():
    p = LinearPlant([[0, 1], [1, 2]], [[1], [0]], [[1], [1]], [[0, 1]])
    with pytest.raises(SingularLB):
        ct.state_feedback_u(ct.StateFeedbackGain(1.0, [0, 0]), p, [1, 1], [0])


def test_gain_validation():
    with pytest.raises(ValueError):
        ct.StateFeedbackGain(0.0, [1, 1])
    with pytest.raises(ValueError):
        ct.OutputFeedbackGain([[1, 2]], [[1]], 1.0)
    with pytest.raises(ValueError):
        ct.OutputFeedbackGain([[1]], [[1]], -1.0)


def test_output_feedback_law_scales_with_gamma():
    g = ct.OutputFeedbackGain([[0, 0], [-0.01, -0.01]], [[1.5, -1.75], [-1, 1]], 10.0)
    u = ct.output_feedback_u(g, [1.0, 2.0], [0.2, -0.1])
    assert u == pytest.approx([10 * (0.3 + 0.175), -0.03 + 10 * (-0.3)])


def test_filter_polynomial_ex7():
    d = ct.filter_polynomial(0.01, 0.1, 3)
    assert d == pytest.approx([1e-4, 0.02, 1.0, 0.001], abs=1e-15)
    assert ct.hurwitz_poly(d)
    assert orc.routh_hurwitz(d)


def test_filter_non_hurwitz_rejected():
    # p (mu p + 1)^2 + a mu loses stability once a mu is large
    with pytest.raises(NonHurwitzFilter):
        ct.build_filtered_controller([1, 3, 3, 1], [1], 3.0, 1.0, 10.0)


def test_filtered_realization_is_minus_KQ_over_R_delta():
    c = ct.build_filtered_controller([1, 3, 3, 1], [1], 3.0, 0.01, 0.1)
    assert c.rho == 3 and c.order == 3
    from setguard.plants import poly_eval, realization_response
    for s in (0.5j, 2.0 + 1j):
        want = -3.0 * poly_eval([1, 3, 3, 1], s) / poly_eval(c.delta, s)
        assert realization_response(*c.realization, s) == pytest.approx(want, rel=1e-10)


@settings(max_examples=300)
@given(st.lists(st.floats(-5, 5).filter(lambda x: abs(x) > 1e-3), min_size=2, max_size=6))
def test_hurwitz_poly_agrees_with_routh(c):
    c = [1.0] + c
    r = np.roots(c)
    # skip near-marginal cases where neither test is well conditioned
    if np.min(np.abs(r.real)) < 1e-6:
        return
    assert ct.hurwitz_poly(c) == orc.routh_hurwitz(c)


def test_hurwitz_poly_edge_cases():
    with pytest.raises(ValueError):
        ct.hurwitz_poly([0.0, 1.0])
    assert ct.hurwitz_poly([3.0])
    assert not ct.hurwitz_poly([1.0, 1.0, 0.0])


def test_T_matrix_check_ex5():
    M = ct.closed_loop_T_matrix(EX5, [1.0, 1.0])
    assert np.allclose(M, EX5.A - EX5.B @ (EX5.L @ EX5.A) / 2 - np.array([[1.0], [1.0]]) @ EX5.L)
    assert ct.check_T_matrix(EX5, [1.0, 1.0]) == bool(np.max(np.linalg.eigvals(M).real) < 0)


def test_lbk2_hurwitz_ex6():
    B = np.array([[1.0, 2.0], [1.0, 1.0], [1.0, 2.0]])
    L = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0]])
    p = LinearPlant(np.zeros((3, 3)), B, np.ones((3, 1)), L)
    g = ct.OutputFeedbackGain([[0, 0], [-0.01, -0.01]], [[1.5, -1.75], [-1, 1]])
    M = L @ B @ g.K2
    assert ct.lbk2_hurwitz(p, g) == bool(np.max(np.linalg.eigvals(M).real) < 0)
    assert ct.lbk2_hurwitz(p, g)
