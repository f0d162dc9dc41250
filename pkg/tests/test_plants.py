from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles as orc
from setguard import plants as pl
from setguard.errors import DegenerateTransfer, ZeroDenominator


def ex7(row):
    A = [[0, 1, 0], [0, 0, 1], row]
    return pl.LinearPlant(A, [[0], [0], [1]], [[1], [1], [1]], [[1, 0, 0]])


def test_linear_plant_shapes_and_properties():
    p = pl.LinearPlant([[0, 1], [1, 2]], [[0], [1]], [[1], [1]], [[1, 2]])
    assert (p.n, p.m, p.l, p.v) == (2, 1, 1, 1)
    assert p.controllable and p.observable
    assert not p.hurwitz
    with pytest.raises(ValueError):
        p.A[0, 0] = 5.0


def test_linear_plant_rejects_bad_dims():
    with pytest.raises(ValueError):
        pl.LinearPlant([[0, 1], [1, 2]], [[0], [1], [2]], [[1], [1]], [[1, 2]])
    with pytest.raises(ValueError):
        pl.LinearPlant([[0, np.nan], [1, 2]], [[0], [1]], [[1], [1]], [[1, 2]])


def test_uncontrollable_detected():
    p = pl.LinearPlant([[-1, 0], [0, -2]], [[1], [0]], [[1], [1]], [[1, 1]])
    assert not p.controllable and p.observable


def test_sector_plant_checks_bound():
    base = pl.LinearPlant(np.eye(3), np.ones((3, 1)), np.ones((3, 1)), [[1, 0, 0]])
    sp = pl.SectorPlant(base, np.eye(3), "sine", 1.0)
    x = np.array([0.3, -2.0, 5.0])
    assert np.linalg.norm(sp.phi(x, 0.0)) <= np.linalg.norm(x)
    with pytest.raises(ValueError):
        pl.SectorPlant(base, np.eye(3), "sine", 0.5)


def test_sector_rhs_adds_nonlinearity():
    base = pl.LinearPlant(np.eye(2), [[0], [1]], [[1], [0]], [[1, 0]])
    sp = pl.SectorPlant(base, [[0, 0], [1, 1]], "sine", 1.0)
    x = np.array([0.5, -0.2])
    want = x + np.array([0.0, 1.0]) * 2.0 + np.array([1.0, 0.0]) * 0.3 + np.array([0, np.sin(0.5) + np.sin(-0.2)])
    assert pl.sector_rhs(sp, x, [2.0], [0.3]) == pytest.approx(want, abs=1e-15)


# ---------------------------------------------------------------- polynomials

def test_binomial_and_poly_helpers():
    assert pl.binomial_expand(0.01, 2) == pytest.approx([1e-4, 0.02, 1.0])
    assert pl.poly_mul([1, 1], [1, -1]) == pytest.approx([1, 0, -1])
    assert pl.poly_add([1, 0, 0], [2, 3]) == pytest.approx([1, 2, 3])
    assert pl.poly_eval([1, 0, -1], 3.0) == 8.0
    assert pl.poly_trim([0, 0, 1, 2]) == pytest.approx([1, 2])


def test_char_poly_ex7():
    q, _ = pl.char_poly_adjugate(ex7([-1, -3, -3]).A)
    assert q == pytest.approx([1, 3, 3, 1], abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: arrays(float, (n, n), elements=st.floats(-3, 3, width=32))))
def test_char_poly_matches_exact_cofactor_expansion(A):
    q, Madj = pl.char_poly_adjugate(A)
    want = [float(c) for c in orc.char_poly_exact(A.tolist())]
    scale = max(1.0, np.abs(A).max()) ** A.shape[0]
    assert np.max(np.abs(q - want)) <= 1e-10 * scale
    adj = orc.adjugate_exact(A.tolist())
    n = A.shape[0]
    for i in range(n):
        for j in range(n):
            exact = [float(c) for c in adj[i][j]]
            exact = [0.0] * (n - len(exact)) + exact  # descending, degree n-1
            got = [Madj[k][i, j] for k in reversed(range(n))]
            assert np.max(np.abs(np.array(got) - exact)) <= 1e-10 * scale


def test_char_poly_order_limit():
    with pytest.raises(ValueError):
        pl.char_poly_adjugate(np.eye(13))


# ---------------------------------------------------------------- transfer form

def test_transfer_ex7_exact():
    tfm = pl.transfer_from_state_space(ex7([-1, -3, -3]))
    assert tfm.rho == 3
    assert np.max(np.abs(tfm.Q - [1, 3, 3, 1])) <= 1e-9
    assert np.max(np.abs(tfm.R - [1])) <= 1e-9
    # D = [1,1,1]: L adj(pI - A) D = p^2 + 4 p + 7
    assert tfm.Dp == pytest.approx([1, 4, 7], abs=1e-12)


def test_transfer_matches_frequency_response():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(1, 6))
        p = pl.LinearPlant(rng.normal(size=(n, n)), rng.normal(size=(n, 1)), rng.normal(size=(n, 1)),
                           rng.normal(size=(1, n)))
        try:
            tfm = pl.transfer_from_state_space(p)
        except DegenerateTransfer:
            continue
        for s in (0.3 + 1.1j, -2.0 + 0.5j, 4j):
            direct = (p.L @ np.linalg.solve(s * np.eye(n) - p.A, p.B)).item()
            via = pl.poly_eval(tfm.R, s) / pl.poly_eval(tfm.Q, s)
            assert via == pytest.approx(direct, rel=1e-8, abs=1e-10)


def test_degenerate_transfer():
    p = pl.LinearPlant([[-1, 0], [0, -2]], [[1], [0]], [[1], [1]], [[0, 1]])
    with pytest.raises(DegenerateTransfer):
        pl.transfer_from_state_space(p)


def test_realization_matches_ratio():
    num = [2.0, -1.0, 0.5]
    den = [0.5, 1.0, 3.0, 2.0]
    Ac, Bc, Cc, dc = pl.realize_siso(num, den)
    for s in (1j, 0.2 - 3j, 5.0):
        assert pl.realization_response(Ac, Bc, Cc, dc, s) == pytest.approx(
            pl.poly_eval(num, s) / pl.poly_eval(den, s), rel=1e-12)


def test_realization_proper_and_static():
    Ac, Bc, Cc, dc = pl.realize_siso([3.0, 1.0], [1.0, 2.0])
    assert dc == 3.0
    assert pl.realization_response(Ac, Bc, Cc, dc, 1j) == pytest.approx((3j + 1) / (1j + 2))
    Ac, Bc, Cc, dc = pl.realize_siso([4.0], [2.0])
    assert Ac.shape == (0, 0) and dc == 2.0


def test_realization_errors():
    with pytest.raises(ZeroDenominator):
        pl.realize_siso([1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        pl.realize_siso([1.0, 0.0, 0.0], [1.0, 1.0])


def test_exact_oracle_sanity():
    # det(pI - [[1,2],[3,4]]) = p^2 - 5p - 2
    assert orc.char_poly_exact([[1, 2], [3, 4]]) == [Fraction(1), Fraction(-5), Fraction(-2)]
