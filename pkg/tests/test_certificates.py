import numpy as np
import pytest

from setguard import certificates as ce
from setguard import simkit as sk
from setguard import transforms as tf
from setguard.controllers import OutputFeedbackGain
from setguard.errors import NonPositiveP
from setguard.plants import LinearPlant, SectorPlant


def ex6_plant(gphi=0.1):
    s = sk.preset_example6("base", gphi=(gphi,) * 3)
    return s.plant, s.controller, s.transform


def test_sym_eig_max_rejects_asymmetric():
    with pytest.raises(ValueError):
        ce.sym_eig_max([[0.0, 1.0], [0.0, 0.0]])
    assert ce.sym_eig_max([[2.0, 0.0], [0.0, -1.0]]) == pytest.approx(2.0)


def test_lmi_closed_form_example():
    r = ce.lmi_2x2(0.5, 1.0)
    assert r.feasible and r.beta_min == pytest.approx(0.5, abs=1e-15)
    assert not ce.lmi_2x2(0.5, 0.5).feasible
    with pytest.raises(ValueError):
        ce.lmi_2x2(-1.0, 1.0)


def test_lmi_beta_min_is_tight():
    # determinant oracle: (alpha-K)(-beta) - 1/4 = 0 at the boundary
    for a, K in ((0.1, 2.0), (1.0, 1.5), (0.3, 7.0)):
        b = ce.lmi_2x2(a, K).beta_min
        assert (a - K) * (-b) - 0.25 == pytest.approx(0.0, abs=1e-14)
        assert ce.sym_eig_max(ce.lmi_2x2_matrix(a, K, b * 1.001)) < 0
        assert ce.sym_eig_max(ce.lmi_2x2_matrix(a, K, b * 0.999)) > 0


def _dynamics_oracle(plant, gains, transform, x, eps, t, f):
    """Time derivative of (x, eps) straight from the plant, the law and the eps equation."""
    y = plant.L @ x
    u = gains.K1 @ y + gains.gamma * gains.K2 @ eps
    phi = plant.phi(x, t)
    xd = plant.A @ x + plant.G @ phi + plant.B @ u + plant.D @ f
    ed = tf.epsilon_rate(transform, eps, plant.L @ xd, t)
    return xd, ed, phi


@pytest.mark.parametrize("gamma", [1.0, 10.0])
def test_extended_system_matches_direct_dynamics(gamma):
    s = sk.preset_example6("base", gamma=gamma)
    plant, g, T = s.plant, s.controller, s.transform
    rng = np.random.default_rng(7)
    for _ in range(25):
        t = float(rng.uniform(0, 10))
        eps = rng.normal(size=2) * 2
        y = tf.phi_forward(T, eps, t)
        # pick x consistent with y = L x
        x = np.linalg.lstsq(plant.L, y, rcond=None)[0] + rng.normal() * np.array([1.0, 1.0, -3.0])
        f = np.array([rng.normal()])
        xd, ed, phi = _dynamics_oracle(plant, g, T, x, eps, t, f)
        J = tf.phi_jacobian_diag(T, eps, t)
        sysx = ce.build_extended_system(plant, g, 1.0 / J)
        fe = np.concatenate([f, tf.phi_partial_t(T, eps, t), tf.phi_forward(T, eps, t)])
        got = sysx.A_e @ np.concatenate([x, eps]) + sysx.G_e @ phi + sysx.D_e @ fe
        assert got == pytest.approx(np.concatenate([xd, ed]), rel=1e-9, abs=1e-9)


def test_extended_system_validation():
    plant, g, _ = ex6_plant()
    with pytest.raises(ValueError):
        ce.build_extended_system(plant, g, [1.0])
    with pytest.raises(ValueError):
        ce.build_extended_system(plant, g, [1.0, -1.0])


def test_non_positive_P_rejected():
    plant, g, _ = ex6_plant()
    sysx = ce.build_extended_system(plant, g, [1.0, 1.0])
    with pytest.raises(NonPositiveP):
        ce.extended_block_matrix(sysx, -np.eye(5), 0.01, 1.0, 1.0)
    with pytest.raises(NonPositiveP):
        ce.extended_block_matrix(sysx, np.triu(np.ones((5, 5))), 0.01, 1.0, 1.0)


def test_block_matrix_monotone_in_C():
    plant, g, _ = ex6_plant()
    sysx = ce.build_extended_system(plant, g, [0.5, 0.5])
    P = np.eye(5)
    vals = [ce.sym_eig_max(ce.extended_block_matrix(sysx, P, 0.01, 10.0, C)) for C in (0, 0.5, 1, 2, 5)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_sprocedure_bound_on_samples(certified_ex6):
    """When the block inequality holds, V' + aV - b|f_e|^2 <= -(C^2|x|^2 - |phi|^2) for random samples."""
    s, rep = certified_ex6
    assert rep.feasible
    plant = s.plant
    rng = np.random.default_rng(11)
    lower = np.array(rep.vertex_lower)
    for _ in range(10_000):
        ji = np.exp(rng.uniform(np.log(lower), np.log(rep.jac_inv_cap)))
        sysx = ce.build_extended_system(plant, s.controller, ji)
        xe = rng.normal(size=5) * rng.choice([1e-2, 1.0, 1e2])
        x = xe[:3]
        phi = plant.phi(x, 0.0)
        fe = rng.normal(size=5)
        P = rep.P
        form = ce.sprocedure_form(sysx, P, s.alpha, rep.beta)
        z = np.concatenate([xe, phi, fe])
        lhs = z @ form @ z
        slack = s.C ** 2 * x @ x - phi @ phi
        assert slack >= -1e-12
        assert lhs <= -slack + 1e-7 * (1 + xe @ P @ xe + fe @ fe)


def test_certified_instance_reports(certified_ex6):
    s, rep = certified_ex6
    assert rep.feasible
    assert rep.beta is not None
    assert len(rep.max_eig_per_vertex) == 4
    assert all(e <= ce.FEAS_TOL for _, e in rep.max_eig_per_vertex)
    assert np.linalg.eigvalsh(rep.P)[0] > 0
    assert any("cap" in n for n in rep.notes)
    d = rep.to_dict()
    assert d["feasible"] and d["jac_inv_cap"] == s.jac_inv_cap
    assert "FEASIBLE" in rep.to_text()


def test_certificate_independent_recheck(certified_ex6):
    """Rebuild every vertex with the oracle-free builder and re-evaluate eigenvalues directly."""
    s, rep = certified_ex6
    for v, e in rep.max_eig_per_vertex:
        sysx = ce.build_extended_system(s.plant, s.controller, np.array(v))
        A_e, G_e, D_e, E, P = sysx.A_e, sysx.G_e, sysx.D_e, sysx.E, rep.P
        psi = A_e.T @ P + P @ A_e + s.alpha * P + s.C ** 2 * E.T @ E
        M = np.block([[psi, P @ G_e, P @ D_e],
                      [G_e.T @ P, -np.eye(3), np.zeros((3, 5))],
                      [D_e.T @ P, np.zeros((5, 3)), -rep.beta * np.eye(5)]])
        assert np.linalg.eigvalsh(M)[-1] == pytest.approx(e, abs=1e-6 * max(1.0, rep.beta))
        assert np.linalg.eigvalsh(M)[-1] <= ce.FEAS_TOL


def test_fixed_P_conservatism_in_C(certified_ex6):
    s, rep = certified_ex6
    plant = s.plant
    verdicts = []
    for C in (0.5, 1.0, 1e3, 1e6):
        r = ce.verify_extended(plant, s.controller, s.transform, s.alpha, C, P=rep.P, beta=rep.beta,
                               jac_inv_cap=s.jac_inv_cap)
        verdicts.append(r.feasible)
    # once infeasible for some C, stays infeasible for larger C
    assert verdicts[0] and verdicts[1]
    assert verdicts == sorted(verdicts, reverse=True)
    assert not verdicts[-1]


def test_huge_C_infeasible_without_refinement():
    plant, g, T = ex6_plant(0.0)
    r = ce.verify_extended(plant, g, T, 0.01, 1e6, refine=False)
    assert not r.feasible


def test_default_sector_gain_not_certified_by_lyapunov_stage():
    """With gphi = 0.1 the scaled-Lyapunov stage finds no certificate; the report says so instead of forcing one."""
    plant, g, T = ex6_plant(0.1)
    r = ce.verify_extended(plant, g, T, 0.01, 1.0, refine=False)
    assert not r.feasible
    assert r.beta is None
    assert any("no beta" in n for n in r.notes)
    assert r.vertex_lower and r.jac_inv_cap == 1e3


def test_non_hurwitz_nominal_is_infeasible_report():
    base = LinearPlant(np.eye(2), np.eye(2), np.ones((2, 1)), np.eye(2))
    plant = SectorPlant(base, np.zeros((2, 2)), "zero", 0.0)
    g = OutputFeedbackGain(np.zeros((2, 2)), np.eye(2), 1.0)
    T = tf.Transform("logistic_between", (tf.tabulated([0, 20], [-1, -1], [1, 1]),) * 2)
    r = ce.verify_extended(plant, g, T, 0.5, 0.0)
    assert not r.feasible
    assert any("not Hurwitz" in f for f in r.hypothesis_flags)


def test_jac_inv_lower_logistic():
    T = tf.Transform("logistic_between", (tf.tabulated([0, 20], [-1, -1], [1, 1]),))
    assert ce.jac_inv_lower(T, np.linspace(0, 10, 11)) == pytest.approx([2.0])


def test_lmi_report_flags_do_not_block():
    r = ce.lmi_report(0.5, 3.0, extra_flags=["A not Hurwitz"])
    assert r.feasible and r.hypothesis_flags == ["A not Hurwitz"]
    assert not ce.lmi_report(0.5, 3.0, checks=[("x", False)]).feasible
