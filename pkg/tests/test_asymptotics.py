import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CONTRAST, circle, cosine_profile, kite_curve, zeroth_solution
from thinlayer import (BackgroundField, ExpansionProblem, InterfaceTensors, MaterialTriple,
                       ThicknessProfile, certify_theorem_1_1, measurement_functional, rhs_functional,
                       solve_corrector, solve_three_phase, solve_two_phase, tensor_identities_check,
                       PerturbedCurve)
from thinlayer.asymptotics import (ConvergenceReport, ConvergenceRow, _verdict, fit_slope, is_monotone,
                                   measurement_circle, stress_tau)
from thinlayer.boundary_ops import psi_moments, rigid_motions, to_flat
from thinlayer.kernels import LameParams
from thinlayer.transmission import default_probes

MATS = MaterialTriple.from_pairs(*CONTRAST)
lame = st.builds(LameParams, st.floats(0.1, 10.0), st.floats(0.1, 10.0))
gradients = st.lists(st.floats(-3, 3), min_size=4, max_size=4).map(lambda v: np.array(v).reshape(2, 2, 1))
angles = st.floats(0, 2 * np.pi)


def _frame(angle):
    tau = np.array([[np.cos(angle), np.sin(angle)]])
    return tau, np.array([[tau[0, 1], -tau[0, 0]]])


@given(lame, gradients, angles)
def test_equal_materials_give_stress_and_zero_jump(p, grad, angle):
    tau, n = _frame(angle)
    tens = InterfaceTensors(p, p)
    assert np.allclose(tens.m_tau(grad, tau), stress_tau(p, grad, tau), atol=1e-12)
    assert np.array_equal(tens.k_n(grad, tau, n), np.zeros((2, 1)))


@given(lame, gradients, angles, st.floats(1e-9, 1e-6))
def test_tensors_are_continuous_in_the_outer_material(p, grad, angle, shift):
    tau, n = _frame(angle)
    near = InterfaceTensors(LameParams(p.lam + shift, p.mu + shift), p)
    assert np.allclose(near.m_tau(grad, tau), stress_tau(p, grad, tau), atol=1e-4)
    assert np.allclose(near.k_n(grad, tau, n), 0.0, atol=1e-4)


@given(lame, lame, angles, st.floats(-2, 2))
def test_tensors_ignore_rotations(outer, inner, angle, w):
    tau, n = _frame(angle)
    rot = np.array([[0.0, w], [-w, 0.0]]).reshape(2, 2, 1)
    tens = InterfaceTensors(outer, inner)
    assert np.allclose(tens.m_tau(rot, tau), 0.0) and np.allclose(tens.k_n(rot, tau, n), 0.0)


def test_identities_hold_on_solved_kite():
    worst = max(tensor_identities_check(zeroth_solution("kite", 256)).values())
    assert worst <= 1e-8


def test_identities_trivial_at_zero_contrast():
    p = LameParams(2.0, 1.5)
    sol = solve_two_phase(p, p, kite_curve(128), BackgroundField.linear([[1.0, 0.5], [0.5, -0.3]]))
    assert max(tensor_identities_check(sol).values()) <= 1e-12


def test_corrector_vanishes_at_zero_contrast():
    p = LameParams(2.0, 1.5)
    curve = kite_curve(128)
    zeroth = solve_two_phase(p, p, curve, BackgroundField.linear([[1.0, 0.5], [0.5, -0.3]]))
    corr = solve_corrector(zeroth, cosine_profile(curve), p)
    x = np.vstack([default_probes(curve, 16), [[-0.3, 0.0]]])
    assert np.max(np.abs(corr.eval_field(x))) <= 1e-12


def test_corrector_is_linear_in_thickness():
    zeroth = zeroth_solution("kite", 128)
    curve = zeroth.curve
    x = default_probes(curve, 16)
    u1 = solve_corrector(zeroth, ThicknessProfile(curve, 1.0, cos=(0.3,)), MATS.layer).eval_field(x)
    u2 = solve_corrector(zeroth, ThicknessProfile(curve, 2.0, cos=(0.6,)), MATS.layer).eval_field(x)
    assert np.allclose(u2, 2 * u1, atol=1e-12)


def test_corrector_interface_conditions_and_decay_on_kite():
    zeroth = zeroth_solution("kite", 256)
    corr = solve_corrector(zeroth, cosine_profile(zeroth.curve), MATS.layer)
    jumps = corr.jump_residuals()
    assert jumps["value"] <= 1e-8 and jumps["traction"] <= 1e-6
    assert np.max(np.abs(psi_moments(zeroth.curve, corr.decay_combination()))) <= 1e-8


def test_corrector_rejects_foreign_profile():
    zeroth = zeroth_solution("circle", 128)
    with pytest.raises(ValueError, match="zeroth-order curve"):
        solve_corrector(zeroth, ThicknessProfile.constant(circle(64)), MATS.layer)


def test_tangential_integration_by_parts():
    sol = zeroth_solution("kite", 256)
    c, h = sol.curve, cosine_profile(sol.curve).h
    grad = np.moveaxis(sol.exterior_gradient_trace(), 0, -1)
    flux = (h * stress_tau(MATS.background, grad, c.tangent)).T  # (N, 2)
    theta3 = rigid_motions(c.nodes)[2]
    lhs = np.sum(np.sum(c.d_sigma(flux) * theta3, axis=1) * c.weights)
    g = sol.exterior_gradient_trace()
    traction = MATS.background.lam * np.trace(g, axis1=1, axis2=2)[:, None] * c.normal
    traction = traction + MATS.background.mu * np.einsum("tij,tj->ti", g + g.transpose(0, 2, 1), c.normal)
    rhs = -np.sum(h * np.sum(traction * c.tangent, axis=1) * c.weights)
    assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(rhs))


@pytest.mark.parametrize("side", [-1, +1])
def test_reciprocity_of_solved_fields(side):
    a = zeroth_solution("kite", 256)
    b = solve_two_phase(MATS.background, MATS.core, a.curve,
                        BackgroundField.point_source(MATS.background, (4.0, 1.0), 0), a.ops0, a.ops1)
    c = a.curve

    def trace(sol):
        if side < 0:
            f = to_flat(sol.phi)
            return sol.ops1.S @ f, sol.ops1.traction_trace(-1) @ f
        f = to_flat(sol.psi)  # scattered part, which decays
        return sol.ops0.S @ f, sol.ops0.traction_trace(+1) @ f

    (ua, ta), (ub, tb) = trace(a), trace(b)
    w = np.tile(c.weights, 2)
    value = np.sum((ub * ta - ua * tb) * w)
    assert abs(value) <= 1e-8 * np.sqrt(np.sum(ua**2 * w) * np.sum(tb**2 * w))


def test_measurement_functional_vanishes_without_contrast():
    p = LameParams(2.0, 1.5)
    trivial = MaterialTriple.trivial(p)
    base = circle(128)
    profile = cosine_profile(base)
    H, F = BackgroundField.linear([[1.0, 0.5], [0.5, -0.3]]), BackgroundField.linear([[0.3, 1.0], [0.0, 0.7]])
    u = solve_two_phase(p, p, base, H)
    v = solve_two_phase(p, p, base, F)
    ue = solve_three_phase(trivial, base, PerturbedCurve(base, profile, 0.1), H)
    S = measurement_circle(base)
    assert abs(measurement_functional(ue, u, F, S)) <= 1e-12
    assert abs(rhs_functional(u, v, profile, p)) <= 1e-12


def test_measurement_curve_must_enclose_the_inclusion():
    u = zeroth_solution("circle", 128)
    ue = solve_three_phase(MATS, u.curve, PerturbedCurve(u.curve, cosine_profile(u.curve), 0.1), u.field_H)
    with pytest.raises(ValueError, match="enclose"):
        measurement_functional(ue, u, u.field_H, measurement_circle(u.curve, 128, 1.0))


def test_slope_fit_and_monotonicity():
    eps = [0.1, 0.05, 0.025]
    assert fit_slope(eps, [e**2 for e in eps]) == pytest.approx(2.0)
    assert math.isnan(fit_slope(eps, [1.0, 0.0, 1.0]))
    assert is_monotone(eps, [3.0, 2.0, 1.0])
    assert not is_monotone(eps, [1.0, 2.0, 0.5])
    assert is_monotone(eps, [1e-13, 3e-13, 2e-13])
    slopes, failures = _verdict(eps, {"e": [1e-13] * 3}, {"e": 1.4}, 1e-11)
    assert math.isnan(slopes["e"]) and not failures
    _, failures = _verdict(eps, {"e": [1.0, 0.5, 0.25]}, {"e": 1.4}, 1e-11)
    assert failures and "slope" in failures[0]


def test_report_csv_columns(tmp_path):
    rows = [ConvergenceRow(0.1, e0=1.0, e1=0.1), ConvergenceRow(0.05, e0=0.5, e1=0.025)]
    report = ConvergenceReport("theorem11", rows, {"e0": 1.0, "e1": 2.0})
    report.write_csv(tmp_path / "r.csv")
    table = list(csv.reader(open(tmp_path / "r.csv")))
    assert table[0] == ["epsilon", "e0", "e1", "slope0", "slope1"]
    assert table[1] == ["0.10000000000000001", "1", "0.10000000000000001", "1", "2"]


def test_certification_with_refined_nodes_per_epsilon():
    base = circle(64)
    problem = ExpansionProblem(MATS, base, cosine_profile(base), BackgroundField.linear([[1.0, 0.5], [0.5, -0.3]]),
                               default_probes(base, 16), {0.025: 128, 0.0125: 128})
    report = certify_theorem_1_1(problem, [0.1, 0.05, 0.025, 0.0125])
    assert report.passed, report.message
