import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CONTRAST, circle, cosine_profile, kite_curve, zeroth_solution
from thinlayer import (BackgroundField, MaterialTriple, PerturbedCurve, SolverError, ThicknessProfile,
                       solve_radial_two_phase, solve_three_phase, solve_two_phase)
from thinlayer import transmission
from thinlayer.kernels import LameParams, kelvin_gradient, kelvin_matrix
from thinlayer.oracle import radial_eval
from thinlayer.transmission import circle_probes, default_probes, solve_two_phase_system

MATS = MaterialTriple.from_pairs(*CONTRAST)


def test_background_field_kinds():
    lin = BackgroundField.linear([[1.0, 2.0], [3.0, 4.0]], (0.5, -0.5))
    x = np.array([[1.0, 1.0]])
    assert np.allclose(lin.value(x), [[3.5, 6.5]])
    assert np.allclose(lin.gradient(x), [[[1.0, 2.0], [3.0, 4.0]]])
    ps = BackgroundField.point_source(MATS.background, (3.0, 0.0), 1)
    assert np.allclose(ps.value(x), kelvin_matrix(MATS.background, x - [3.0, 0.0])[..., :, 1])
    assert np.allclose(ps.gradient(x), kelvin_gradient(MATS.background, x - [3.0, 0.0])[..., :, 1, :])
    assert ps.to_dict() == {"kind": "kelvin_point_source", "source": [3.0, 0.0], "column": 1}
    assert np.allclose(BackgroundField.rigid_motion(2).value(x), [[1.0, -1.0]])
    with pytest.raises(ValueError):
        BackgroundField("quadratic")
    with pytest.raises(ValueError, match="material"):
        BackgroundField("kelvin_point_source")


@pytest.mark.parametrize("shape", ["circle", "kite"])
@pytest.mark.parametrize("index", [0, 1, 2])
def test_two_phase_rigid_motions_pass_through(shape, index):
    curve = circle(128) if shape == "circle" else kite_curve(256)
    H = BackgroundField.rigid_motion(index)
    sol = solve_two_phase(MATS.background, MATS.core, curve, H)
    points = np.vstack([default_probes(curve, 16), curve.nodes[::8] - 0.1 * curve.normal[::8]])
    assert np.max(np.abs(sol.eval_field(points) - H.value(points))) <= 1e-10


def test_two_phase_matches_radial_oracle():
    sol = solve_two_phase(MATS.background, MATS.core, circle(128), BackgroundField.linear(np.eye(2)))
    probes = np.vstack([circle_probes(2.0, 32), circle_probes(0.5, 8)])
    exact = radial_eval(solve_radial_two_phase(MATS.background, MATS.core, 1.0), probes)
    assert np.max(np.abs(sol.eval_field(probes) - exact)) <= 1e-12


def test_zero_contrast_two_phase_is_the_background():
    p = LameParams(2.0, 1.5)
    H = BackgroundField.linear([[1.0, 0.5], [0.5, -0.3]])
    sol = solve_two_phase(p, p, kite_curve(128), H)
    x = default_probes(kite_curve(128), 16)
    assert np.max(np.abs(sol.eval_field(x) - H.value(x))) <= 1e-12


@settings(max_examples=10)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_two_phase_is_linear_in_the_background(a, b):
    base = zeroth_solution("kite", 128)
    other = BackgroundField.point_source(MATS.background, (4.0, 1.0), 0)
    x = default_probes(base.curve, 8)
    c = base.curve
    phi, psi = solve_two_phase_system(base, a * base.field_H.value(c.nodes) + b * other.value(c.nodes),
                                      a * base.field_H.traction(MATS.background, c.nodes, c.normal)
                                      + b * other.traction(MATS.background, c.nodes, c.normal))
    lhs = a * base.eval_scattered(x) + b * solve_two_phase(MATS.background, MATS.core, c, other,
                                                           base.ops0, base.ops1).eval_scattered(x)
    combined = transmission.eval_single_layer(MATS.background, c, psi, x)
    assert np.allclose(combined, lhs, atol=1e-11)


def test_ill_conditioned_system_raises(monkeypatch):
    monkeypatch.setattr(transmission, "MAX_CONDITION", 1.0)
    with pytest.raises(SolverError, match="ill-conditioned"):
        solve_two_phase(MATS.background, MATS.core, circle(32), BackgroundField.linear(np.eye(2)))


def test_three_phase_preconditions():
    base = circle(32)
    other = circle(64)
    pert = PerturbedCurve(other, ThicknessProfile.constant(other), 0.1)
    with pytest.raises(ValueError, match="base curve"):
        solve_three_phase(MATS, base, pert, BackgroundField.linear(np.eye(2)))
    with pytest.raises(ValueError, match="epsilon > 0"):
        solve_three_phase(MATS, base, PerturbedCurve(base, ThicknessProfile.constant(base), 0.0),
                          BackgroundField.linear(np.eye(2)))


def test_three_phase_continuity_across_both_interfaces():
    base = kite_curve(256)
    profile = cosine_profile(base)
    pert = PerturbedCurve(base, profile, 0.1)
    sol = solve_three_phase(MATS, base, pert, BackgroundField.linear([[1.0, 0.5], [0.5, -0.3]]))
    d = 1e-7
    for curve in (base, pert):
        idx = slice(None, None, 16)
        outside = sol.eval_field(curve.nodes[idx] + d * curve.normal[idx])
        inside = sol.eval_field(curve.nodes[idx] - d * curve.normal[idx])
        assert np.max(np.abs(outside - inside)) <= 1e-6
    regions = sol.region(np.array([[-0.3, 0.0], base.nodes[0] + 0.05 * profile.h[0] * base.normal[0],
                                   [5.0, 5.0]]))
    assert list(regions) == [1, 2, 0]


def test_probes_are_deterministic_and_outside():
    curve = kite_curve(128)
    a, b = default_probes(curve, 32, seed=3), default_probes(curve, 32, seed=3)
    assert np.array_equal(a, b)
    _, dist, side = curve.closest_point(a)
    assert np.all(side > 0) and np.min(dist) > 0.3
