import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import circle, kite_curve, smooth_density
from thinlayer import PerturbedCurve, ThicknessProfile
from thinlayer.boundary_ops import (LayerOperators, cross_ops, eval_double_layer, eval_single_layer,
                                    eval_single_layer_gradient, jump_relation_violations, psi_moments,
                                    rigid_motions, to_flat, from_flat)
from thinlayer.kernels import LameParams, conormal
from thinlayer.oracle import direct_single_layer, direct_single_layer_traction, direct_upsampled

P = LameParams(3.0, 2.0)


def test_flat_layout_round_trip():
    values = np.arange(12.0).reshape(6, 2)
    flat = to_flat(values)
    assert np.array_equal(flat[:6], values[:, 0])
    assert np.array_equal(from_flat(flat), values)


@pytest.mark.parametrize("shape", ["circle", "kite"])
def test_far_field_single_layer_matches_direct_sum(shape):
    curve = circle(32) if shape == "circle" else kite_curve(64)
    density = smooth_density(curve)
    targets = np.array([[3.0, 0.5], [-2.5, 2.0], [0.0, -4.0]])
    normals = targets / np.linalg.norm(targets, axis=1)[:, None]
    direct = direct_single_layer(P, curve.nodes, curve.weights, density, targets)
    assert np.allclose(eval_single_layer(P, curve, density, targets), direct, atol=1e-12)
    traction = conormal(P, eval_single_layer_gradient(P, curve, density, targets), normals)
    assert np.allclose(traction, direct_single_layer_traction(P, curve.nodes, curve.weights, density,
                                                              targets, normals), atol=1e-12)


def test_near_field_single_layer_matches_fine_direct_sum():
    curve = circle(64)
    density = smooth_density(curve)
    targets = curve.nodes[[0, 7, 20]] * (1.0 + np.array([1e-2, -2e-2, 5e-2]))[:, None]
    nodes, weights, fine_density = direct_upsampled(curve, density, 4096)
    direct = direct_single_layer(P, nodes, weights, fine_density, targets)
    assert np.allclose(eval_single_layer(P, curve, density, targets), direct, atol=1e-10)


def test_cross_operator_matches_direct_sum_on_offset_curve():
    base = kite_curve(64)
    target = PerturbedCurve(base, ThicknessProfile.constant(base), 0.5)
    density = smooth_density(base)
    nodes, weights, fine_density = direct_upsampled(base, density, 8 * base.n_nodes)
    direct = direct_single_layer(P, nodes, weights, fine_density, target.nodes)
    assembled = from_flat(cross_ops(P, base, target, "single_layer").entries @ to_flat(density))
    assert np.max(np.abs(assembled - direct)) <= 1e-10 * np.max(np.abs(direct))


def test_gauss_identity_for_rigid_motions():
    curve = kite_curve(128)
    ops = LayerOperators(P, curve)
    inside, outside = np.array([[-0.3, 0.2]]), np.array([[3.0, 1.0]])
    for m, theta in enumerate(rigid_motions(curve.nodes)):
        assert np.allclose(eval_double_layer(P, curve, theta, inside), rigid_motions(inside)[m], atol=1e-10)
        assert np.allclose(eval_double_layer(P, curve, theta, outside), 0.0, atol=1e-10)
        assert np.allclose(from_flat(ops.double_layer_trace(-1) @ to_flat(theta)), theta, atol=1e-9)
        assert np.allclose(ops.double_layer_trace(+1) @ to_flat(theta), 0.0, atol=1e-9)


def test_traction_trace_jump_is_identity():
    ops = LayerOperators(P, circle(32))
    assert np.allclose(ops.traction_trace(+1) - ops.traction_trace(-1), np.eye(64), atol=1e-12)


def test_rigid_motion_moments_are_nondegenerate():
    curve = circle(64)
    gram = np.array([psi_moments(curve, theta) for theta in rigid_motions(curve.nodes)])
    assert np.linalg.matrix_rank(gram) == 3


def test_jump_relations_on_circle():
    curve = circle(64)
    violations = jump_relation_violations(P, curve, smooth_density(curve))
    assert len(violations) == 12
    assert max(violations.values()) <= 1e-7


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_single_layer_operator_is_linear(a, b):
    ops = LayerOperators(P, circle(32))
    f = to_flat(smooth_density(circle(32)))
    g = np.roll(f, 5)
    assert np.allclose(ops.S @ (a * f + b * g), a * (ops.S @ f) + b * (ops.S @ g), atol=1e-12)
