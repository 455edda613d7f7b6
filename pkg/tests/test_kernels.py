import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thinlayer.kernels import (LameParams, MaterialTriple, conormal, kelvin_gradient, kelvin_hessian,
                               kelvin_matrix, strain, tensor_apply, traction_kernel,
                               traction_kernel_adjoint)

lame = st.builds(LameParams, st.floats(0.1, 10.0), st.floats(0.1, 10.0))
points = st.tuples(st.floats(-3, 3), st.floats(-3, 3)).filter(lambda r: np.hypot(*r) > 0.2)


def test_lame_params_reject_non_physical():
    with pytest.raises(ValueError, match="shear modulus"):
        LameParams(1.0, 0.0)
    with pytest.raises(ValueError, match="lambda \\+ mu"):
        LameParams(-2.0, 1.0)


def test_material_triple_contrast_rules():
    with pytest.raises(ValueError, match="violates"):
        MaterialTriple.from_pairs((1, 1), (0.5, 2), (5, 4))
    with pytest.raises(ValueError, match="no contrast"):
        MaterialTriple.from_pairs((1, 1), (1, 1), (5, 4))
    assert MaterialTriple.trivial(LameParams(1, 1)).is_trivial
    assert MaterialTriple.from_pairs((1, 1), (1, 1), (5, 4), require_contrast=False)[1] == LameParams(1, 1)


@given(lame, points)
def test_kelvin_matrix_symmetric_and_even(p, r):
    r = np.array(r)
    g = kelvin_matrix(p, r)
    assert np.allclose(g, g.T)
    assert np.allclose(g, kelvin_matrix(p, -r))


@given(lame, points)
def test_kelvin_derivatives_match_finite_differences(p, r):
    r = np.array(r)
    step = 1e-5
    for l in range(2):
        e = np.eye(2)[l] * step
        fd = (kelvin_matrix(p, r + e) - kelvin_matrix(p, r - e)) / (2 * step)
        assert np.allclose(kelvin_gradient(p, r)[..., l], fd, atol=1e-7)
        fd2 = (kelvin_gradient(p, r + e) - kelvin_gradient(p, r - e)) / (2 * step)
        assert np.allclose(kelvin_hessian(p, r)[..., l], fd2, atol=1e-6)


@given(lame, points)
def test_kelvin_columns_solve_lame_system(p, r):
    h = kelvin_hessian(p, np.array(r))  # [i, k, l, m]
    laplacian = np.einsum("ikmm->ik", h)
    grad_div = np.einsum("lkli->ik", h)
    residual = p.mu * laplacian + (p.lam + p.mu) * grad_div
    assert np.max(np.abs(residual)) <= 1e-10 * max(1.0, np.max(np.abs(h)))


@given(lame, st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_tensor_apply_matches_conormal(p, entries):
    a, b, c = entries
    e = np.array([[a, b], [b, c]])
    n = np.array([0.6, 0.8])
    assert np.allclose(tensor_apply(p.tensor, e) @ n, conormal(p, e, n))


def test_tensor_apply_rejects_non_symmetric():
    with pytest.raises(ValueError, match="symmetric"):
        tensor_apply(LameParams(1, 1).tensor, np.array([[0.0, 1.0], [0.0, 0.0]]))


@given(lame, st.floats(-3, 3))
def test_rotation_has_no_strain_or_traction(p, w):
    grad = np.array([[0.0, w], [-w, 0.0]])
    assert np.allclose(strain(grad), 0.0)
    assert np.allclose(conormal(p, grad, np.array([1.0, 0.0])), 0.0)


@given(lame, points, st.floats(0, 2 * np.pi))
def test_traction_kernels_are_conormals_of_kelvin_columns(p, r, angle):
    r = np.array(r)
    n = np.array([np.cos(angle), np.sin(angle)])
    g = kelvin_gradient(p, r)  # [i, k, l]
    # adjoint: traction at x of column k
    for k in range(2):
        assert np.allclose(traction_kernel_adjoint(p, r, n)[:, k], conormal(p, g[:, k, :], n))
        # source side: derivative in y flips the sign, and Gamma is symmetric
        assert np.allclose(traction_kernel(p, r, n)[k, :], conormal(p, -g[:, k, :], n))


def test_coincident_points_raise():
    with pytest.raises(ZeroDivisionError):
        kelvin_matrix(LameParams(1, 1), np.zeros(2))
