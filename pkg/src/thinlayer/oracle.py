"""Independent reference solutions.

Two families live here:

* closed-form radial solutions for concentric coated disks under the dilation
  load ``H(x) = amplitude * x``; every region carries a field
  ``a x + b x / |x|^2``, which solves the Lamé system exactly;
* brute-force per-node quadratures of layer potentials, written from the
  kernel formulas with explicit loops and no shared code with
  :mod:`thinlayer.kernels`, used to validate the vectorized assembly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .kernels import LameParams, MaterialTriple


def _radial_traction_row(p: LameParams, r: float):
    # radial traction of a x + b x/|x|^2 is (2(lam+mu) a - 2 mu b / r^2) x/|x|
    return 2.0 * (p.lam + p.mu), -2.0 * p.mu / r**2


@dataclass(frozen=True)
class RadialSolution:
    """Piecewise field ``a_m x + b_m x/|x|^2`` on core (``|x| < r1``), layer and exterior.

    ``coefficients`` maps region name to ``(a, b)``.  ``r2 == r1`` describes a
    bare inclusion without a layer.
    """

    r1: float
    r2: float
    core: tuple
    layer: tuple
    exterior: tuple
    residual: float = 0.0

    def region_coefficients(self, radius: np.ndarray):
        radius = np.asarray(radius, dtype=float)
        a = np.where(radius < self.r1, self.core[0],
                     np.where(radius < self.r2, self.layer[0], self.exterior[0]))
        b = np.where(radius < self.r1, self.core[1],
                     np.where(radius < self.r2, self.layer[1], self.exterior[1]))
        return a, b


def solve_radial(materials: MaterialTriple, r1: float, r2: float, amplitude: float = 1.0) -> RadialSolution:
    """Coated-disk solution for ``H(x) = amplitude * x``.

    Unknowns ``(a_core, a_layer, b_layer, b_ext)``; ``b_core = 0`` and
    ``a_ext = amplitude``.  Rows enforce continuity of displacement and of
    radial traction at ``r1`` and ``r2``.  ``r2 < r1`` is accepted as a formal
    extension (used by the finite-difference derivative in ``r2``).
    """
    if not r1 > 0:
        raise ValueError("r1 must be positive")
    if not r2 > 0:
        raise ValueError("r2 must be positive")
    m0, m1, m2 = materials.background, materials.core, materials.layer
    c1, _ = _radial_traction_row(m1, r1)
    c2, d2 = _radial_traction_row(m2, r1)
    e2, f2 = _radial_traction_row(m2, r2)
    e0, f0 = _radial_traction_row(m0, r2)
    matrix = np.array([
        [r1, -r1, -1.0 / r1, 0.0],
        [c1, -c2, -d2, 0.0],
        [0.0, r2, 1.0 / r2, -1.0 / r2],
        [0.0, e2, f2, -f0],
    ])
    rhs = np.array([0.0, 0.0, amplitude * r2, amplitude * e0])
    a1, a2, b2, b0 = np.linalg.solve(matrix, rhs)
    residual = float(np.linalg.norm(matrix @ [a1, a2, b2, b0] - rhs) / max(np.linalg.norm(rhs), 1e-300))
    return RadialSolution(r1, r2, (a1, 0.0), (a2, b2), (amplitude, b0), residual)


def solve_radial_two_phase(background: LameParams, core: LameParams, radius: float,
                           amplitude: float = 1.0) -> RadialSolution:
    """Bare disk of radius ``radius``: unknowns ``(a_core, b_ext)``."""
    c1, _ = _radial_traction_row(core, radius)
    e0, f0 = _radial_traction_row(background, radius)
    matrix = np.array([[radius, -1.0 / radius], [c1, -f0]])
    rhs = np.array([amplitude * radius, amplitude * e0])
    a1, b0 = np.linalg.solve(matrix, rhs)
    return RadialSolution(radius, radius, (a1, 0.0), (a1, 0.0), (amplitude, b0))


def radial_eval(sol: RadialSolution, x) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r2 = np.sum(x * x, axis=1)
    a, b = sol.region_coefficients(np.sqrt(r2))
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(r2 > 0, b / r2, 0.0)
    return (a + inv)[:, None] * x


def radial_eval_grad(sol: RadialSolution, x) -> np.ndarray:
    """``[t, i, j] = d_j u_i``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r2 = np.sum(x * x, axis=1)
    a, b = sol.region_coefficients(np.sqrt(r2))
    eye = np.eye(2)
    xx = x[:, :, None] * x[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(r2[:, None, None] > 0,
                        b[:, None, None] * (eye / r2[:, None, None] - 2.0 * xx / r2[:, None, None] ** 2), 0.0)
    return a[:, None, None] * eye + term


def exterior_coefficient_derivative(materials: MaterialTriple, r1: float, thickness: float = 1.0,
                                    amplitude: float = 1.0, step: float = 1e-4) -> float:
    """``d b_ext / d eps`` at ``eps = 0`` for the outer radius ``r1 + eps * thickness``.

    Central differences at ``step`` and ``step/2`` combined by Richardson
    extrapolation; the exterior corrector is then ``db * x / |x|^2``.
    """
    def central(d):
        plus = solve_radial(materials, r1, r1 + d * thickness, amplitude).exterior[1]
        minus = solve_radial(materials, r1, r1 - d * thickness, amplitude).exterior[1]
        return (plus - minus) / (2.0 * d)
    return (4.0 * central(step / 2) - central(step)) / 3.0


def corrector_oracle(materials: MaterialTriple, r1: float, x, thickness: float = 1.0,
                     amplitude: float = 1.0, step: float = 1e-4) -> np.ndarray:
    """Exterior first-order corrector of the coated disk at points ``x`` (``|x| > r1``)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    db = exterior_coefficient_derivative(materials, r1, thickness, amplitude, step)
    return db * x / np.sum(x * x, axis=1)[:, None]


# --- brute-force quadratures --------------------------------------------------

def _kelvin_entry(p: LameParams, r0: float, r1: float, i: int, k: int) -> float:
    rho2 = r0 * r0 + r1 * r1
    r = (r0, r1)
    a = p.A / (2.0 * np.pi)
    b = p.B / (2.0 * np.pi)
    return a * 0.5 * np.log(rho2) * (i == k) - b * r[i] * r[k] / rho2


def _kelvin_derivative(p: LameParams, r0: float, r1: float, i: int, k: int, l: int) -> float:
    rho2 = r0 * r0 + r1 * r1
    r = (r0, r1)
    a = p.A / (2.0 * np.pi)
    b = p.B / (2.0 * np.pi)
    val = a * (i == k) * r[l] / rho2
    val -= b * ((i == l) * r[k] + (k == l) * r[i]) / rho2
    val += 2.0 * b * r[i] * r[k] * r[l] / rho2**2
    return val


def direct_single_layer(p: LameParams, nodes, weights, density, targets) -> np.ndarray:
    """Trapezoid sum of ``Gamma(x - y_j) phi_j w_j`` with explicit loops (targets off the curve)."""
    out = np.zeros((len(targets), 2))
    for t, x in enumerate(targets):
        for j, y in enumerate(nodes):
            r0, r1 = x[0] - y[0], x[1] - y[1]
            for i in range(2):
                for k in range(2):
                    out[t, i] += _kelvin_entry(p, r0, r1, i, k) * density[j][k] * weights[j]
    return out


def direct_single_layer_traction(p: LameParams, nodes, weights, density, targets,
                                 target_normals) -> np.ndarray:
    """Traction at ``targets`` (normal ``target_normals``) of the single layer, by explicit loops."""
    out = np.zeros((len(targets), 2))
    for t, (x, n) in enumerate(zip(targets, target_normals)):
        grad = np.zeros((2, 2))  # grad[i, l] = d_l u_i
        for j, y in enumerate(nodes):
            r0, r1 = x[0] - y[0], x[1] - y[1]
            for i in range(2):
                for l in range(2):
                    for k in range(2):
                        grad[i, l] += _kelvin_derivative(p, r0, r1, i, k, l) * density[j][k] * weights[j]
        div = grad[0, 0] + grad[1, 1]
        for i in range(2):
            out[t, i] = p.lam * div * n[i] + p.mu * sum((grad[i, l] + grad[l, i]) * n[l] for l in range(2))
    return out


def direct_upsampled(source, density, m: int):
    """Nodes, weights and interpolated density of ``source`` on an ``m``-point grid."""
    s = 2.0 * np.pi * np.arange(m) / m
    x, xs, _ = source.at(s)
    weights = np.linalg.norm(xs, axis=1) * 2.0 * np.pi / m
    n = len(density)
    coeffs = np.fft.fft(np.asarray(density, dtype=float), axis=0) / n
    k = np.fft.fftfreq(n, 1.0 / n)
    k[n // 2] = 0.0  # Nyquist mode split symmetrically: cos term only
    vals = np.real(np.exp(1j * np.outer(s, k)) @ coeffs)
    vals += np.real(np.outer(np.cos(n // 2 * s), coeffs[n // 2]))
    vals -= np.real(coeffs[n // 2])[None, :]
    return x, weights, vals


def radial_region_gradient(sol: RadialSolution, x, region: str) -> np.ndarray:
    """Gradient ``[t, i, j]`` of one region's closed form, evaluated anywhere (including on interfaces)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    a, b = getattr(sol, region)
    r2 = np.sum(x * x, axis=1)[:, None, None]
    xx = x[:, :, None] * x[:, None, :]
    return a * np.eye(2) + b * (np.eye(2) / r2 - 2.0 * xx / r2**2)
