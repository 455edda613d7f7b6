"""Boundary-integral solvers for the coated-inclusion transmission problems.

Three-phase problem: an inclusion ``D`` (core material) wrapped in a coating
layer ``D_eps \\ D`` (layer material), embedded in the background.  The field
is represented as

* ``H + S0_eps[phi0]`` outside ``D_eps``,
* ``S2[phi2] + S2_eps[psi2]`` in the layer,
* ``S1[phi1]`` in the core,

and the four densities solve the value and traction matching conditions on
both interfaces.  The two-phase problem drops the layer:
``H + S0[psi]`` outside ``D`` and ``S1[phi]`` inside.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .boundary_ops import (LayerOperators, cross_ops, eval_single_layer,
                           eval_single_layer_gradient, from_flat, psi_moments, to_flat)
from .geometry import ClosedCurve, PerturbedCurve, SampledCurve
from .kernels import (LameParams, MaterialTriple, conormal, kelvin_gradient, kelvin_matrix)

log = logging.getLogger(__name__)

MAX_CONDITION = 1e13


class SolverError(RuntimeError):
    """The discrete system is singular or too ill-conditioned to trust."""


@dataclass(frozen=True)
class BackgroundField:
    """A solution ``H`` of the background Lamé system.

    ``kind="linear"``: ``H(x) = matrix @ x + offset``.
    ``kind="kelvin_point_source"``: ``H`` is column ``column`` of
    ``Gamma_0(x - source)`` for the background material ``material``.
    """

    kind: str
    matrix: tuple = ((0.0, 0.0), (0.0, 0.0))
    offset: tuple = (0.0, 0.0)
    source: tuple = (0.0, 0.0)
    column: int = 0
    material: Optional[LameParams] = None

    def __post_init__(self):
        if self.kind not in ("linear", "kelvin_point_source"):
            raise ValueError(f"unknown background kind {self.kind!r}")
        if self.kind == "kelvin_point_source":
            if self.material is None:
                raise ValueError("a point-source background needs the background material")
            if self.column not in (0, 1):
                raise ValueError("column must be 0 or 1")

    @classmethod
    def linear(cls, matrix, offset=(0.0, 0.0)) -> "BackgroundField":
        m = np.asarray(matrix, dtype=float)
        return cls("linear", tuple(map(tuple, m)), tuple(map(float, offset)))

    @classmethod
    def rigid_motion(cls, index: int) -> "BackgroundField":
        """``(1,0)``, ``(0,1)`` or ``(x2,-x1)`` for index 0, 1, 2."""
        if index == 2:
            return cls.linear([[0.0, 1.0], [-1.0, 0.0]])
        return cls.linear(np.zeros((2, 2)), np.eye(2)[index])

    @classmethod
    def point_source(cls, material: LameParams, source, column: int) -> "BackgroundField":
        return cls("kelvin_point_source", source=tuple(map(float, source)), column=int(column),
                   material=material)

    def value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "linear":
            return x @ np.asarray(self.matrix).T + np.asarray(self.offset)
        return kelvin_matrix(self.material, x - np.asarray(self.source))[..., :, self.column]

    def gradient(self, x) -> np.ndarray:
        """``[..., i, j] = d_j H_i``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "linear":
            return np.broadcast_to(np.asarray(self.matrix), x.shape[:-1] + (2, 2)).copy()
        return kelvin_gradient(self.material, x - np.asarray(self.source))[..., :, self.column, :]

    def traction(self, p: LameParams, x, n) -> np.ndarray:
        return conormal(p, self.gradient(x), n)

    def to_dict(self) -> dict:
        if self.kind == "linear":
            return {"kind": "linear", "matrix": [list(r) for r in self.matrix], "offset": list(self.offset)}
        return {"kind": "kelvin_point_source", "source": list(self.source), "column": self.column}


def _solve_dense(matrix: np.ndarray, rhs: np.ndarray):
    """LU solve with a condition estimate; returns (solution, lu, condition)."""
    lu = scipy.linalg.lu_factor(matrix, check_finite=False)
    anorm = np.linalg.norm(matrix, 1)
    rcond, info = lapack.dgecon(lu[0], anorm, norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if info != 0 or cond > MAX_CONDITION:
        raise SolverError(f"system is singular or ill-conditioned (condition estimate {cond:.2e})")
    sol = scipy.linalg.lu_solve(lu, rhs, check_finite=False)
    residual = np.linalg.norm(matrix @ sol - rhs) / max(np.linalg.norm(rhs), 1e-300)
    log.debug("dense solve: size %d, condition %.3e, residual %.3e", matrix.shape[0], cond, residual)
    return sol, lu, cond, residual


def _side(curve: SampledCurve, x: np.ndarray) -> np.ndarray:
    return curve.closest_point(x)[2]


@dataclass
class TwoPhaseSolution:
    """Field ``H + S0[psi]`` outside ``curve`` and ``S1[phi]`` inside."""

    background: LameParams
    core: LameParams
    curve: ClosedCurve
    field_H: BackgroundField
    phi: np.ndarray  # interior density, (N, 2)
    psi: np.ndarray  # exterior density, (N, 2)
    condition: float
    residual: float
    ops0: LayerOperators = field(repr=False)
    ops1: LayerOperators = field(repr=False)
    lu: tuple = field(repr=False, default=None)

    def inside(self, x) -> np.ndarray:
        return _side(self.curve, np.atleast_2d(x)) < 0

    def eval_field(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        inner = self.inside(x)
        if np.any(inner):
            out[inner] = eval_single_layer(self.core, self.curve, self.phi, x[inner])
        if np.any(~inner):
            xo = x[~inner]
            out[~inner] = self.field_H.value(xo) + eval_single_layer(self.background, self.curve, self.psi, xo)
        return out

    def eval_gradient(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty(x.shape + (2,))
        inner = self.inside(x)
        if np.any(inner):
            out[inner] = eval_single_layer_gradient(self.core, self.curve, self.phi, x[inner])
        if np.any(~inner):
            xo = x[~inner]
            out[~inner] = self.field_H.gradient(xo) + eval_single_layer_gradient(
                self.background, self.curve, self.psi, xo)
        return out

    def eval_scattered(self, x) -> np.ndarray:
        """``u - H`` at exterior points."""
        return eval_single_layer(self.background, self.curve, self.psi, np.atleast_2d(x))

    def interior_gradient_trace(self) -> np.ndarray:
        """``grad u`` on the curve from inside, shape (N, 2, 2)."""
        g = self.ops1.gradient_trace(-1) @ to_flat(self.phi)
        return np.moveaxis(g, -1, 0)

    def exterior_gradient_trace(self) -> np.ndarray:
        """``grad u`` on the curve from outside, shape (N, 2, 2)."""
        g = self.ops0.gradient_trace(+1) @ to_flat(self.psi)
        return np.moveaxis(g, -1, 0) + self.field_H.gradient(self.curve.nodes)

    def eval_conormal_on_curve(self, S: SampledCurve) -> np.ndarray:
        """Background traction of ``u`` on an exterior curve ``S`` (outward normal of ``S``)."""
        return conormal(self.background, self.eval_gradient(S.nodes), S.normal)


def _two_phase_matrix(ops0: LayerOperators, ops1: LayerOperators) -> np.ndarray:
    return np.block([[ops1.S, -ops0.S],
                     [ops1.traction_trace(-1), -ops0.traction_trace(+1)]])


def solve_two_phase(background: LameParams, core: LameParams, curve: ClosedCurve,
                    H: BackgroundField, ops0: Optional[LayerOperators] = None,
                    ops1: Optional[LayerOperators] = None) -> TwoPhaseSolution:
    """Solve ``S1[phi] - S0[psi] = H``, ``dS1[phi]/dnu|- - dS0[psi]/dnu|+ = dH/dnu0`` on ``curve``."""
    ops0 = ops0 or LayerOperators(background, curve)
    ops1 = ops1 or LayerOperators(core, curve)
    n = curve.n_nodes
    matrix = _two_phase_matrix(ops0, ops1)
    rhs = np.concatenate([to_flat(H.value(curve.nodes)),
                          to_flat(H.traction(background, curve.nodes, curve.normal))])
    sol, lu, cond, residual = _solve_dense(matrix, rhs)
    return TwoPhaseSolution(background, core, curve, H, from_flat(sol[:2 * n]),
                            from_flat(sol[2 * n:]), cond, residual, ops0, ops1, lu)


def solve_two_phase_system(solution: TwoPhaseSolution, value_rhs, traction_rhs):
    """Reuse the factorization of ``solution`` for another right-hand side.

    Returns the interior and exterior densities, each ``(N, 2)``.
    """
    n = solution.curve.n_nodes
    rhs = np.concatenate([to_flat(value_rhs), to_flat(traction_rhs)])
    sol = scipy.linalg.lu_solve(solution.lu, rhs, check_finite=False)
    return from_flat(sol[:2 * n]), from_flat(sol[2 * n:])


@dataclass
class ThreePhaseSolution:
    """Densities ``(phi1, phi2, psi2, phi0)`` of the coated-inclusion representation."""

    materials: MaterialTriple
    base: ClosedCurve
    perturbed: PerturbedCurve
    field_H: BackgroundField
    phi1: np.ndarray
    phi2: np.ndarray
    psi2: np.ndarray
    phi0: np.ndarray
    condition: float
    residual: float

    def region(self, x) -> np.ndarray:
        """0 outside the coating, 2 in the layer, 1 in the core."""
        x = np.atleast_2d(x)
        out = np.zeros(len(x), dtype=int)
        inside_outer = _side(self.perturbed, x) < 0
        if np.any(inside_outer):
            inner = _side(self.base, x[inside_outer]) < 0
            out[np.flatnonzero(inside_outer)] = np.where(inner, 1, 2)
        return out

    def _evaluate(self, x, single, with_H):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        mats = self.materials
        region = self.region(x)
        out = np.empty((len(x), 2) + (() if not with_H[1] else (2,)))
        for reg in (0, 1, 2):
            sel = region == reg
            if not np.any(sel):
                continue
            xs = x[sel]
            if reg == 0:
                out[sel] = with_H[0](xs) + single(mats.background, self.perturbed, self.phi0, xs)
            elif reg == 1:
                out[sel] = single(mats.core, self.base, self.phi1, xs)
            else:
                out[sel] = (single(mats.layer, self.base, self.phi2, xs)
                            + single(mats.layer, self.perturbed, self.psi2, xs))
        return out

    def eval_field(self, x) -> np.ndarray:
        return self._evaluate(x, eval_single_layer, (self.field_H.value, False))

    def eval_gradient(self, x) -> np.ndarray:
        return self._evaluate(x, eval_single_layer_gradient, (self.field_H.gradient, True))

    def eval_conormal_on_curve(self, S: SampledCurve) -> np.ndarray:
        return conormal(self.materials.background, self.eval_gradient(S.nodes), S.normal)

    def psi_moments(self) -> dict:
        return {"phi2": psi_moments(self.base, self.phi2),
                "phi0": psi_moments(self.perturbed, self.phi0)}


def solve_three_phase(materials: MaterialTriple, base: ClosedCurve, perturbed: PerturbedCurve,
                      H: BackgroundField) -> ThreePhaseSolution:
    """Assemble and solve the four matching conditions on ``base`` and ``perturbed``."""
    if perturbed.epsilon <= 0:
        raise ValueError("the three-phase problem needs epsilon > 0")
    if perturbed.base is not base:
        raise ValueError("perturbed curve must be built on the given base curve")
    m0, m1, m2 = materials.background, materials.core, materials.layer
    core = LayerOperators(m1, base)
    layer_in = LayerOperators(m2, base)
    layer_out = LayerOperators(m2, perturbed)
    outer = LayerOperators(m0, perturbed)
    s_out_in = cross_ops(m2, perturbed, base, "single_layer").entries
    t_out_in = cross_ops(m2, perturbed, base, "conormal").entries
    s_in_out = cross_ops(m2, base, perturbed, "single_layer").entries
    t_in_out = cross_ops(m2, base, perturbed, "conormal").entries
    zero = np.zeros_like(core.S)
    matrix = np.block([
        [core.S, -layer_in.S, -s_out_in, zero],
        [core.traction_trace(-1), -layer_in.traction_trace(+1), -t_out_in, zero],
        [zero, s_in_out, layer_out.S, -outer.S],
        [zero, t_in_out, layer_out.traction_trace(-1), -outer.traction_trace(+1)],
    ])
    x_eps = perturbed.nodes
    rhs = np.concatenate([np.zeros(4 * base.n_nodes), to_flat(H.value(x_eps)),
                          to_flat(H.traction(m0, x_eps, perturbed.normal))])
    sol, _, cond, residual = _solve_dense(matrix, rhs)
    parts = [from_flat(p) for p in np.split(sol, 4)]
    log.info("three-phase solve: eps=%g, N=%d, condition %.3e, residual %.2e",
             perturbed.epsilon, base.n_nodes, cond, residual)
    return ThreePhaseSolution(materials, base, perturbed, H, *parts, condition=cond, residual=residual)


def default_probes(curve: SampledCurve, count: int = 64, inner: float = 1.5, outer: float = 3.0,
                   seed: int = 0) -> np.ndarray:
    """Points in the annulus ``inner*R <= |x - c| <= outer*R`` around the curve's centroid.

    ``R`` is the largest centroid distance of the curve, so the annulus
    stays clear of the curve for non-unit geometries.
    """
    center = np.average(curve.nodes, axis=0, weights=curve.weights)
    radius = float(np.max(np.linalg.norm(curve.nodes - center, axis=1)))
    rng = np.random.default_rng(seed)
    rho = radius * np.sqrt(rng.uniform(inner**2, outer**2, count))
    theta = rng.uniform(0.0, 2.0 * np.pi, count)
    return center + np.stack([rho * np.cos(theta), rho * np.sin(theta)], axis=1)


def circle_probes(radius: float, count: int = 64, center=(0.0, 0.0)) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(count) / count
    return np.asarray(center) + radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
