"""First-order thin-layer expansion: corrector solve, interface tensors and certifications.

Conventions.  The base interface is ``curve``; ``h`` the thickness profile on
it; ``kappa`` the signed curvature (negative on a counter-clockwise circle);
``d/dtau`` the arclength derivative in the counter-clockwise direction.
All operator "rows" are pairs ``(value row, traction row)`` of ``(N, 2)``
nodal arrays.

Operator matrices act on flat ``2N`` density vectors ``[x-components;
y-components]`` and are built from the jump-corrected traces in
:class:`thinlayer.boundary_ops.LayerOperators`.
"""
from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .boundary_ops import (LayerOperators, _richardson, eval_dsharp, eval_dsharp_gradient,
                           eval_single_layer, eval_single_layer_gradient, from_flat,
                           psi_moments, to_flat)
from .geometry import ClosedCurve, PerturbedCurve, SampledCurve, ThicknessProfile, make_circle
from .kernels import LameParams, MaterialTriple, conormal
from .transmission import (BackgroundField, ThreePhaseSolution, TwoPhaseSolution,
                           solve_three_phase, solve_two_phase, solve_two_phase_system)

log = logging.getLogger(__name__)

SLOPE_ZEROTH = 0.9
SLOPE_FIRST = 1.4
ROUNDOFF_FLOOR = 1e-11
ZERO_CONTRAST_TOLERANCE = 1e-9


# --- interface tensors --------------------------------------------------------

def _sym(grad):
    return 0.5 * (grad + np.swapaxes(grad, 0, 1))


def _frame(vec, ndim):
    # (N, 2) node vectors -> (2, N, 1, ...) for broadcasting against trailing axes
    return vec.T.reshape((2, vec.shape[0]) + (1,) * (ndim - 1))


@dataclass(frozen=True)
class InterfaceTensors:
    """Actions of the interface tensors ``M_{l,k}`` and ``K_{l,k}``.

    ``outer`` is material ``l`` (the side the traces are mapped to), ``inner``
    is material ``k`` (the side the strain is taken from).  Gradients use the
    component-first layout ``grad[i, j, node, ...] = d_j u_i``; results are
    ``(2, node, ...)``.
    """

    outer: LameParams
    inner: LameParams

    @property
    def m_coefficients(self):
        lo, mo, lk, mk = self.outer.lam, self.outer.mu, self.inner.lam, self.inner.mu
        return (lo * (lk + 2 * mk) / (lo + 2 * mo), 2.0 * mk,
                4.0 * (mo - mk) * (lo + mo) / (lo + 2 * mo))

    @property
    def k_coefficients(self):
        lo, mo, lk, mk = self.outer.lam, self.outer.mu, self.inner.lam, self.inner.mu
        return ((mo * (lk - lo) + 2.0 * (mo - mk) * (lo + mo)) / (mo * (lo + 2 * mo)),
                2.0 * (mk / mo - 1.0),
                2.0 * (mk - mo) * (lo + mo) / (mo * (lo + 2 * mo)))

    def _parts(self, grad, tau):
        e = _sym(grad)
        t = _frame(tau, grad.ndim - 2)
        trace = e[0, 0] + e[1, 1]
        e_tau = np.einsum("ij...,j...->i...", e, t)
        return e, trace, e_tau, np.einsum("i...,i...->...", e_tau, t), t

    def m_tau(self, grad, tau):
        """``(M E) tau`` with ``E`` the symmetric part of ``grad``."""
        c1, c2, c3 = self.m_coefficients
        _, trace, e_tau, tt, t = self._parts(grad, tau)
        return c1 * trace * t + c2 * e_tau + c3 * tt * t

    def k_n(self, grad, tau, normal):
        """``(K E) n``."""
        d1, d2, d3 = self.k_coefficients
        e, trace, _, tt, _ = self._parts(grad, tau)
        nv = _frame(normal, grad.ndim - 2)
        e_n = np.einsum("ij...,j...->i...", e, nv)
        return d1 * trace * nv + d2 * e_n + d3 * tt * nv


def stress_tau(p: LameParams, grad, tau):
    """``(C E) tau`` in the component-first layout."""
    t = _frame(tau, grad.ndim - 2)
    div = grad[0, 0] + grad[1, 1]
    sym = grad + np.swapaxes(grad, 0, 1)
    return p.lam * div * t + p.mu * np.einsum("ij...,j...->i...", sym, t)


def _flatten(comp_first):
    """``(2, N, ...)`` -> ``(2N, ...)``."""
    return comp_first.reshape((2 * comp_first.shape[1],) + comp_first.shape[2:])


def _nodal_grad(grad_nodes):
    """``(N, 2, 2)`` -> component-first ``(2, 2, N)``."""
    return np.moveaxis(np.asarray(grad_nodes), 0, -1)


def _scale(values, matrix):
    """Multiply each row-node of a flat operator by a nodal scalar."""
    return np.tile(values, 2)[:, None] * matrix


def _block_diag(mat):
    z = np.zeros_like(mat)
    return np.block([[mat, z], [z, mat]])


# --- expansion operators ------------------------------------------------------

class ExpansionOperators:
    """Matrices of the expansion operators on one base curve.

    ``Q0`` acts on ``(phi, psi)``, ``Q1`` on ``psi``, ``Z`` on ``phi`` and
    ``R1`` on a layer pair; every matrix is ``(4N, 2N)`` or ``(4N, 4N)`` with
    the value row stacked over the traction row.
    """

    def __init__(self, materials: MaterialTriple, profile: ThicknessProfile):
        self.materials = materials
        self.profile = profile
        self.curve = profile.curve
        curve = self.curve
        self.ops0 = LayerOperators(materials.background, curve)
        self.ops1 = LayerOperators(materials.core, curve)
        self.ops2 = LayerOperators(materials.layer, curve)
        self.h = profile.h
        self.kh = curve.curvature * profile.h
        self.d_tau = _block_diag(curve.d_sigma_matrix())
        self._cache = {}

    def _tangential_flux(self, op_grad, action):
        """``d/dtau (h (action E) tau)`` as a flat operator."""
        return self.d_tau @ _scale(self.h, _flatten(action(op_grad)))

    @property
    def Q0(self) -> np.ndarray:
        if "Q0" not in self._cache:
            o0, o1 = self.ops0, self.ops1
            self._cache["Q0"] = np.block([[o1.S, -o0.S], [o1.traction_trace(-1), -o0.traction_trace(+1)]])
        return self._cache["Q0"]

    @property
    def Q1(self) -> np.ndarray:
        if "Q1" not in self._cache:
            o0, p0, tau = self.ops0, self.materials.background, self.curve.tangent
            value = (-o0.S @ _scale(self.kh, np.eye(2 * len(self.h)))
                     + _scale(self.h, o0.normal_derivative_trace(+1))
                     + o0.dsharp_trace(+1) * np.tile(self.h, 2)[None, :])
            traction = (_scale(self.kh, o0.traction_trace(+1))
                        - o0.traction_trace(+1) * np.tile(self.kh, 2)[None, :]
                        + o0.dsharp_traction_trace(+1) * np.tile(self.h, 2)[None, :]
                        - self._tangential_flux(o0.gradient_trace(+1), lambda g: stress_tau(p0, g, tau)))
            self._cache["Q1"] = np.vstack([value, traction])
        return self._cache["Q1"]

    @property
    def Z(self) -> np.ndarray:
        if "Z" not in self._cache:
            o1, c = self.ops1, self.curve
            tens = InterfaceTensors(self.materials.layer, self.materials.core)
            grad = o1.gradient_trace(-1)
            value = (_scale(self.h, o1.normal_derivative_trace(-1))
                     + _scale(self.h, _flatten(tens.k_n(grad, c.tangent, c.normal))))
            traction = (_scale(self.kh, o1.traction_trace(-1))
                        - self._tangential_flux(grad, lambda g: tens.m_tau(g, c.tangent)))
            self._cache["Z"] = np.vstack([value, traction])
        return self._cache["Z"]

    @property
    def R1(self) -> np.ndarray:
        if "R1" not in self._cache:
            o2, p2, tau = self.ops2, self.materials.layer, self.curve.tangent
            cols = []
            for side in (+1, -1):
                value = _scale(self.h, o2.normal_derivative_trace(side))
                traction = (_scale(self.kh, o2.traction_trace(side))
                            - self._tangential_flux(o2.gradient_trace(side), lambda g: stress_tau(p2, g, tau)))
                cols.append(np.vstack([value, traction]))
            self._cache["R1"] = np.hstack(cols)
        return self._cache["R1"]

    def H1(self, H: BackgroundField) -> np.ndarray:
        """First-order data ``(h dH/dn, kappa h dH/dnu0 - d/dtau(h (C0 E(H)) tau))`` as a flat 4N vector."""
        c, p0 = self.curve, self.materials.background
        grad = H.gradient(c.nodes)
        dn = np.einsum("tij,tj->ti", grad, c.normal)
        trac = conormal(p0, grad, c.normal)
        flux = stress_tau(p0, _nodal_grad(grad), c.tangent).T * self.h[:, None]
        value = self.h[:, None] * dn
        traction = self.kh[:, None] * trac - c.d_sigma(flux)
        return np.concatenate([to_flat(value), to_flat(traction)])


def _pair(vector):
    half = vector.size // 2
    return from_flat(vector[:half]), from_flat(vector[half:])


def _ops_for(materials: MaterialTriple, h: ThicknessProfile) -> ExpansionOperators:
    return ExpansionOperators(materials, h)


def op_Q0(ops: ExpansionOperators, phi, psi):
    return _pair(ops.Q0 @ np.concatenate([to_flat(phi), to_flat(psi)]))


def op_Q1(ops: ExpansionOperators, psi):
    return _pair(ops.Q1 @ to_flat(psi))


def op_Z(ops: ExpansionOperators, phi):
    return _pair(ops.Z @ to_flat(phi))


def op_R1(ops: ExpansionOperators, phi, psi):
    return _pair(ops.R1 @ np.concatenate([to_flat(phi), to_flat(psi)]))


def make_H1(ops: ExpansionOperators, H: BackgroundField):
    return _pair(ops.H1(H))


# --- corrector ----------------------------------------------------------------

@dataclass
class CorrectorSolution:
    """First-order corrector ``u1``.

    Outside the inclusion ``u1 = S0[phi0 - kappa h phi0_zeroth] + Dsharp0[h phi0_zeroth]``;
    inside ``u1 = S1[phi1]``.
    """

    zeroth: TwoPhaseSolution
    operators: ExpansionOperators
    phi1: np.ndarray
    phi0: np.ndarray

    @property
    def curve(self):
        return self.zeroth.curve

    @property
    def _single_density(self):
        return self.phi0 - (self.operators.kh)[:, None] * self.zeroth.psi

    @property
    def _sharp_density(self):
        return self.operators.h[:, None] * self.zeroth.psi

    def eval_field(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        inner = self.zeroth.inside(x)
        p0, p1 = self.zeroth.background, self.zeroth.core
        if np.any(inner):
            out[inner] = eval_single_layer(p1, self.curve, self.phi1, x[inner])
        if np.any(~inner):
            xo = x[~inner]
            out[~inner] = (eval_single_layer(p0, self.curve, self._single_density, xo)
                           + eval_dsharp(p0, self.curve, self._sharp_density, xo))
        return out

    def eval_gradient(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty(x.shape + (2,))
        inner = self.zeroth.inside(x)
        p0, p1 = self.zeroth.background, self.zeroth.core
        if np.any(inner):
            out[inner] = eval_single_layer_gradient(p1, self.curve, self.phi1, x[inner])
        if np.any(~inner):
            xo = x[~inner]
            out[~inner] = (eval_single_layer_gradient(p0, self.curve, self._single_density, xo)
                           + eval_dsharp_gradient(p0, self.curve, self._sharp_density, xo))
        return out

    def interior_trace(self):
        """Value and traction of ``u1`` on the curve from inside, each ``(N, 2)``."""
        o1 = self.operators.ops1
        f = to_flat(self.phi1)
        return from_flat(o1.S @ f), from_flat(o1.traction_trace(-1) @ f)

    def exterior_trace(self):
        """Value and traction of ``u1`` on the curve from outside, each ``(N, 2)``."""
        o0 = self.operators.ops0
        f, g = to_flat(self._single_density), to_flat(self._sharp_density)
        value = o0.S @ f + o0.dsharp_trace(+1) @ g
        traction = o0.traction_trace(+1) @ f + o0.dsharp_traction_trace(+1) @ g
        return from_flat(value), from_flat(traction)

    def decay_combination(self) -> np.ndarray:
        """``phi0 - kappa h psi + d/dtau(h (psi.tau) n + lam0/(2 mu0 + lam0) h (psi.n) tau)``.

        Its rigid-motion moments vanish, which is what makes ``u1`` decay.
        """
        c, psi, h = self.curve, self.zeroth.psi, self.operators.h
        p0 = self.zeroth.background
        ratio = p0.lam / (2 * p0.mu + p0.lam)
        inner = (h * np.sum(psi * c.tangent, axis=1))[:, None] * c.normal
        inner += (ratio * h * np.sum(psi * c.normal, axis=1))[:, None] * c.tangent
        return self._single_density + c.d_sigma(inner)

    def jump_residuals(self) -> dict:
        """Violation of the corrector's interface conditions, max-norm per condition."""
        mats = self.operators.materials
        c, h = self.curve, self.operators.h
        grad_in = _nodal_grad(self.zeroth.interior_gradient_trace())
        k01 = InterfaceTensors(mats.background, mats.core).k_n(grad_in, c.tangent, c.normal)
        k21 = InterfaceTensors(mats.layer, mats.core).k_n(grad_in, c.tangent, c.normal)
        m01 = InterfaceTensors(mats.background, mats.core).m_tau(grad_in, c.tangent)
        m21 = InterfaceTensors(mats.layer, mats.core).m_tau(grad_in, c.tangent)
        value_jump = h[:, None] * (k01 - k21).T
        traction_jump = c.d_sigma(h[:, None] * (m21 - m01).T)
        vi, ti = self.interior_trace()
        ve, te = self.exterior_trace()
        return {"value": float(np.max(np.abs(vi - ve - value_jump))),
                "traction": float(np.max(np.abs(ti - te - traction_jump)))}


def solve_corrector(zeroth: TwoPhaseSolution, profile: ThicknessProfile,
                    layer: LameParams, operators: Optional[ExpansionOperators] = None) -> CorrectorSolution:
    """Solve ``Q0(phi1, phi0) = H1 + Q1(psi_zeroth) - Z(phi_zeroth)``."""
    if profile.curve is not zeroth.curve:
        raise ValueError("thickness profile must live on the zeroth-order curve")
    materials = MaterialTriple(zeroth.background, zeroth.core, layer, require_contrast=False)
    ops = operators or ExpansionOperators(materials, profile)
    rhs = ops.H1(zeroth.field_H) + ops.Q1 @ to_flat(zeroth.psi) - ops.Z @ to_flat(zeroth.phi)
    value, traction = _pair(rhs)
    phi1, phi0 = solve_two_phase_system(zeroth, value, traction)
    return CorrectorSolution(zeroth, ops, phi1, phi0)


# --- identities ---------------------------------------------------------------

def interface_identity_violations(outer: LameParams, inner: LameParams, curve: SampledCurve,
                                  grad_exterior, grad_interior) -> dict:
    """Max nodal violations of the three interface identities for a transmission pair.

    ``grad_exterior``/``grad_interior`` are ``(N, 2, 2)`` one-sided gradients
    of a field that is continuous with continuous traction across ``curve``.
    """
    ge, gi = _nodal_grad(grad_exterior), _nodal_grad(grad_interior)
    tau, n = curve.tangent, curve.normal
    lk, kl = InterfaceTensors(outer, inner), InterfaceTensors(inner, outer)
    id1 = stress_tau(outer, ge, tau) - lk.m_tau(gi, tau)
    id2 = stress_tau(inner, gi, tau) - kl.m_tau(ge, tau)
    jump = np.einsum("ijt,tj->it", ge - gi, n)
    id3a = jump - lk.k_n(gi, tau, n)
    id3b = jump + kl.k_n(ge, tau, n)
    scale = max(float(np.max(np.abs(ge))), float(np.max(np.abs(gi))), 1e-300)
    return {"identity1": float(np.max(np.abs(id1))) / scale,
            "identity2": float(np.max(np.abs(id2))) / scale,
            "identity3": float(max(np.max(np.abs(id3a)), np.max(np.abs(id3b)))) / scale}


def tensor_identities_check(solution: TwoPhaseSolution) -> dict:
    """Identity violations (relative to the largest gradient entry) on the solved interface."""
    return interface_identity_violations(solution.background, solution.core, solution.curve,
                                         solution.exterior_gradient_trace(),
                                         solution.interior_gradient_trace())


def probed_identity_violations(solution: TwoPhaseSolution, relative_delta: float = 1e-3) -> dict:
    """Identity violations from gradients probed at ``x +- k delta n`` (``k = 1, 2, 4``).

    The one-sided samples are extrapolated to the curve quadratically, as in
    :func:`thinlayer.boundary_ops.jump_relation_violations`.
    """
    c = solution.curve
    delta = relative_delta * c.mesh_width
    sides = {}
    for side in (+1, -1):
        samples = [solution.eval_gradient(c.nodes + side * k * delta * c.normal) for k in (1, 2, 4)]
        sides[side] = _richardson(samples)
    return interface_identity_violations(solution.background, solution.core, c, sides[+1], sides[-1])


# --- measurement functional -----------------------------------------------------

def measurement_functional(u_eps: ThreePhaseSolution, u: TwoPhaseSolution, F: BackgroundField,
                           S: SampledCurve) -> float:
    """``int_S (u_eps - u) . dF/dnu0 - (du_eps/dnu0 - du/dnu0) . F``."""
    p0 = u.background
    _check_measurement_curve(u.curve, S)
    x = S.nodes
    du = u_eps.eval_field(x) - u.eval_field(x)
    dt = u_eps.eval_conormal_on_curve(S) - u.eval_conormal_on_curve(S)
    integrand = np.sum(du * F.traction(p0, x, S.normal), axis=1) - np.sum(dt * F.value(x), axis=1)
    return float(np.sum(integrand * S.weights))


def rhs_functional(u: TwoPhaseSolution, v: TwoPhaseSolution, profile: ThicknessProfile,
                   layer: LameParams) -> float:
    """``int_dD h ([(M01 - M21) E(u)] tau . E(v) tau + [(K21 - K01) E(u)] n . (C1 E(v)) n)``.

    Multiply by ``eps`` to compare with :func:`measurement_functional`.
    """
    c = u.curve
    p0, p1 = u.background, u.core
    gu, gv = _nodal_grad(u.interior_gradient_trace()), _nodal_grad(v.interior_gradient_trace())
    tau, n = c.tangent, c.normal
    m_diff = InterfaceTensors(p0, p1).m_tau(gu, tau) - InterfaceTensors(layer, p1).m_tau(gu, tau)
    k_diff = InterfaceTensors(layer, p1).k_n(gu, tau, n) - InterfaceTensors(p0, p1).k_n(gu, tau, n)
    ev_tau = np.einsum("ijt,tj->it", _sym(gv), tau)
    stress_n = conormal(p1, gv.transpose(2, 0, 1), n).T
    integrand = np.sum(m_diff * ev_tau, axis=0) + np.sum(k_diff * stress_n, axis=0)
    return float(np.sum(profile.h * integrand * c.weights))


def _check_measurement_curve(curve: SampledCurve, S: SampledCurve):
    _, dist, side = curve.closest_point(S.nodes)
    if np.any(side < 0) or np.min(dist) < 5.0 * max(curve.mesh_width, S.mesh_width):
        raise ValueError("measurement curve must enclose the inclusion and stay away from it")


# --- certification ------------------------------------------------------------

def fit_slope(eps: Sequence[float], errors: Sequence[float]) -> float:
    eps, errors = np.asarray(eps, float), np.asarray(errors, float)
    if np.any(errors <= 0):
        return math.nan
    return float(np.polyfit(np.log(eps), np.log(errors), 1)[0])


def is_monotone(eps: Sequence[float], errors: Sequence[float], floor: float = ROUNDOFF_FLOOR) -> bool:
    """Errors do not grow as ``eps`` decreases, ignoring values below ``floor``."""
    order = np.argsort(eps)[::-1]
    e = np.maximum(np.asarray(errors, float)[order], floor)
    return bool(np.all(np.diff(e) <= 1e-12 + 1e-9 * e[:-1]))


@dataclass
class ConvergenceRow:
    epsilon: float
    e0: float = math.nan
    e1: float = math.nan
    lhs: float = math.nan
    rhs: float = math.nan
    remainder: float = math.nan
    condition: float = math.nan
    seconds: float = math.nan


@dataclass
class ConvergenceReport:
    """Table of an epsilon-ladder run plus its fitted slopes and verdict."""

    kind: str
    rows: list
    slopes: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    passed: bool = False
    message: str = ""
    extras: dict = field(default_factory=dict)

    COLUMNS = {
        "theorem11": ["epsilon", "e0", "e1", "slope0", "slope1"],
        "theorem12": ["epsilon", "lhs", "rhs", "remainder", "slope"],
    }

    def column(self, name):
        return [getattr(r, name) for r in self.rows]

    def write_csv(self, path):
        cols = self.COLUMNS[self.kind]
        slope_values = {"slope0": self.slopes.get("e0"), "slope1": self.slopes.get("e1"),
                        "slope": self.slopes.get("remainder")}
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(cols)
            for row in self.rows:
                out = []
                for name in cols:
                    value = slope_values[name] if name in slope_values else getattr(row, name)
                    out.append("%.17g" % value if value is not None else "nan")
                writer.writerow(out)

    def summary(self) -> dict:
        return {"kind": self.kind, "passed": self.passed, "slopes": self.slopes,
                "thresholds": self.thresholds, "message": self.message, **self.extras}


def _verdict(eps, errors: dict, thresholds: dict, floor: float):
    """Slopes and failure messages; an error column entirely below ``floor`` passes without a fit."""
    slopes, failures = {}, []
    for name, values in errors.items():
        values = np.asarray(values, float)
        if np.all(values <= floor):
            slopes[name] = math.nan
            continue
        if floor >= ZERO_CONTRAST_TOLERANCE:
            failures.append(f"{name} exceeds {floor:g}: {values.tolist()}")
        slopes[name] = fit_slope(eps, values)
        if not is_monotone(eps, values, floor):
            failures.append(f"{name} is not monotone in eps: {values.tolist()}")
        if not slopes[name] >= thresholds[name]:
            failures.append(f"{name} slope {slopes[name]:.3f} below {thresholds[name]}")
    return slopes, failures


@dataclass
class ExpansionProblem:
    """Everything needed to run an epsilon ladder on one geometry."""

    materials: MaterialTriple
    curve: ClosedCurve
    profile: ThicknessProfile
    H: BackgroundField
    probes: np.ndarray
    nodes_per_epsilon: Optional[dict] = None

    def zeroth(self) -> TwoPhaseSolution:
        return solve_two_phase(self.materials.background, self.materials.core, self.curve, self.H)

    def coated(self, eps: float) -> ThreePhaseSolution:
        """Three-phase solution at ``eps``, on a refined base curve if one is requested."""
        n = (self.nodes_per_epsilon or {}).get(eps, self.curve.n_nodes)
        base = self.curve if n == self.curve.n_nodes else self.curve.refined(n)
        profile = self.profile if base is self.curve else self.profile.on(base)
        return solve_three_phase(self.materials, base, PerturbedCurve(base, profile, eps), self.H)

    @property
    def floor(self) -> float:
        return ZERO_CONTRAST_TOLERANCE if self.materials.is_trivial else ROUNDOFF_FLOOR


def certify_theorem_1_1(problem: ExpansionProblem, ladder: Sequence[float],
                        thresholds=(SLOPE_ZEROTH, SLOPE_FIRST), floor: Optional[float] = None) -> ConvergenceReport:
    """Errors ``max|u_eps - u|`` and ``max|u_eps - u - eps u1|`` over the probes, per ``eps``."""
    ladder = sorted(ladder, reverse=True)
    mats = problem.materials
    zeroth = problem.zeroth()
    corrector = solve_corrector(zeroth, problem.profile, mats.layer)
    u0 = zeroth.eval_field(problem.probes)
    u1 = corrector.eval_field(problem.probes)
    rows = []
    for eps in ladder:
        start = time.perf_counter()
        sol = problem.coated(eps)
        ue = sol.eval_field(problem.probes)
        rows.append(ConvergenceRow(eps, e0=float(np.max(np.abs(ue - u0))),
                                   e1=float(np.max(np.abs(ue - u0 - eps * u1))),
                                   condition=sol.condition, seconds=time.perf_counter() - start))
        log.info("eps=%g e0=%.3e e1=%.3e", eps, rows[-1].e0, rows[-1].e1)
    limits = {"e0": thresholds[0], "e1": thresholds[1]}
    floor = problem.floor if floor is None else floor
    slopes, failures = _verdict(ladder, {"e0": [r.e0 for r in rows], "e1": [r.e1 for r in rows]},
                                limits, floor)
    return ConvergenceReport("theorem11", rows, slopes, limits, not failures, "; ".join(failures),
                             {"corrector_jumps": corrector.jump_residuals()})


def certify_theorem_1_2(problem: ExpansionProblem, F: BackgroundField, S: SampledCurve,
                        ladder: Sequence[float], threshold: float = SLOPE_FIRST,
                        floor: Optional[float] = None) -> ConvergenceReport:
    """``|LHS(eps) - eps RHS|`` of the traction-displacement expansion on an epsilon ladder."""
    ladder = sorted(ladder, reverse=True)
    mats = problem.materials
    u = problem.zeroth()
    v = solve_two_phase(mats.background, mats.core, problem.curve, F, ops0=u.ops0, ops1=u.ops1)
    rhs = rhs_functional(u, v, problem.profile, mats.layer)
    rows = []
    for eps in ladder:
        start = time.perf_counter()
        sol = problem.coated(eps)
        lhs = measurement_functional(sol, u, F, S)
        rows.append(ConvergenceRow(eps, lhs=lhs, rhs=rhs, remainder=abs(lhs - eps * rhs),
                                   condition=sol.condition, seconds=time.perf_counter() - start))
        log.info("eps=%g lhs=%.6e eps*rhs=%.6e", eps, lhs, eps * rhs)
    limits = {"remainder": threshold}
    floor = problem.floor if floor is None else floor
    slopes, failures = _verdict(ladder, {"remainder": [r.remainder for r in rows]}, limits, floor)
    return ConvergenceReport("theorem12", rows, slopes, limits, not failures, "; ".join(failures))


def measurement_circle(curve: SampledCurve, n_nodes: int = 256, scale: float = 2.0) -> ClosedCurve:
    """Circle of radius ``scale * curve.radius`` around the origin."""
    return make_circle(scale * curve.radius, n_nodes)
