"""Nyström discretization of elastostatic layer potentials on smooth closed curves.

Vector densities on an ``N``-node curve are stored either as ``(N, 2)``
arrays or flattened component-wise into length ``2N`` vectors
``[u_x(s_0..s_{N-1}), u_y(s_0..s_{N-1})]``; :func:`to_flat` and
:func:`from_flat` convert.  Operator matrices act on flattened vectors.

Quadrature
----------
* Weakly singular (log) kernels use Kress product quadrature.
* Odd kernels homogeneous of degree -1 (double layer and friends) are split
  into a Cauchy part, written as the tangential derivative of a logarithmic
  potential, and a bounded remainder whose diagonal limit is
  ``+-kappa/2`` times a directional derivative of the kernel (evaluated by
  complex step).
* Off-curve potentials use the trapezoid rule for targets farther than
  ``NEAR_FACTOR`` mesh widths and graded Gauss-Legendre panels otherwise.
* Operators between two disjoint curves use the trapezoid rule on an
  upsampled source grid.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import _fourier
from .geometry import SampledCurve
from .kernels import (LameParams, conormal, kelvin_gradient, kelvin_hessian, kelvin_matrix,
                      sharp_kernel, sharp_kernel_adjoint, traction_kernel,
                      traction_kernel_adjoint)

log = logging.getLogger(__name__)

NEAR_FACTOR = 5.5
CROSS_RESOLUTION = 6.5
MAX_UPSAMPLING = 128
_GL_NODES, _GL_WEIGHTS = leggauss(20)
_COMPLEX_STEP = 1e-30


def to_flat(values) -> np.ndarray:
    """``(N, 2)`` -> ``(2N,)``; also accepts ``(N, 2, ...)``."""
    values = np.asarray(values)
    return np.concatenate([values[:, 0], values[:, 1]], axis=0)


def from_flat(vector) -> np.ndarray:
    vector = np.asarray(vector)
    n = vector.shape[0] // 2
    return np.stack([vector[:n], vector[n:]], axis=1)


def rigid_motions(points: np.ndarray) -> np.ndarray:
    """The three rigid displacements ``(1,0)``, ``(0,1)``, ``(x2,-x1)`` at ``points``; shape (3, N, 2)."""
    points = np.asarray(points)
    one, zero = np.ones(len(points)), np.zeros(len(points))
    return np.stack([np.stack([one, zero], 1), np.stack([zero, one], 1),
                     np.stack([points[:, 1], -points[:, 0]], 1)])


def psi_moments(curve: SampledCurve, values) -> np.ndarray:
    """``int f . theta_m dsigma`` for the three rigid motions."""
    values = np.asarray(values)
    theta = rigid_motions(curve.nodes)
    return np.einsum("mni,ni,n->m", theta, values, curve.weights)


@dataclass(frozen=True)
class BoundaryField:
    """Vector field sampled at the nodes of a curve."""

    curve: SampledCurve
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.curve.n_nodes, 2):
            raise ValueError(f"expected values of shape ({self.curve.n_nodes}, 2), got {values.shape}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_flat(cls, curve, vector) -> "BoundaryField":
        return cls(curve, from_flat(vector))

    @property
    def flat(self) -> np.ndarray:
        return to_flat(self.values)

    def psi_moments(self) -> np.ndarray:
        return psi_moments(self.curve, self.values)

    def integral(self) -> np.ndarray:
        return self.curve.weights @ self.values

    def __add__(self, other):
        return BoundaryField(self.curve, self.values + _values(other))

    def __sub__(self, other):
        return BoundaryField(self.curve, self.values - _values(other))

    def __mul__(self, scalar):
        scalar = np.asarray(scalar)
        if scalar.ndim == 1:
            scalar = scalar[:, None]
        return BoundaryField(self.curve, self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return BoundaryField(self.curve, -self.values)


def _values(field) -> np.ndarray:
    return field.values if isinstance(field, BoundaryField) else np.asarray(field)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense ``(2T, 2S)`` discretization of a boundary operator."""

    entries: np.ndarray
    source: SampledCurve
    target: SampledCurve
    kind: str

    def apply(self, density) -> np.ndarray:
        """Apply to an ``(S, 2)`` density (or BoundaryField); returns ``(T, 2)``."""
        return from_flat(self.entries @ to_flat(_values(density)))

    def __call__(self, density) -> BoundaryField:
        return BoundaryField(self.target, self.apply(density))

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return self.entries @ other.entries
        return self.entries @ other


def _blocks(kernel: np.ndarray, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """(T, S, 2, 2) kernel values -> (2T, 2S) matrix, columns scaled by ``weights``."""
    t, s = kernel.shape[:2]
    mat = kernel.transpose(2, 0, 3, 1).reshape(2 * t, 2 * s)
    if weights is not None:
        mat = mat * np.tile(weights, 2)[None, :]
    return mat


def pointwise(matrices: np.ndarray) -> np.ndarray:
    """Block-diagonal (2N, 2N) operator of multiplication by ``matrices[n]`` (shape (N, 2, 2))."""
    n = matrices.shape[0]
    out = np.zeros((2 * n, 2 * n))
    idx = np.arange(n)
    for a in range(2):
        for b in range(2):
            out[a * n + idx, b * n + idx] = matrices[:, a, b]
    return out


def componentwise(scalar_op: np.ndarray) -> np.ndarray:
    """Apply a scalar (N, M) operator to both components."""
    return np.kron(np.eye(2), scalar_op)


def _self_separation(curve: SampledCurve) -> np.ndarray:
    r = curve.nodes[:, None, :] - curve.nodes[None, :, :]
    idx = np.arange(curve.n_nodes)
    r[idx, idx] = curve.tangent  # placeholder, diagonal entries are overwritten
    return r


def log_matrix(curve: SampledCurve) -> np.ndarray:
    """Kress discretization of ``f -> int log|x - y| f(y) dsigma(y)`` on the curve."""
    n = curve.n_nodes
    s = curve.param
    diff = s[:, None] - s[None, :]
    r = _self_separation(curve)
    r2 = np.einsum("ijk,ijk->ij", r, r)
    idx = np.arange(n)
    with np.errstate(divide="ignore"):
        smooth = 0.5 * np.log(r2) - 0.5 * np.log(4.0 * np.sin(0.5 * diff) ** 2)
    smooth[idx, idx] = np.log(curve.speed)
    speed = curve.speed[None, :]
    return 0.5 * _fourier.kress_matrix(n) * speed + (2.0 * np.pi / n) * smooth * speed


def laplace_normal_matrix(curve: SampledCurve) -> np.ndarray:
    """``f -> int (x - y).n(x)/|x - y|^2 f(y) dsigma(y)`` (smooth kernel)."""
    r = _self_separation(curve)
    r2 = np.einsum("ijk,ijk->ij", r, r)
    k = np.einsum("ijk,ik->ij", r, curve.normal) / r2
    idx = np.arange(curve.n_nodes)
    k[idx, idx] = -0.5 * curve.curvature
    return k * curve.weights[None, :]


def laplace_gradient_trace(curve: SampledCurve, side: int) -> np.ndarray:
    """One-sided gradient of the log potential ``int log|x-y| f``; shape (2, N, N).

    ``side=+1`` is the limit from the exterior (the side ``n`` points to).
    """
    tangential = curve.d_sigma_matrix() @ log_matrix(curve)
    normal = side * np.pi * np.eye(curve.n_nodes) + laplace_normal_matrix(curve)
    tau, n = curve.tangent, curve.normal
    return np.stack([tau[:, c, None] * tangential + n[:, c, None] * normal for c in range(2)])


def assemble_single_layer(p: LameParams, curve: SampledCurve) -> OperatorMatrix:
    """Single layer ``int Gamma(x - y) phi(y) dsigma(y)`` on the curve."""
    a = p.A / (2.0 * np.pi)
    b = p.B / (2.0 * np.pi)
    r = _self_separation(curve)
    r2 = np.einsum("ijk,ijk->ij", r, r)
    rr = np.einsum("ijk,ijl->ijkl", r, r) / r2[..., None, None]
    idx = np.arange(curve.n_nodes)
    rr[idx, idx] = np.einsum("ik,il->ikl", curve.tangent, curve.tangent)
    entries = a * componentwise(log_matrix(curve)) - b * _blocks(rr, curve.weights)
    return OperatorMatrix(entries, curve, curve, "single_layer")


def _principal_value(curve: SampledCurve, kernel: Callable, frame: str) -> np.ndarray:
    """Nyström matrix of a p.v. operator with an odd degree -1 kernel ``kernel(r, normal)``.

    ``frame`` says whether the kernel's normal belongs to the source or the
    target point.
    """
    n_nodes = curve.n_nodes
    tau, normal, kappa = curve.tangent, curve.normal, curve.curvature
    r = _self_separation(curve)
    r2 = np.einsum("ijk,ijk->ij", r, r)
    axis = 0 if frame == "source" else 1
    frame_tau = np.expand_dims(tau, axis)
    frame_normal = np.broadcast_to(np.expand_dims(normal, axis), r.shape)
    full = kernel(r, frame_normal)
    leading = kernel(tau, normal)  # kernel at r = tau, shape (N, 2, 2)
    proj = np.einsum("ijk,ijk->ij", r, np.broadcast_to(frame_tau, r.shape)) / r2
    smooth = full - np.expand_dims(leading, axis) * proj[..., None, None]
    directional = np.imag(kernel(tau + 1j * _COMPLEX_STEP * normal, normal)) / _COMPLEX_STEP
    sign = 0.5 if frame == "source" else -0.5
    idx = np.arange(n_nodes)
    smooth[idx, idx] = sign * kappa[:, None, None] * directional
    entries = _blocks(smooth, curve.weights)

    lmat = log_matrix(curve)
    dmat = curve.d_sigma_matrix()
    cauchy = lmat @ dmat if frame == "source" else dmat @ lmat
    for i in range(2):
        for j in range(2):
            rows = slice(i * n_nodes, (i + 1) * n_nodes)
            cols = slice(j * n_nodes, (j + 1) * n_nodes)
            if frame == "source":
                entries[rows, cols] += cauchy * leading[None, :, i, j]
            else:
                entries[rows, cols] += leading[:, None, i, j] * cauchy
    return entries


def assemble_k(p: LameParams, curve: SampledCurve) -> OperatorMatrix:
    """Principal value of the double layer on the curve."""
    kernel = lambda r, n: traction_kernel(p, r, n)
    return OperatorMatrix(_principal_value(curve, kernel, "source"), curve, curve, "K")


def assemble_kstar(p: LameParams, curve: SampledCurve) -> OperatorMatrix:
    """Principal value of the conormal derivative of the single layer (adjoint of ``K``)."""
    kernel = lambda r, n: traction_kernel_adjoint(p, r, n)
    return OperatorMatrix(_principal_value(curve, kernel, "target"), curve, curve, "K_star")


def assemble_ksharp(p: LameParams, curve: SampledCurve) -> OperatorMatrix:
    """Principal value of ``int dGamma(x - y)/dn(y) phi(y) dsigma(y)``."""
    kernel = lambda r, n: sharp_kernel(p, r, n)
    return OperatorMatrix(_principal_value(curve, kernel, "source"), curve, curve, "K_sharp")


def assemble_ksharp_star(p: LameParams, curve: SampledCurve) -> OperatorMatrix:
    """Principal value of ``int dGamma(x - y)/dn(x) phi(y) dsigma(y)``."""
    kernel = lambda r, n: sharp_kernel_adjoint(p, r, n)
    return OperatorMatrix(_principal_value(curve, kernel, "target"), curve, curve, "K_sharp_star")


class LayerOperators:
    """Lazily assembled and cached self-operators of one material on one curve.

    Side ``+1`` denotes the exterior limit and ``-1`` the interior limit.
    """

    def __init__(self, p: LameParams, curve: SampledCurve):
        self.p = p
        self.curve = curve
        self._cache = {}

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def S(self) -> np.ndarray:
        return self._get("S", lambda: assemble_single_layer(self.p, self.curve).entries)

    @property
    def K(self) -> np.ndarray:
        return self._get("K", lambda: assemble_k(self.p, self.curve).entries)

    @property
    def Kstar(self) -> np.ndarray:
        return self._get("Kstar", lambda: assemble_kstar(self.p, self.curve).entries)

    @property
    def Ksharp(self) -> np.ndarray:
        return self._get("Ksharp", lambda: assemble_ksharp(self.p, self.curve).entries)

    @property
    def Ksharp_star(self) -> np.ndarray:
        return self._get("Ksharp_star", lambda: assemble_ksharp_star(self.p, self.curve).entries)

    @property
    def d_sigma(self) -> np.ndarray:
        return self._get("D", lambda: componentwise(self.curve.d_sigma_matrix()))

    def _nn(self) -> np.ndarray:
        n = self.curve.normal
        return pointwise(np.einsum("ni,nj->nij", n, n))

    def traction_trace(self, side: int) -> np.ndarray:
        """Conormal derivative of the single layer: ``+-1/2 I + K*``."""
        return side * 0.5 * np.eye(2 * self.curve.n_nodes) + self.Kstar

    def double_layer_trace(self, side: int) -> np.ndarray:
        """``-+1/2 I + K``."""
        return -side * 0.5 * np.eye(2 * self.curve.n_nodes) + self.K

    def dsharp_trace(self, side: int) -> np.ndarray:
        """``-+1/(2 mu) I +- B n(x)n + K_sharp``."""
        eye = np.eye(2 * self.curve.n_nodes)
        return side * (-eye / (2.0 * self.p.mu) + self.p.B * self._nn()) + self.Ksharp

    def normal_derivative_trace(self, side: int) -> np.ndarray:
        """Normal derivative of the single layer: ``+-1/(2 mu) I -+ B n(x)n + K_sharp*``."""
        eye = np.eye(2 * self.curve.n_nodes)
        return side * (eye / (2.0 * self.p.mu) - self.p.B * self._nn()) + self.Ksharp_star

    def gradient_trace(self, side: int) -> np.ndarray:
        """One-sided gradient of the single layer; ``G[i, j]`` maps densities to ``d_j u_i`` at nodes."""
        def build():
            tangential = self.d_sigma @ self.S
            return gradient_from_traces(self.p, self.curve, _split(tangential),
                                        _split(self.traction_trace(side)))
        return self._get(("grad", side), build)

    def dsharp_gradient_trace(self, side: int) -> np.ndarray:
        """One-sided gradient of ``D_sharp[g]``; ``G[i, m]`` maps ``g`` to ``d_m w_i`` at nodes.

        Uses an integration-by-parts reduction: with ``'`` the arclength
        derivative, ``S_L`` the log potential and ``e`` the 2D Levi-Civita
        symbol (``e_12 = 1``),

        ``d_m w_i = 2b { d_i S_L[(n_m g.tau)'] + e_li d_l S_L[(n_m g.n)'] } - e_lm d_l S[g']_i``.
        """
        def build():
            curve = self.curve
            n_nodes = curve.n_nodes
            b = self.p.B / (2.0 * np.pi)
            dmat = curve.d_sigma_matrix()
            tau, n = curve.tangent, curve.normal
            g_tau = np.hstack([np.diag(tau[:, 0]), np.diag(tau[:, 1])])
            g_n = np.hstack([np.diag(n[:, 0]), np.diag(n[:, 1])])
            lg = laplace_gradient_trace(curve, side)
            sg = self.gradient_trace(side)
            out = np.empty((2, 2, n_nodes, 2 * n_nodes))
            for m in range(2):
                f1 = dmat @ (n[:, m, None] * g_tau)
                f2 = dmat @ (n[:, m, None] * g_n)
                rot = [-(lg[1] @ f2), lg[0] @ f2]  # e_li d_l S_L[f2] for i = 0, 1
                for i in range(2):
                    out[i, m] = 2.0 * b * (lg[i] @ f1 + rot[i])
            for i in range(2):
                # e_l0 d_l = -d_1 ; e_l1 d_l = d_0
                out[i, 0] += sg[i, 1] @ self.d_sigma
                out[i, 1] -= sg[i, 0] @ self.d_sigma
            return out
        return self._get(("dsharp_grad", side), build)

    def dsharp_traction_trace(self, side: int) -> np.ndarray:
        """Conormal derivative of ``D_sharp`` on one side, as a (2N, 2N) matrix."""
        return conormal_operator(self.p, self.curve.normal, self.dsharp_gradient_trace(side))


def _split(op: np.ndarray) -> np.ndarray:
    n = op.shape[0] // 2
    return np.stack([op[:n], op[n:]])


def gradient_from_traces(p: LameParams, curve: SampledCurve, tangential, traction) -> np.ndarray:
    """Full gradient on the curve from ``grad u . tau`` and the traction.

    ``tangential`` and ``traction`` have shape ``(2, N, ...)`` (component
    first); the result has shape ``(2, 2, N, ...)`` with ``[i, j] = d_j u_i``.
    Works equally for operators and for sampled values.
    """
    tangential = np.asarray(tangential)
    traction = np.asarray(traction)
    extra = (slice(None),) + (None,) * (tangential.ndim - 2)
    tau = [curve.tangent[:, c][extra] for c in range(2)]
    n = [curve.normal[:, c][extra] for c in range(2)]
    t_p = tau[0] * tangential[0] + tau[1] * tangential[1]
    n_p = n[0] * tangential[0] + n[1] * tangential[1]
    t_n = n[0] * traction[0] + n[1] * traction[1]
    t_t = tau[0] * traction[0] + tau[1] * traction[1]
    q_n = (t_n - p.lam * t_p) / (p.lam + 2.0 * p.mu)
    q_t = t_t / p.mu - n_p
    normal_der = [q_t * tau[c] + q_n * n[c] for c in range(2)]
    return np.stack([np.stack([tangential[i] * tau[j] + normal_der[i] * n[j] for j in range(2)])
                     for i in range(2)])


def conormal_operator(p: LameParams, normal: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Traction from a ``(2, 2, N, ...)`` gradient, flattened to ``(2N, ...)``."""
    extra = (slice(None),) + (None,) * (grad.ndim - 3)
    n = [normal[:, c][extra] for c in range(2)]
    div = grad[0, 0] + grad[1, 1]
    comps = [p.lam * div * n[i] + p.mu * sum((grad[i, j] + grad[j, i]) * n[j] for j in range(2))
             for i in range(2)]
    return np.concatenate(comps, axis=0)


# ---------------------------------------------------------------------------
# off-curve evaluation

def _panel_offsets(n_nodes: int, ds: float):
    """Gauss-Legendre rule on one period, relative to the nearest point, graded down to width ``ds``."""
    h = 2.0 * np.pi / n_nodes
    outer = 4.0 * h
    width = max(ds, 1e-14)
    edges = [0.0]
    while width < outer:
        edges.append(width)
        width *= 2.0
    start = edges[-1]
    count = max(1, int(np.ceil((np.pi - start) / outer)))
    edges = np.concatenate([edges, np.linspace(start, np.pi, count + 1)[1:]])
    lo, hi = edges[:-1], edges[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    pts = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    wts = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return np.concatenate([pts, -pts]), np.concatenate([wts, wts])


def evaluate_potential(curve: SampledCurve, density, targets, kernel: Callable,
                       near_factor: float = NEAR_FACTOR, chunk: int = 256) -> np.ndarray:
    """``int kernel(x - y, n(y)) . density(y) dsigma(y)`` at off-curve targets.

    ``kernel(r, n_y)`` returns ``(..., *out, 2)``; the last axis is contracted
    with the density.  Targets closer than ``near_factor`` mesh widths use
    graded panels around the nearest curve point, with the density
    interpolated trigonometrically.
    """
    density = np.asarray(_values(density), dtype=float)
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    d2 = np.min(np.sum((targets[:, None, :] - curve.nodes[None]) ** 2, axis=-1), axis=1)
    near = np.sqrt(d2) < near_factor * curve.mesh_width
    results = [None] * len(targets)
    far_idx = np.flatnonzero(~near)
    w = curve.weights
    for start in range(0, far_idx.size, chunk):
        idx = far_idx[start:start + chunk]
        r = targets[idx, None, :] - curve.nodes[None]
        k = kernel(r, np.broadcast_to(curve.normal, r.shape))
        for i, v in zip(idx, np.einsum("ts...k,sk,s->t...", k, density, w)):
            results[i] = v
    near_idx = np.flatnonzero(near)
    if near_idx.size:
        s0, dist, _ = curve.closest_point(targets[near_idx])
        speed = curve.local(s0).speed
        rules = [_panel_offsets(curve.n_nodes, d / v) for d, v in zip(dist, speed)]
        groups = {}
        for j, (pts, _) in enumerate(rules):
            groups.setdefault(pts.size, []).append(j)
        for members in groups.values():
            for start in range(0, len(members), 16):
                sel = members[start:start + 16]
                s = s0[sel, None] + np.stack([rules[j][0] for j in sel])
                ws = np.stack([rules[j][1] for j in sel])
                g = curve.local(s.ravel())
                y = g.x.reshape(s.shape + (2,))
                ny = g.normal.reshape(s.shape + (2,))
                wy = ws * g.speed.reshape(s.shape)
                dens = _fourier.evaluate(density, s)
                r = targets[near_idx[sel], None, :] - y
                if np.any(np.sum(r * r, axis=-1) == 0.0):
                    raise ValueError("target lies on the curve")
                vals = np.einsum("ts...k,tsk,ts->t...", kernel(r, ny), dens, wy)
                for j, v in zip(sel, vals):
                    results[near_idx[j]] = v
    return np.stack(results)


def eval_single_layer(p: LameParams, curve: SampledCurve, density, x) -> np.ndarray:
    return evaluate_potential(curve, density, x, lambda r, n: kelvin_matrix(p, r))


def eval_double_layer(p: LameParams, curve: SampledCurve, density, x) -> np.ndarray:
    return evaluate_potential(curve, density, x, lambda r, n: traction_kernel(p, r, n))


def eval_dsharp(p: LameParams, curve: SampledCurve, density, x) -> np.ndarray:
    return evaluate_potential(curve, density, x, lambda r, n: sharp_kernel(p, r, n))


def eval_single_layer_gradient(p: LameParams, curve: SampledCurve, density, x) -> np.ndarray:
    """``[t, i, l] = d_l S[density]_i`` at targets."""
    kernel = lambda r, n: np.swapaxes(kelvin_gradient(p, r), -1, -2)  # [i, l, k]
    return evaluate_potential(curve, density, x, kernel)


def eval_dsharp_gradient(p: LameParams, curve: SampledCurve, density, x) -> np.ndarray:
    """``[t, i, m] = d_m D_sharp[density]_i`` at targets."""
    kernel = lambda r, n: -np.einsum("...iklm,...l->...imk", kelvin_hessian(p, r), n)
    return evaluate_potential(curve, density, x, kernel)


def eval_double_layer_gradient(p: LameParams, curve: SampledCurve, density, x) -> np.ndarray:
    """``[t, i, m] = d_m D[density]_i`` at targets."""
    lam, mu = p.lam, p.mu

    def kernel(r, n):
        # row i of the double-layer kernel is lam div(w) n_k + mu (d_l w_k + d_k w_l) n_l with
        # w = column i of Gamma(x - y) as a field of y; differentiate in x
        hess = kelvin_hessian(p, r)  # [a, b, l, m] = d_l d_m Gamma_ab
        g = -np.swapaxes(hess, -4, -3)  # [i, k, l, m] = d_m of (d_{y_l} w_k)
        div = np.einsum("...ikkm->...im", g)
        sym = np.einsum("...iklm,...l->...ikm", g, n) + np.einsum("...ilkm,...l->...ikm", g, n)
        out = lam * div[..., None, :] * n[..., None, :, None] + mu * sym  # [i, k, m]
        return np.swapaxes(out, -1, -2)  # [i, m, k]
    return evaluate_potential(curve, density, x, kernel)


# ---------------------------------------------------------------------------
# operators between two disjoint curves

def curve_distance(source: SampledCurve, target: SampledCurve) -> float:
    """Approximate minimum distance from target nodes to the source curve."""
    fine = source.local(_fourier.nodes(4 * source.n_nodes)).x
    best = np.inf
    for start in range(0, target.n_nodes, 256):
        t = target.nodes[start:start + 256]
        best = min(best, float(np.min(np.sum((t[:, None] - fine[None]) ** 2, axis=-1))))
    return float(np.sqrt(best))


def upsampling_factor(source: SampledCurve, distance: float) -> int:
    """Smallest power-of-two refinement with fine spacing below ``distance / CROSS_RESOLUTION``."""
    if distance <= 0:
        raise ValueError("curves intersect or coincide")
    factor = 1
    while source.mesh_width / factor > distance / CROSS_RESOLUTION:
        factor *= 2
    if factor > MAX_UPSAMPLING:
        expected = np.exp(-2.0 * np.pi * distance * MAX_UPSAMPLING / source.mesh_width)
        warnings.warn(f"curves are {distance:.3g} apart; capping source upsampling at "
                      f"{MAX_UPSAMPLING} (estimated quadrature error {expected:.1e})",
                      RuntimeWarning, stacklevel=3)
        factor = MAX_UPSAMPLING
    return factor


def cross_ops(p: LameParams, source: SampledCurve, target: SampledCurve,
              kind: str = "single_layer", factor: Optional[int] = None,
              chunk: int = 64) -> OperatorMatrix:
    """Value or traction trace on ``target`` of the single layer on ``source``.

    ``kind`` is ``"single_layer"``, ``"conormal"`` (traction with the target
    normal) or ``"normal_derivative"``.
    """
    kernels = {
        "single_layer": lambda r, nx: kelvin_matrix(p, r),
        "conormal": lambda r, nx: traction_kernel_adjoint(p, r, nx),
        "normal_derivative": lambda r, nx: sharp_kernel_adjoint(p, r, nx),
    }
    if kind not in kernels:
        raise ValueError(f"unknown cross operator kind {kind!r}")
    if factor is None:
        factor = upsampling_factor(source, curve_distance(source, target))
    m = source.n_nodes * factor
    fine = source.local(_fourier.nodes(m))
    weights = fine.speed * (2.0 * np.pi / m)
    kernel = kernels[kind]
    entries = np.empty((2 * target.n_nodes, 2 * source.n_nodes))
    nt = target.n_nodes
    for start in range(0, nt, chunk):
        rows = np.arange(start, min(start + chunk, nt))
        r = target.nodes[rows, None, :] - fine.x[None]
        nx = np.broadcast_to(target.normal[rows, None, :], r.shape)
        k = kernel(r, nx) * weights[None, :, None, None]
        coarse = _fourier.interpolation_transpose(k, source.n_nodes, axis=1)
        for i in range(2):
            for j in range(2):
                entries[i * nt + rows, j * source.n_nodes:(j + 1) * source.n_nodes] = coarse[:, :, i, j]
    return OperatorMatrix(entries, source, target, f"{kind}_cross")


# ---------------------------------------------------------------------------
# jump-relation probes

JUMP_RELATIONS = ("single_layer", "single_layer_conormal", "single_layer_normal_derivative",
                  "double_layer", "dsharp", "dsharp_conormal")


def _richardson(values):
    """Quadratic extrapolation to offset 0 from samples at offsets d, 2d, 4d."""
    v1, v2, v4 = values
    return (8.0 * v1 - 6.0 * v2 + v4) / 3.0


def jump_relation_violations(p: LameParams, curve: SampledCurve, density, relative_delta: float = 1e-3,
                             ops: Optional[LayerOperators] = None) -> dict:
    """Compare on-curve trace matrices with off-curve evaluations at ``x +- delta n``.

    ``delta = relative_delta * curve.mesh_width``.  Off-curve values at
    offsets ``delta``, ``2 delta`` and ``4 delta`` are extrapolated to the
    curve, so the probe error is ``O(delta^3)`` times derivatives of the
    field, which grow like powers of the curvature near sharp tips.
    Returns ``{(relation, side): relative max violation}`` with side ``+1``
    outside and ``-1`` inside.
    """
    ops = ops or LayerOperators(p, curve)
    f = to_flat(density)
    x, n = curve.nodes, curve.normal
    delta = relative_delta * curve.mesh_width
    out = {}
    for side in (+1, -1):
        samples = {name: [] for name in JUMP_RELATIONS}
        for k in (1, 2, 4):
            xp = x + side * k * delta * n
            g_s = eval_single_layer_gradient(p, curve, density, xp)
            g_d = eval_dsharp_gradient(p, curve, density, xp)
            samples["single_layer"].append(eval_single_layer(p, curve, density, xp))
            samples["single_layer_conormal"].append(conormal(p, g_s, n))
            samples["single_layer_normal_derivative"].append(np.einsum("tij,tj->ti", g_s, n))
            samples["double_layer"].append(eval_double_layer(p, curve, density, xp))
            samples["dsharp"].append(eval_dsharp(p, curve, density, xp))
            samples["dsharp_conormal"].append(conormal(p, g_d, n))
        traces = {
            "single_layer": ops.S,
            "single_layer_conormal": ops.traction_trace(side),
            "single_layer_normal_derivative": ops.normal_derivative_trace(side),
            "double_layer": ops.double_layer_trace(side),
            "dsharp": ops.dsharp_trace(side),
            "dsharp_conormal": ops.dsharp_traction_trace(side),
        }
        for name in JUMP_RELATIONS:
            trace = from_flat(traces[name] @ f)
            probe = _richardson(samples[name])
            scale = max(float(np.max(np.abs(trace))), 1e-300)
            out[(name, side)] = float(np.max(np.abs(probe - trace))) / scale
    return out
