"""Smooth closed curves, thickness profiles and their normal perturbations.

Sign convention
---------------
The unit normal is ``n = R_{-pi/2} tau`` (rotation ``(x, y) -> (y, -x)``), which
points outward for counter-clockwise curves.  Curvature is defined through
``d^2X/dt^2 = kappa * n`` in arclength ``t``, so a counter-clockwise circle of
radius ``r`` has ``kappa = -1/r``.  Many boundary-element texts use the
opposite sign; every module in this package uses this one.

Discretization
--------------
Every curve is sampled at ``N`` (even) equispaced values of a 2*pi periodic
parameter ``s``.  For arclength-parametrized curves ``s = 2*pi*t/L``.  A
:class:`PerturbedCurve` inherits the parameter of its base curve, so its node
``i`` is the image of base node ``i`` under the normal offset map.

All geometric quantities are evaluated from the analytic description of the
curve at any ``s``; nothing is interpolated from nodal samples.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import make_interp_spline
from shapely.geometry import LinearRing

from . import _fourier


def rotate_minus_half_pi(v: np.ndarray) -> np.ndarray:
    """Rotation by -pi/2: (x, y) -> (y, -x)."""
    v = np.asarray(v)
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _is_simple(points: np.ndarray) -> bool:
    return bool(LinearRing(points).is_simple)


@dataclass(frozen=True)
class LocalGeometry:
    """Geometry at a batch of parameter values.

    ``speed`` is ``dsigma/ds`` and ``speed_s`` its ``s``-derivative, where
    ``sigma`` is arclength.  ``curvature_t`` is ``dkappa/dsigma``.
    """

    x: np.ndarray
    tangent: np.ndarray
    curvature: np.ndarray
    curvature_t: np.ndarray
    speed: np.ndarray
    speed_s: np.ndarray

    @property
    def normal(self):
        return rotate_minus_half_pi(self.tangent)

    def derivatives(self):
        """``(x, dx/ds, d^2x/ds^2)``."""
        xs = self.speed[:, None] * self.tangent
        xss = (self.speed**2 * self.curvature)[:, None] * self.normal + self.speed_s[:, None] * self.tangent
        return self.x, xs, xss


class SampledCurve:
    """Common behaviour of curves sampled on an equispaced parameter grid.

    Attributes
    ----------
    nodes, tangent, normal : ndarray, shape (N, 2)
    curvature : ndarray, shape (N,)
    speed : ndarray, shape (N,)
        ``|dX/ds|`` with respect to the 2*pi periodic parameter.
    """

    nodes: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    curvature: np.ndarray
    speed: np.ndarray

    def _freeze(self):
        for arr in (self.nodes, self.tangent, self.normal, self.curvature, self.speed):
            arr.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def param(self) -> np.ndarray:
        return _fourier.nodes(self.n_nodes)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoidal arclength weights ``dsigma`` at the nodes."""
        return self.speed * (2.0 * np.pi / self.n_nodes)

    @property
    def length(self) -> float:
        return float(np.sum(self.weights))

    @property
    def mesh_width(self) -> float:
        return float(np.max(self.weights))

    @property
    def signed_area(self) -> float:
        xs = self.tangent * self.speed[:, None]
        return 0.5 * float(np.sum(_cross(self.nodes, xs))) * 2.0 * np.pi / self.n_nodes

    @property
    def radius(self) -> float:
        """Largest distance from the origin to the curve."""
        return float(np.max(np.linalg.norm(self.nodes, axis=1)))

    def local(self, s) -> LocalGeometry:
        raise NotImplementedError

    def at(self, s):
        """Position and first two ``s``-derivatives at arbitrary parameters."""
        return self.local(np.atleast_1d(np.asarray(s, dtype=float))).derivatives()

    def d_sigma(self, values: np.ndarray) -> np.ndarray:
        """Spectral arclength derivative of nodal values (first axis)."""
        dv = _fourier.differentiate(values)
        shape = (-1,) + (1,) * (np.ndim(values) - 1)
        return dv / self.speed.reshape(shape)

    def d_sigma_matrix(self) -> np.ndarray:
        return _fourier.differentiation_matrix(self.n_nodes) / self.speed[:, None]

    def closest_point(self, x: np.ndarray, iterations: int = 40):
        """Parameter, distance and side (+1 outside, -1 inside) of the nearest curve point."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        d2 = np.sum((x[:, None, :] - self.nodes[None, :, :]) ** 2, axis=-1)
        s = self.param[np.argmin(d2, axis=1)].astype(float)
        h = 2.0 * np.pi / self.n_nodes
        for _ in range(iterations):
            p, ps, pss = self.at(s)
            diff = p - x
            f = np.sum(diff * ps, axis=-1)
            fp = np.sum(ps * ps, axis=-1) + np.sum(diff * pss, axis=-1)
            step = np.clip(f / np.where(fp > 0, fp, np.inf), -h, h)
            s = s - step
            if np.max(np.abs(step)) < 1e-15:
                break
        p, ps, _ = self.at(s)
        diff = x - p
        dist = np.linalg.norm(diff, axis=-1)
        side = np.sign(np.sum(diff * rotate_minus_half_pi(ps), axis=-1))
        return np.mod(s, 2.0 * np.pi), dist, side


class ClosedCurve(SampledCurve):
    """A smooth counter-clockwise closed curve sampled at ``N`` equispaced parameters.

    ``local`` is a callable ``s -> LocalGeometry`` that evaluates the curve
    exactly.  Use :func:`make_circle` or :func:`make_smooth_curve` rather than
    the constructor.
    """

    def __init__(self, local: Callable[[np.ndarray], LocalGeometry], n_nodes: int,
                 kind: str = "custom", rebuild: Optional[Callable[[int], "ClosedCurve"]] = None,
                 arclength: bool = True):
        if n_nodes < 8 or n_nodes % 2:
            raise ValueError(f"n_nodes must be even and >= 8, got {n_nodes}")
        self._local = local
        self.kind = kind
        self.arclength = arclength
        self._rebuild = rebuild
        g = local(_fourier.nodes(n_nodes))
        self.nodes = g.x
        self.tangent = g.tangent
        self.normal = g.normal
        self.curvature = g.curvature
        self.curvature_derivative = g.curvature_t
        self.speed = g.speed
        self.speed_derivative = g.speed_s
        self.period = self.length
        if self.signed_area <= 0:
            raise ValueError("curve must be counter-clockwise (positive signed area)")
        self._freeze()

    def __repr__(self):
        return f"ClosedCurve(kind={self.kind!r}, n_nodes={self.n_nodes}, length={self.period:.6g})"

    def local(self, s) -> LocalGeometry:
        return self._local(np.atleast_1d(np.asarray(s, dtype=float)))

    def refined(self, n_nodes: int) -> "ClosedCurve":
        """The same curve sampled at a different node count."""
        if self._rebuild is None:
            raise ValueError("curve has no rebuild recipe")
        return self._rebuild(n_nodes)


def _circle_local(radius, center, s):
    c, sn = np.cos(s), np.sin(s)
    return LocalGeometry(
        x=center + radius * np.stack([c, sn], -1),
        tangent=np.stack([-sn, c], -1),
        curvature=np.full(s.shape, -1.0 / radius),
        curvature_t=np.zeros(s.shape),
        speed=np.full(s.shape, float(radius)),
        speed_s=np.zeros(s.shape),
    )


def make_circle(radius: float, n_nodes: int, center=(0.0, 0.0)) -> ClosedCurve:
    """Counter-clockwise circle, arclength parametrized from the point ``center + (r, 0)``."""
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    center = np.asarray(center, dtype=float)
    return ClosedCurve(partial(_circle_local, float(radius), center), n_nodes, kind="circle",
                       rebuild=partial(make_circle, radius, center=tuple(center)))


@dataclass(frozen=True)
class Parametrization:
    """A 2*pi periodic map ``t -> X(t)`` given with its first three derivatives.

    ``derivs(t)`` returns an array of shape ``(4, len(t), 2)``.
    """

    derivs: Callable[[np.ndarray], np.ndarray]
    kind: str = "custom"
    params: tuple = ()

    def geometry(self, t):
        x, d1, d2, d3 = self.derivs(np.asarray(t, dtype=float))
        v = np.linalg.norm(d1, axis=-1)
        cr = _cross(d1, d2)
        kappa = -cr / v**3
        dv = np.sum(d1 * d2, axis=-1) / v
        dkappa = -(_cross(d1, d3) / v**3 - 3.0 * cr * dv / v**4)
        return x, d1 / v[:, None], kappa, dkappa / v, v, dv


def ellipse(a: float, b: float) -> Parametrization:
    def derivs(t):
        c, s = np.cos(t), np.sin(t)
        return np.stack([np.stack([a * c, b * s], -1), np.stack([-a * s, b * c], -1),
                         np.stack([-a * c, -b * s], -1), np.stack([a * s, -b * c], -1)])
    return Parametrization(derivs, "ellipse", (a, b))


def kite(a: float = 0.65, b: float = 1.5) -> Parametrization:
    """(cos t + a cos 2t - a, b sin t)."""
    def derivs(t):
        c, s, c2, s2 = np.cos(t), np.sin(t), np.cos(2 * t), np.sin(2 * t)
        return np.stack([np.stack([c + a * c2 - a, b * s], -1),
                         np.stack([-s - 2 * a * s2, b * c], -1),
                         np.stack([-c - 4 * a * c2, -b * s], -1),
                         np.stack([s + 8 * a * s2, -b * c], -1)])
    return Parametrization(derivs, "kite", (a, b))


def fourier_radial(r0: float, cos: Sequence[float] = (), sin: Sequence[float] = ()) -> Parametrization:
    """Star-shaped curve ``r(t) (cos t, sin t)`` with ``r = r0 + sum a_k cos kt + b_k sin kt``."""
    n = max(len(cos), len(sin))
    k = np.arange(1, n + 1)
    a = np.pad(np.asarray(cos, dtype=float), (0, n - len(cos)))
    b = np.pad(np.asarray(sin, dtype=float), (0, n - len(sin)))

    def derivs(t):
        kt = np.multiply.outer(t, k)
        ck, sk = np.cos(kt), np.sin(kt)
        r = [r0 + (ck * a + sk * b).sum(-1),
             (k * (-sk * a + ck * b)).sum(-1),
             (k**2 * (-ck * a - sk * b)).sum(-1),
             (k**3 * (sk * a - ck * b)).sum(-1)]
        e = np.stack([np.cos(t), np.sin(t)], -1)
        ep = np.stack([-np.sin(t), np.cos(t)], -1)
        # derivatives of r(t) e(t) using e' = ep, ep' = -e
        d = [r[0][:, None] * e,
             r[1][:, None] * e + r[0][:, None] * ep,
             (r[2] - r[0])[:, None] * e + 2 * r[1][:, None] * ep,
             (r[3] - 3 * r[1])[:, None] * e + (3 * r[2] - r[0])[:, None] * ep]
        return np.stack(d)
    return Parametrization(derivs, "fourier", (r0, tuple(cos), tuple(sin)))


class _ArclengthMap:
    """``t(s)`` for the reparametrization with ``s = 2*pi*sigma/L``.

    The periodic part of the arclength function is resolved to round-off on
    a grid in ``t``; its inverse is tabulated once as a trigonometric
    interpolant of ``t(s) - s``, sampled densely and evaluated by a periodic spline.
    """

    def __init__(self, param: Parametrization, tol: float = 1e-15):
        self.param = param
        m = 256
        while True:
            v = np.linalg.norm(param.derivs(_fourier.nodes(m))[1], axis=-1)
            if np.min(v) <= 1e-12 * np.max(v):
                raise ValueError("degenerate parametrization: zero speed")
            c = np.fft.fft(v) / m
            if np.max(np.abs(c[m // 4: 3 * m // 4])) < tol * abs(c[0]) or m >= 2**16:
                break
            m *= 2
        self.mean_speed = c[0].real
        k = np.fft.fftfreq(m, 1.0 / m)
        ck = np.where(k != 0, c / np.where(k != 0, 1j * k, 1.0), 0.0)
        self._periodic = np.real(np.fft.ifft(ck * m))
        size = 1024
        while True:
            s = _fourier.nodes(size)
            t = self._newton(s, s.copy())
            coeffs = np.abs(np.fft.rfft(t - s)) / size
            if np.max(coeffs[size // 4:]) < 1e-15 or size >= 2**15:
                break
            size *= 2
        # dense samples of the exact interpolant, then a periodic degree-7 spline
        fine = _fourier.nodes(2**15)
        offset = _fourier.upsample(t - s, fine.size)
        grid = np.append(fine, 2.0 * np.pi)
        self._inverse = make_interp_spline(grid, np.append(offset, offset[0]), k=7,
                                           bc_type="periodic")

    def arclength(self, t):
        """Arclength from ``t = 0`` to ``t``."""
        return self.mean_speed * t + _fourier.evaluate(self._periodic, t)

    def _newton(self, s, t, tol=1e-14, max_iter=100):
        target = s * self.mean_speed
        for _ in range(max_iter):
            v = np.linalg.norm(self.param.derivs(t)[1], axis=-1)
            step = (self.arclength(t) - target) / v
            t = t - step
            if np.max(np.abs(step), initial=0.0) < tol:
                return t
        raise RuntimeError("arclength inversion did not converge")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        wrapped = np.mod(s, 2.0 * np.pi).ravel()
        # the spline interval search is fast only for sorted input
        order = np.argsort(wrapped)
        offset = np.empty_like(wrapped)
        offset[order] = self._inverse(wrapped[order])
        return s + offset.reshape(s.shape)


def _param_local(param: Parametrization, amap: Optional[_ArclengthMap], s):
    if amap is None:
        return LocalGeometry(*param.geometry(s))
    x, tau, kappa, dkappa, _, _ = param.geometry(amap(s))
    return LocalGeometry(x, tau, kappa, dkappa, np.full(s.shape, amap.mean_speed), np.zeros(s.shape))


def make_smooth_curve(param: Parametrization, n_nodes: int, arclength: bool = True) -> ClosedCurve:
    """Sample ``param`` at ``n_nodes`` nodes.

    With ``arclength=True`` (the default) the nodes are equispaced in
    arclength: the arclength function is integrated term by term from a
    resolved Fourier series of the speed and inverted by Newton iteration.
    Otherwise the native parameter of ``param`` is used.
    """
    amap = _ArclengthMap(param) if arclength else None
    curve = ClosedCurve(partial(_param_local, param, amap), n_nodes, kind=param.kind,
                        rebuild=partial(make_smooth_curve, param, arclength=arclength),
                        arclength=arclength)
    if not _is_simple(curve.nodes):
        raise ValueError("curve appears to self-intersect")
    return curve


class ThicknessProfile:
    """Positive layer thickness ``h`` on a base curve.

    ``h`` is a truncated Fourier series in the base curve's parameter ``s``.
    ``h_prime`` and ``h_second`` are arclength derivatives at the nodes.
    """

    def __init__(self, curve: ClosedCurve, mean: float, cos: Sequence[float] = (),
                 sin: Sequence[float] = ()):
        self.curve = curve
        self.mean = float(mean)
        self.cos = tuple(float(v) for v in cos)
        self.sin = tuple(float(v) for v in sin)
        n = max(len(self.cos), len(self.sin))
        self._k = np.arange(1, n + 1)
        self._a = np.pad(np.asarray(self.cos), (0, n - len(self.cos)))
        self._b = np.pad(np.asarray(self.sin), (0, n - len(self.sin)))
        self.h, self.h_prime, self.h_second = self.arclength_derivatives(curve.param)
        fine = self.series(_fourier.nodes(max(8 * curve.n_nodes, 1024)))
        self.min_value = float(min(np.min(self.h), np.min(fine)))
        if self.min_value <= 0:
            raise ValueError("thickness profile must satisfy h >= C > 0")

    @classmethod
    def constant(cls, curve: ClosedCurve, value: float = 1.0) -> "ThicknessProfile":
        return cls(curve, value)

    def on(self, curve: ClosedCurve) -> "ThicknessProfile":
        """The same Fourier profile attached to another curve or sampling."""
        return ThicknessProfile(curve, self.mean, self.cos, self.sin)

    def series(self, s, deriv: int = 0) -> np.ndarray:
        """``d^deriv h / ds^deriv`` at parameters ``s``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        ks = np.multiply.outer(s, self._k)
        c, sn = np.cos(ks), np.sin(ks)
        k, a, b = self._k, self._a, self._b
        if deriv == 0:
            return self.mean + (c * a + sn * b).sum(-1)
        if deriv == 1:
            return (k * (-sn * a + c * b)).sum(-1)
        if deriv == 2:
            return (k**2 * (-c * a - sn * b)).sum(-1)
        raise ValueError("deriv must be 0, 1 or 2")

    def arclength_derivatives(self, s, geometry: Optional[LocalGeometry] = None):
        """``(h, dh/dsigma, d^2h/dsigma^2)`` at parameters ``s``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        g = geometry if geometry is not None else self.curve.local(s)
        h, hs, hss = self.series(s), self.series(s, 1), self.series(s, 2)
        ht = hs / g.speed
        htt = (hss - ht * g.speed_s) / g.speed**2
        return h, ht, htt

    def to_dict(self):
        return {"mean": self.mean, "cos": list(self.cos), "sin": list(self.sin)}


class PerturbedCurve(SampledCurve):
    """The normal offset ``x + eps h(x) n(x)`` of a base curve.

    Geometry is differentiated exactly from the offset map, never taken from
    small-``eps`` expansions.
    """

    def __init__(self, base: ClosedCurve, profile: ThicknessProfile, epsilon: float):
        if profile.curve.n_nodes != base.n_nodes:
            raise ValueError("profile must be sampled on the base curve's nodes")
        if epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        self.base = base
        self.profile = profile
        self.epsilon = float(epsilon)
        g = self.local(base.param)
        self.nodes = g.x
        self.tangent = g.tangent
        self.normal = g.normal
        self.curvature = g.curvature
        self.speed = g.speed
        if epsilon > 0:
            stretch = 1.0 - self.epsilon * profile.h * base.curvature
            if np.min(stretch) <= 0 or not _is_simple(self.nodes):
                raise ValueError(
                    f"perturbed curve self-intersects at eps={epsilon}: "
                    f"min(1 - eps h kappa) = {np.min(stretch):.3g}")
        self._freeze()

    def __repr__(self):
        return f"PerturbedCurve(eps={self.epsilon:g}, base={self.base!r})"

    @property
    def min_gap(self) -> float:
        """Smallest normal distance to the base curve."""
        return self.epsilon * self.profile.min_value

    def local(self, s) -> LocalGeometry:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        g = self.base.local(s)
        h, ht, htt = self.profile.arclength_derivatives(s, g)
        eps, kappa, tau, n = self.epsilon, g.curvature, g.tangent, g.normal
        col = lambda v: v[:, None]
        stretch = 1.0 - eps * h * kappa
        pos = g.x + eps * col(h) * n
        # derivatives in base arclength
        xt = col(stretch) * tau + eps * col(ht) * n
        xtt = (-eps * col(2.0 * ht * kappa + h * g.curvature_t) * tau
               + col(stretch * kappa + eps * htt) * n)
        vt = np.linalg.norm(xt, axis=1)
        new_tau = xt / col(vt)
        new_kappa = np.sum(xtt * rotate_minus_half_pi(new_tau), axis=1) / vt**2
        vtt = np.sum(xt * xtt, axis=1) / vt
        speed = g.speed * vt
        speed_s = g.speed_s * vt + g.speed**2 * vtt
        # offset curves never need their own curvature derivative
        return LocalGeometry(pos, new_tau, new_kappa, np.full(s.shape, np.nan), speed, speed_s)


def perturb(base: ClosedCurve, profile: ThicknessProfile, epsilon: float) -> PerturbedCurve:
    return PerturbedCurve(base, profile, epsilon)
