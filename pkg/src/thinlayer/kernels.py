"""Kelvin fundamental matrix of the 2D Lamé system and the kernels built from it.

All kernels are vectorized: ``r`` has shape ``(..., 2)`` and matrix-valued
results have shape ``(..., 2, 2)``.  The separation vector is always
``r = x - y`` with ``x`` the target and ``y`` the source.  Every function is
written with ``r @ r`` instead of ``abs``/``hypot`` so that complex-step
differentiation passes straight through.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_EYE = np.eye(2)


@dataclass(frozen=True)
class LameParams:
    """Lamé coefficients of one isotropic material."""

    lam: float
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"shear modulus must be positive, got mu={self.mu}")
        if not self.lam + self.mu > 0:
            raise ValueError(f"need lambda + mu > 0, got lambda={self.lam}, mu={self.mu}")

    @property
    def A(self) -> float:
        return 0.5 * (1.0 / self.mu + 1.0 / (2.0 * self.mu + self.lam))

    @property
    def B(self) -> float:
        return 0.5 * (1.0 / self.mu - 1.0 / (2.0 * self.mu + self.lam))

    @property
    def tensor(self) -> "IsotropicTensor":
        return IsotropicTensor(self.lam, self.mu)

    def to_list(self):
        return [self.lam, self.mu]


@dataclass(frozen=True)
class MaterialTriple:
    """Background (index 0), core (1) and coating layer (2) materials.

    The constructor enforces the standing contrast assumptions
    ``(lam0 - lamj)(mu0 - muj) >= 0`` and that each of core and layer differs
    from the background.  Use :meth:`trivial` for the identical-material case.
    """

    background: LameParams
    core: LameParams
    layer: LameParams
    require_contrast: bool = True

    def __post_init__(self):
        b = self.background
        for name, m in (("core", self.core), ("layer", self.layer)):
            if (b.lam - m.lam) * (b.mu - m.mu) < 0:
                raise ValueError(
                    f"{name} violates (lam0 - lam)(mu0 - mu) >= 0: "
                    f"background={b.to_list()}, {name}={m.to_list()}")
            if self.require_contrast and (b.lam, b.mu) == (m.lam, m.mu):
                raise ValueError(f"{name} has no contrast with the background; "
                                 "use MaterialTriple.trivial for identical materials")

    @classmethod
    def trivial(cls, params: LameParams) -> "MaterialTriple":
        return cls(params, params, params, require_contrast=False)

    @classmethod
    def from_pairs(cls, background, core, layer, require_contrast=True) -> "MaterialTriple":
        return cls(LameParams(*background), LameParams(*core), LameParams(*layer), require_contrast)

    def __getitem__(self, index: int) -> LameParams:
        return (self.background, self.core, self.layer)[index]

    @property
    def is_trivial(self) -> bool:
        return self.background == self.core == self.layer


@dataclass(frozen=True)
class IsotropicTensor:
    """Isotropic elasticity tensor ``lam I (x) I + 2 mu Id``."""

    lam: float
    mu: float

    def apply(self, strain: np.ndarray) -> np.ndarray:
        return tensor_apply(self, strain)

    def to_array(self) -> np.ndarray:
        """Components ``C[i, j, k, l]``."""
        d = _EYE
        return (self.lam * np.einsum("ij,kl->ijkl", d, d)
                + self.mu * (np.einsum("ik,jl->ijkl", d, d) + np.einsum("il,jk->ijkl", d, d)))


def tensor_apply(tensor: IsotropicTensor, strain: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """``lam tr(E) I + 2 mu E`` for symmetric ``E`` of shape ``(..., 2, 2)``."""
    strain = np.asarray(strain)
    if np.max(np.abs(strain - np.swapaxes(strain, -1, -2)), initial=0.0) > atol:
        raise ValueError("strain tensor must be symmetric")
    tr = np.trace(strain, axis1=-2, axis2=-1)
    return tensor.lam * tr[..., None, None] * _EYE + 2.0 * tensor.mu * strain


def strain(grad: np.ndarray) -> np.ndarray:
    """Symmetric part of a displacement gradient ``grad[..., i, j] = d_j u_i``."""
    return 0.5 * (grad + np.swapaxes(grad, -1, -2))


def conormal(p: LameParams, grad: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Traction ``lam div(u) n + mu (grad + grad^T) n``."""
    grad = np.asarray(grad)
    n = np.asarray(n)
    div = np.trace(grad, axis1=-2, axis2=-1)
    sym = grad + np.swapaxes(grad, -1, -2)
    return p.lam * div[..., None] * n + p.mu * np.einsum("...ij,...j->...i", sym, n)


def _r2(r):
    r2 = np.einsum("...i,...i->...", r, r)
    if np.any(r2 == 0):
        raise ZeroDivisionError("kernel evaluated at coincident points")
    return r2


def kelvin_matrix(p: LameParams, r: np.ndarray) -> np.ndarray:
    """``Gamma(r) = A/(2 pi) log|r| I - B/(2 pi) r (x) r / |r|^2``."""
    r = np.asarray(r)
    r2 = _r2(r)
    a = p.A / (2.0 * np.pi)
    b = p.B / (2.0 * np.pi)
    rr = np.einsum("...i,...j->...ij", r, r) / r2[..., None, None]
    return (0.5 * a * np.log(r2))[..., None, None] * _EYE - b * rr


def kelvin_gradient(p: LameParams, r: np.ndarray) -> np.ndarray:
    """``G[..., i, k, l] = d Gamma_ik / d r_l``."""
    r = np.asarray(r)
    r2 = _r2(r)[..., None, None, None]
    a = p.A / (2.0 * np.pi)
    b = p.B / (2.0 * np.pi)
    d = _EYE
    t_a = a * np.einsum("ik,...l->...ikl", d, r)
    t_b = b * (np.einsum("il,...k->...ikl", d, r) + np.einsum("kl,...i->...ikl", d, r))
    rrr = np.einsum("...i,...k,...l->...ikl", r, r, r)
    return (t_a - t_b) / r2 + 2.0 * b * rrr / r2**2


def kelvin_hessian(p: LameParams, r: np.ndarray) -> np.ndarray:
    """``H[..., i, k, l, m] = d^2 Gamma_ik / d r_l d r_m``."""
    r = np.asarray(r)
    r2 = _r2(r)[..., None, None, None, None]
    a = p.A / (2.0 * np.pi)
    b = p.B / (2.0 * np.pi)
    d = _EYE
    ein = np.einsum
    dd = lambda s: ein(s, d, d) * np.ones(r.shape[:-1] + (1, 1, 1, 1))
    out = a * (dd("ik,lm->iklm") / r2 - 2.0 * ein("ik,...l,...m->...iklm", d, r, r) / r2**2)
    out = out - b * (dd("il,km->iklm") + dd("kl,im->iklm")) / r2
    out = out + 2.0 * b * (ein("il,...k,...m->...iklm", d, r, r)
                           + ein("kl,...i,...m->...iklm", d, r, r)) / r2**2
    out = out + 2.0 * b * (ein("im,...k,...l->...iklm", d, r, r)
                           + ein("km,...i,...l->...iklm", d, r, r)
                           + ein("lm,...i,...k->...iklm", d, r, r)) / r2**2
    rrrr = ein("...i,...k,...l,...m->...iklm", r, r, r, r)
    return out - 8.0 * b * rrrr / r2**3


def traction_kernel(p: LameParams, r: np.ndarray, n_y: np.ndarray) -> np.ndarray:
    """Double-layer kernel: row ``i`` is the traction at ``y`` (normal ``n_y``) of column ``i`` of ``Gamma(x - y)``."""
    grad = -kelvin_gradient(p, r)  # d/dy of Gamma(x - y)
    # column i as a field w_k(y) = Gamma_ki; grad[..., k, i, l] = d_l w_k
    g = np.swapaxes(grad, -3, -2)  # [..., i, k, l]
    div = np.einsum("...ikk->...i", g)
    sym_n = np.einsum("...ikl,...l->...ik", g, n_y) + np.einsum("...ilk,...l->...ik", g, n_y)
    return p.lam * div[..., None] * n_y[..., None, :] + p.mu * sym_n


def traction_kernel_adjoint(p: LameParams, r: np.ndarray, n_x: np.ndarray) -> np.ndarray:
    """Kernel of ``phi -> traction at x of Gamma(x - y) phi``, with target normal ``n_x``."""
    g = kelvin_gradient(p, r)  # [..., j, k, l] = d_l Gamma_jk
    div = np.einsum("...lkl->...k", g)
    sym_n = np.einsum("...jkl,...l->...jk", g, n_x) + np.einsum("...lkj,...l->...jk", g, n_x)
    return p.lam * n_x[..., :, None] * div[..., None, :] + p.mu * sym_n


def sharp_kernel(p: LameParams, r: np.ndarray, n_y: np.ndarray) -> np.ndarray:
    """``d Gamma(x - y) / d n(y)``."""
    return -np.einsum("...ikl,...l->...ik", kelvin_gradient(p, r), n_y)


def sharp_kernel_adjoint(p: LameParams, r: np.ndarray, n_x: np.ndarray) -> np.ndarray:
    """``d Gamma(x - y) / d n(x)``."""
    return np.einsum("...ikl,...l->...ik", kelvin_gradient(p, r), n_x)
