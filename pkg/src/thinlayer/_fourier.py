"""Trigonometric interpolation on equispaced periodic grids.

All routines work on the 2*pi periodic parameter ``s``; nodes sit at
``s_j = 2*pi*j/N`` and ``N`` is even.  The Nyquist mode is split evenly
between +N/2 and -N/2 so that interpolants of real data stay real.
"""
from __future__ import annotations

import numpy as np


def nodes(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n


def _split_coefficients(values: np.ndarray):
    n = values.shape[0]
    c = np.fft.fft(values, axis=0) / n
    k = np.fft.fftfreq(n, 1.0 / n)
    half = n // 2
    k = np.concatenate([k[:half], [half], k[half + 1:], [-half]])
    c = np.concatenate([c[:half], c[half:half + 1] / 2, c[half + 1:], c[half:half + 1] / 2])
    return k, c


def evaluate(values: np.ndarray, s: np.ndarray, deriv: int = 0, chunk: int = 8192) -> np.ndarray:
    """Evaluate the trigonometric interpolant of real ``values`` (or a derivative) at ``s``."""
    values = np.asarray(values, dtype=float)
    s = np.asarray(s, dtype=float)
    out_shape = s.shape + values.shape[1:]
    s = s.ravel()
    n = values.shape[0]
    half = n // 2
    flat = values.reshape(n, -1)
    c = np.fft.fft(flat, axis=0)[: half + 1] / n
    c[half] *= 0.5
    k = np.arange(half + 1)
    c = c * ((1j * k) ** deriv)[:, None]
    c[1:] *= 2.0  # conjugate-symmetric partner modes of real data
    out = np.empty((s.size, flat.shape[1]))
    for start in range(0, s.size, chunk):
        z = np.exp(1j * s[start:start + chunk])
        powers = np.empty((z.size, half + 1), dtype=complex)
        powers[:, 0] = 1.0
        powers[:, 1:] = z[:, None]
        np.cumprod(powers[:, 1:], axis=1, out=powers[:, 1:])
        out[start:start + chunk] = np.real(powers @ c)
    return out.reshape(out_shape)


def upsample(values: np.ndarray, m: int) -> np.ndarray:
    """Values of the trigonometric interpolant on the finer grid of ``m`` nodes."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if m == n:
        return values.copy()
    if m < n or m % 2:
        raise ValueError("upsampling needs an even target size m >= n")
    c = np.fft.fft(values, axis=0)
    half = n // 2
    padded = np.zeros((m,) + values.shape[1:], dtype=complex)
    padded[:half] = c[:half]
    padded[half] = c[half] / 2
    padded[m - half] = c[half] / 2
    padded[m - half + 1:] = c[half + 1:]
    return np.real(np.fft.ifft(padded, axis=0)) * (m / n)


def interpolation_matrix(n: int, m: int) -> np.ndarray:
    """(m, n) matrix mapping nodal values on n nodes to the m-node grid."""
    return upsample(np.eye(n), m)


def interpolation_transpose(values: np.ndarray, n: int, axis: int = 0) -> np.ndarray:
    """``interpolation_matrix(n, m).T @ values`` along ``axis``, computed with FFTs.

    Maps weights attached to an ``m``-point grid back onto the ``n`` coarse
    nodes so that ``sum_t values_t f(s_t)`` equals the coarse dot product for
    every trigonometric interpolant ``f`` of ``n`` nodal values.
    """
    values = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    m = values.shape[0]
    if m % n or n % 2:
        raise ValueError("fine grid size must be a multiple of the even coarse size")
    spectrum = np.fft.ifft(values, axis=0) * m  # sum_t v_t exp(+i q s_t)
    half = n // 2
    coarse = np.empty((n,) + values.shape[1:], dtype=complex)
    coarse[:half] = spectrum[:half]
    coarse[half] = spectrum[half].real
    coarse[half + 1:] = spectrum[m - half + 1:]
    out = np.real(np.fft.fft(coarse, axis=0)) / n
    return np.moveaxis(out, 0, axis)


def differentiate(values: np.ndarray, order: int = 1) -> np.ndarray:
    """Spectral derivative in ``s`` of nodal values (first axis)."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    k = np.fft.fftfreq(n, 1.0 / n)
    if order % 2:
        k[n // 2] = 0.0
    c = np.fft.fft(values, axis=0)
    shape = (n,) + (1,) * (values.ndim - 1)
    return np.real(np.fft.ifft(c * ((1j * k) ** order).reshape(shape), axis=0))


def differentiation_matrix(n: int) -> np.ndarray:
    """Dense first-derivative matrix for even ``n`` (Nyquist mode annihilated)."""
    if n % 2:
        raise ValueError("n must be even")
    d = np.arange(n)[:, None] - np.arange(n)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        mat = 0.5 * (-1.0) ** d / np.tan(np.pi * d / n)
    mat[d == 0] = 0.0
    return mat


def kress_weights(n: int) -> np.ndarray:
    """Weights R_d for  int_0^{2pi} log(4 sin^2((s-t)/2)) f(t) dt ~ sum_j R_{i-j} f_j."""
    half = n // 2
    d = np.arange(n)
    m = np.arange(1, half)
    t = 2.0 * np.pi * d / n
    r = -(4.0 * np.pi / n) * (np.cos(np.outer(t, m)) / m).sum(axis=1)
    r -= (4.0 * np.pi / n**2) * (-1.0) ** d
    return r


def kress_matrix(n: int) -> np.ndarray:
    r = kress_weights(n)
    d = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return r[d]
