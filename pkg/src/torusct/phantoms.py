"""Test functions on the torus."""

from __future__ import annotations

import numpy as np

from .spectrum import FreqBox, Spectrum, bracket


def hermitian_part(c: np.ndarray) -> np.ndarray:
    return 0.5 * (c + np.conj(c[(slice(None, None, -1),) * c.ndim]))


def random_phantom(box: FreqBox, rng: np.random.Generator, real: bool = False,
                   zero_mean: bool = False) -> Spectrum:
    """Gaussian coefficients under a <k>^-2 envelope."""
    c = (rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape)) * bracket(box.grid) ** -2.0
    if real:
        c = hermitian_part(c)
    if zero_mean:
        c[(box.K,) * box.n] = 0
    return Spectrum(box, c, real)


def delta_phantom(box: FreqBox, k, value: complex = 1.0, real: bool = False) -> Spectrum:
    """A single exponential ``value * exp(2 pi i k.x)``.

    With ``real`` the conjugate coefficient is placed at -k as well.
    """
    k = tuple(int(v) for v in k)
    if not real:
        return Spectrum.from_dict(box, {k: value})
    minus = tuple(-v for v in k)
    if k == minus:
        return Spectrum.from_dict(box, {k: complex(value).real}, real=True)
    return Spectrum.from_dict(box, {k: value, minus: np.conj(value)}, real=True)


def bump_phantom(box: FreqBox, rho: float = 0.4) -> Spectrum:
    """Product of truncated Poisson kernels, a smooth strictly positive function.

    Each factor ``sum_{|m|<=K} rho^|m| e^{2 pi i m x}`` stays above
    ``1 - 2 rho``, positive for ``rho < 1/2``.
    """
    if not 0 < rho < 0.5:
        raise ValueError("rho must lie in (0, 1/2)")
    c = np.prod(rho ** np.abs(box.grid).astype(float), axis=-1)
    return Spectrum(box, c.astype(complex), real=True)
