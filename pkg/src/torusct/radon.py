"""The d-plane Radon transform on T^n, its weighted adjoint, and inversion formulas.

On band-limited functions the transform is a frequency mask: the data for
direction A keeps exactly the coefficients with k orthogonal to A.  The
plane-integral definition is implemented separately by a rectangle rule and
serves as the independent check of the mask.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import CoveringError, NumericError, SchemaError, WeightError
from .grassmann import (
    Direction,
    DirectionSet,
    TransverseFrame,
    direction_from_json,
    direction_set_from_json,
    direction_set_to_json,
    is_orthogonal,
    orthogonality_mask,
    transverse_frame,
)
from .spectrum import (
    DataFunction,
    FreqBox,
    Spectrum,
    evaluate_points,
    grid_to_spectrum,
    is_hermitian,
    spectrum_from_json,
    spectrum_to_json,
    validate_schema,
)
from .weights import NormalSymbol, Weight, normal_multiplier, partition_sums

__all__ = [
    "Sinogram",
    "forward",
    "forward_quadrature",
    "radon_samples",
    "transverse_samples",
    "slice_invert",
    "adjoint",
    "normal_multiplier",
    "NormalSymbol",
    "invert_filtered_adjoint",
    "invert_bp_sum",
    "invert_slice",
]


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Radon data: one spectrum per direction of a DirectionSet."""

    directions: DirectionSet
    data: DataFunction

    def __post_init__(self):
        if self.data.directions != self.directions.directions:
            raise ValueError("sinogram data is not aligned with its direction set")

    @classmethod
    def from_coeffs(cls, D: DirectionSet, box: FreqBox, coeffs: np.ndarray) -> Sinogram:
        return cls(D, DataFunction(D.directions, box, coeffs))

    @property
    def box(self) -> FreqBox:
        return self.data.box

    @property
    def coeffs(self) -> np.ndarray:
        return self.data.coeffs

    def __len__(self):
        return len(self.directions)

    def __getitem__(self, i: int) -> Spectrum:
        return self.data[i]

    def spectrum_of(self, A: Direction) -> Spectrum:
        return self.data[self.directions.directions.index(A)]

    def __add__(self, other: Sinogram) -> Sinogram:
        _aligned(self, other)
        return Sinogram.from_coeffs(self.directions, self.box, self.coeffs + other.coeffs)

    def __sub__(self, other: Sinogram) -> Sinogram:
        _aligned(self, other)
        return Sinogram.from_coeffs(self.directions, self.box, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> Sinogram:
        return Sinogram.from_coeffs(self.directions, self.box, self.coeffs * scalar)

    __rmul__ = __mul__


def _aligned(a: Sinogram, b: Sinogram):
    if a.directions != b.directions or a.box != b.box:
        raise ValueError("sinograms live on different directions or boxes")


def _check_dims(f: Spectrum, D: DirectionSet):
    if f.n != D.n:
        raise ValueError(f"spectrum on T^{f.n} but directions in Q^{D.n}")


def forward(f: Spectrum, D: DirectionSet) -> Sinogram:
    """R_{d,A} f for every A in D, by masking coefficients not orthogonal to A."""
    _check_dims(f, D)
    mask = orthogonality_mask(D.directions, f.box)
    return Sinogram.from_coeffs(D, f.box, np.where(mask, f.coeffs, 0.0))


def nyquist_bound(f: Spectrum, A: Direction) -> int:
    """max |k . v| over the support of f and the basis rows v of A."""
    ks = f.box.grid[f.coeffs != 0]
    if len(ks) == 0:
        return 0
    return int(np.abs(ks @ A.matrix().T).max())


def radon_samples(f: Spectrum, A: Direction, points: np.ndarray, M: int) -> np.ndarray:
    """Plane averages of f through the given points, by an M^d rectangle rule on [0,1]^d.

    Evaluates ``mean_t f(x + t_1 v_1 + ... + t_d v_d)`` with ``t`` on the
    grid ``{0, 1/M, ..., (M-1)/M}^d``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    t = np.array(list(itertools.product(range(M), repeat=A.d)), dtype=float) / M
    offsets = t @ A.matrix().astype(float)
    values = evaluate_points(f, (offsets[:, None, :] + points[None]).reshape(-1, f.n))
    return values.reshape(len(offsets), len(points)).mean(axis=0)


def forward_quadrature(f: Spectrum, A: Direction, M: int) -> Spectrum:
    """R_{d,A} f computed from the plane-integral definition.

    The t-frequencies of the integrand are the products k.v, so the
    rectangle rule is exact once M exceeds their largest modulus over the
    support of f; smaller M is refused.  The averages are taken on the
    ``(2K+1)^n`` sample grid and converted back to coefficients by the DFT.
    """
    if A.n != f.n:
        raise ValueError(f"spectrum on T^{f.n} but direction in Q^{A.n}")
    need = nyquist_bound(f, A) + 1
    if M < need:
        raise NumericError(f"M = {M} is below the Nyquist bound for {A}; need M >= {need}")
    N = f.box.side
    idx = np.array(list(itertools.product(range(N), repeat=f.n)), dtype=float)
    values = radon_samples(f, A, idx / N, M).reshape((N,) * f.n)
    if f.real:
        values = values.real
    return grid_to_spectrum(values, f.box, real=f.real)


def default_transverse_side(box: FreqBox, A: Direction) -> int:
    return 2 * (box.K * A.max_entry * box.n) + 1


def transverse_samples(data: Spectrum, A: Direction, L: int | None = None,
                       frame: TransverseFrame | None = None) -> np.ndarray:
    """Sample a function at the parallelepiped points ``phi_A(T, 0)``, T on the uniform L^q grid.

    Returns an array of shape ``(L,)*q``; axis ``j`` follows ``frame.axes[j]``.
    """
    frame = frame or transverse_frame(A)
    L = L or default_transverse_side(data.box, A)
    q = len(frame.axes)
    T = np.array(list(itertools.product(range(L), repeat=q)), dtype=float) / L
    return evaluate_points(data, frame.point(T)).reshape((L,) * q)


def slice_invert(samples: np.ndarray, A: Direction, k, s: float = 0.0,
                 frame: TransverseFrame | None = None) -> complex:
    """Recover one Fourier coefficient from transverse samples of R_{d,A} f.

    Computes the uniform-sum version of
    ``integral over [0,1]^q of R f(phi_A(T, 0)) exp(-2 pi i k_axes . T) dT``
    and multiplies by ``<k>^{2s}``; with ``s > 0`` the samples are those of
    the smoothed function ``(1 - Lap)^{-s} f``.  Exact when the grid side
    exceeds twice the data's band limit.
    """
    k = tuple(int(v) for v in k)
    if not is_orthogonal(k, A):
        raise ValueError(f"k = {k} is not orthogonal to {A}; the slice formula does not apply")
    frame = frame or transverse_frame(A)
    samples = np.asarray(samples)
    q = len(frame.axes)
    if samples.ndim != q:
        raise ValueError(f"expected {q}-dimensional transverse samples, got {samples.ndim}")
    L = samples.shape[0]
    kt = np.array([k[a] for a in frame.axes], dtype=float)
    T = np.stack(np.meshgrid(*[np.arange(L) / L] * q, indexing="ij"), axis=-1)
    value = np.mean(samples * np.exp(-2j * np.pi * (T @ kt)))
    return complex(value * (1.0 + sum(v * v for v in k)) ** s)


def invert_slice(g: Sinogram, L: int | None = None) -> Spectrum:
    """Rebuild every coefficient from physical-space samples of the data.

    For each k the first direction of Omega_k & D is used.
    """
    box, D = g.box, g.directions
    mask = orthogonality_mask(D.directions, box)
    owner = np.argmax(mask, axis=0)
    covered = mask.any(axis=0)
    if not covered.all():
        bad = [tuple(int(v) for v in k) for k in box.grid[~covered]]
        raise CoveringError(f"{len(bad)} frequencies have no orthogonal direction", bad)
    out = np.zeros(box.shape, dtype=complex)
    for a, A in enumerate(D):
        targets = np.argwhere(owner == a)
        if len(targets) == 0:
            continue
        frame = transverse_frame(A)
        samples = transverse_samples(g[a], A, L, frame)
        for idx in targets:
            k = tuple(int(v) - box.K for v in idx)
            out[tuple(idx)] = slice_invert(samples, A, k, 0.0, frame)
    return Spectrum(box, out, real=is_hermitian(out))


def adjoint(g: Sinogram, w: Weight, s: float = 0.0) -> Spectrum:
    """R_d^* g with coefficients sum over Omega_k & D of w(k, A)^2 g(k, A).

    The formula does not depend on the Sobolev scale ``s``; the argument is
    accepted so call sites can state which pairing they mean.
    """
    D, box = g.directions, g.box
    mask = orthogonality_mask(D.directions, box)
    w2 = w.table(D.directions, box) ** 2
    c = np.sum(np.where(mask, w2 * g.coeffs, 0.0), axis=0)
    return Spectrum(box, c, real=is_hermitian(c))


def invert_filtered_adjoint(g: Sinogram, w: Weight) -> Spectrum:
    """Apply the multiplier 1/W_k to the adjoint."""
    W = normal_multiplier(w, g.directions, g.box)
    W.require_positive()
    back = adjoint(g, w)
    return back.with_coeffs(back.coeffs / W.values)


def invert_bp_sum(g: Sinogram, w1: Weight, tol: float = 1e-12) -> Spectrum:
    """Weighted backprojection sum ``sum_A F_{w1(., A)} g(., A)``.

    Requires w1 to be a partition of unity over each Omega_k & D.
    """
    D, box = g.directions, g.box
    sums = partition_sums(w1, D, box)
    bad = np.abs(sums - 1.0) > tol
    if bad.any():
        k = tuple(int(v) - box.K for v in np.argwhere(bad)[0])
        raise WeightError(f"weight is not a partition of unity over Omega_k: sum = {float(sums[bad][0])!r} at k = {k}")
    c = np.sum(w1.table(D.directions, box) * g.coeffs, axis=0)
    return Spectrum(box, c, real=is_hermitian(c))


def backprojection_sum(g: Sinogram) -> Spectrum:
    """The unweighted sum of the data over all directions."""
    c = np.sum(g.coeffs, axis=0)
    return Spectrum(g.box, c, real=is_hermitian(c))


SINOGRAM_SCHEMA = {
    "type": "object",
    "properties": {
        "directions": {"type": "object"},
        "spectra": {"type": "array", "items": {"type": "object"}},
    },
    "required": ["directions", "spectra"],
    "additionalProperties": False,
}


def sinogram_to_json(g: Sinogram) -> dict:
    return {
        "directions": direction_set_to_json(g.directions),
        "spectra": [spectrum_to_json(sp) for sp in g.data.spectra],
    }


def sinogram_from_json(obj: dict) -> Sinogram:
    validate_schema(obj, SINOGRAM_SCHEMA, "sinogram")
    D = direction_set_from_json(obj["directions"])
    spectra = [spectrum_from_json(s) for s in obj["spectra"]]
    if len(spectra) != len(D):
        raise SchemaError(f"{len(spectra)} spectra for {len(D)} directions")
    if any(sp.n != D.n for sp in spectra):
        raise SchemaError("spectrum dimension differs from direction dimension")
    if len({sp.box for sp in spectra}) > 1:
        raise SchemaError("spectra use different frequency boxes")
    # Spectra are listed in the file's order; the set re-sorts, so map by position.
    order = [D.directions.index(direction_from_json(a)) for a in obj["directions"]["directions"]]
    coeffs = np.zeros((len(D), *spectra[0].box.shape), dtype=complex)
    for pos, sp in zip(order, spectra):
        coeffs[pos] = sp.coeffs
    return Sinogram.from_coeffs(D, spectra[0].box, coeffs)
