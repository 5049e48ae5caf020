"""Band-limited functions on the flat torus, stored by their Fourier coefficients.

A function lives on a :class:`FreqBox`, the frequencies ``k`` with
``max|k_i| <= K``.  Coefficients are held in a dense complex array of shape
``(2K+1,)*n`` whose entry ``[k + K]`` is the coefficient of
``exp(2 pi i k.x)``.  C-order flattening of that array is the lexicographic
order on ``(k_1, ..., k_n)``, which every enumeration and file format uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence, Union

import jsonschema
import numpy as np

from .errors import SchemaError

Multiplier = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class FreqBox:
    n: int
    K: int

    def __post_init__(self):
        if self.n < 1 or self.K < 0:
            raise ValueError(f"invalid box n={self.n}, K={self.K}")

    @property
    def side(self) -> int:
        return 2 * self.K + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.n

    @property
    def size(self) -> int:
        return self.side**self.n

    @cached_property
    def grid(self) -> np.ndarray:
        """Integer frequencies, shape ``(*shape, n)``."""
        axes = np.meshgrid(*[np.arange(-self.K, self.K + 1)] * self.n, indexing="ij")
        out = np.stack(axes, axis=-1).astype(np.int64)
        out.flags.writeable = False
        return out

    def frequencies(self) -> np.ndarray:
        """All frequencies in lexicographic order, shape ``(size, n)``."""
        return self.grid.reshape(-1, self.n)

    def __iter__(self):
        for k in self.frequencies():
            yield tuple(int(v) for v in k)

    def __contains__(self, k) -> bool:
        return len(k) == self.n and all(abs(int(v)) <= self.K for v in k)

    def index(self, k) -> tuple[int, ...]:
        if k not in self:
            raise KeyError(f"frequency {tuple(k)} outside box K={self.K}")
        return tuple(int(v) + self.K for v in k)


def bracket(ks: np.ndarray) -> np.ndarray:
    """Japanese bracket (1 + |k|^2)^(1/2) along the last axis."""
    ks = np.asarray(ks, dtype=float)
    return np.sqrt(1.0 + np.sum(ks * ks, axis=-1))


def bessel_symbol(box: FreqBox, s: float) -> np.ndarray:
    """Symbol <k>^s of the Bessel potential (1 - Laplacian)^(s/2) on the box."""
    return bracket(box.grid) ** s


def is_hermitian(coeffs: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(coeffs), initial=0.0)))
    mirrored = np.conj(coeffs[(slice(None, None, -1),) * coeffs.ndim])
    return bool(np.max(np.abs(coeffs - mirrored), initial=0.0) <= tol * scale)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients of a trigonometric polynomial on T^n.

    The array is copied and frozen on construction.  With ``real=True`` the
    coefficients must satisfy ``c(-k) = conj(c(k))``.
    """

    box: FreqBox
    coeffs: np.ndarray
    real: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != self.box.shape:
            raise ValueError(f"coefficient shape {c.shape} != box shape {self.box.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficient")
        if self.real and not is_hermitian(c):
            raise ValueError("real flag set but coefficients are not Hermitian-symmetric")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, box: FreqBox, real: bool = False) -> Spectrum:
        return cls(box, np.zeros(box.shape, dtype=complex), real)

    @classmethod
    def from_dict(cls, box: FreqBox, values: dict, real: bool = False) -> Spectrum:
        c = np.zeros(box.shape, dtype=complex)
        for k, v in values.items():
            c[box.index(k)] = v
        return cls(box, c, real)

    def __getitem__(self, k) -> complex:
        if k not in self.box:
            return 0j
        return complex(self.coeffs[self.box.index(k)])

    @property
    def n(self) -> int:
        return self.box.n

    def with_coeffs(self, coeffs: np.ndarray) -> Spectrum:
        return Spectrum(self.box, coeffs, real=self.real and is_hermitian(coeffs))

    def __add__(self, other: Spectrum) -> Spectrum:
        _same_box(self.box, other.box)
        c = self.coeffs + other.coeffs
        return Spectrum(self.box, c, self.real and other.real and is_hermitian(c))

    def __sub__(self, other: Spectrum) -> Spectrum:
        _same_box(self.box, other.box)
        c = self.coeffs - other.coeffs
        return Spectrum(self.box, c, self.real and other.real and is_hermitian(c))

    def __mul__(self, scalar) -> Spectrum:
        c = self.coeffs * scalar
        return Spectrum(self.box, c, self.real and is_hermitian(c))

    __rmul__ = __mul__

    def __neg__(self) -> Spectrum:
        return Spectrum(self.box, -self.coeffs, self.real)

    def max_abs_diff(self, other: Spectrum) -> float:
        _same_box(self.box, other.box)
        return float(np.max(np.abs(self.coeffs - other.coeffs)))


def _same_box(a: FreqBox, b: FreqBox):
    if a != b:
        raise ValueError(f"frequency boxes differ: {a} vs {b}")


def multiplier_values(box: FreqBox, m: Multiplier) -> np.ndarray:
    """Tabulate a multiplier on the box.

    ``m`` is either an array of shape ``box.shape`` or a vectorised callable
    receiving the frequency grid of shape ``(*box.shape, n)``.
    """
    if callable(m):
        values = np.asarray(m(box.grid))
    else:
        values = np.asarray(m)
    return np.broadcast_to(values, box.shape)


def apply_multiplier(f: Spectrum, m: Multiplier) -> Spectrum:
    """Coefficientwise product ``m(k) * f(k)``; the box is unchanged."""
    return f.with_coeffs(multiplier_values(f.box, m) * f.coeffs)


def hs_inner(f: Spectrum, g: Spectrum, s: float) -> complex:
    """H^s inner product sum_k <k>^{2s} f(k) conj(g(k))."""
    _same_box(f.box, g.box)
    return complex(np.sum(bessel_symbol(f.box, 2 * s) * f.coeffs * np.conj(g.coeffs)))


def hs_norm(f: Spectrum, s: float) -> float:
    return math.sqrt(float(np.sum(bessel_symbol(f.box, 2 * s) * np.abs(f.coeffs) ** 2)))


def _folded(f: Spectrum, N: int) -> np.ndarray:
    # Aliased coefficient array on Z_N^n; exact for any N since samples only see k mod N.
    out = np.zeros((N,) * f.n, dtype=complex)
    idx = tuple(np.mod(f.box.grid[..., i], N).ravel() for i in range(f.n))
    np.add.at(out, idx, f.coeffs.ravel())
    return out


def evaluate_grid(f: Spectrum, N: int) -> np.ndarray:
    """Sample f at the points ``j/N``, ``j in {0..N-1}^n``.

    Output shape is ``(N,)*n`` with axis ``i`` indexing ``x_i``.  Real
    spectra give real arrays.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    samples = np.fft.ifftn(_folded(f, N)) * N**f.n
    return samples.real.copy() if f.real else samples


def grid_to_spectrum(samples: np.ndarray, box: FreqBox, real: bool = False) -> Spectrum:
    """Inverse of :func:`evaluate_grid`; exact when the grid side exceeds 2K."""
    samples = np.asarray(samples)
    N = samples.shape[0]
    if samples.shape != (N,) * box.n:
        raise ValueError(f"expected a square grid of dimension {box.n}")
    if N <= 2 * box.K:
        raise ValueError(f"grid side {N} must exceed 2K = {2 * box.K}")
    dft = np.fft.fftn(samples) / N**box.n
    idx = tuple(np.mod(box.grid[..., i], N) for i in range(box.n))
    c = dft[idx]
    if real:
        c = 0.5 * (c + np.conj(c[(slice(None, None, -1),) * box.n]))
    return Spectrum(box, c, real)


def evaluate_points(f: Spectrum, points: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Evaluate f at arbitrary points of R^n, shape ``(P, n)`` -> ``(P,)``.

    The exponential factors per axis, so only ``P * n * (2K+1)`` complex
    exponentials are computed.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    ks = np.arange(-f.box.K, f.box.K + 1, dtype=float)
    out = np.empty(len(points), dtype=complex)
    for start in range(0, len(points), chunk):
        block = points[start : start + chunk]
        acc = np.broadcast_to(f.coeffs, (len(block), *f.box.shape))
        for axis in range(f.n):
            # contract the leading frequency axis with this coordinate's factor
            e = np.exp(2j * np.pi * np.outer(block[:, axis], ks))
            acc = np.einsum("pk,pk...->p...", e, acc)
        out[start : start + chunk] = acc
    return out


def lp_bessel_norm(f: Spectrum, p: float, s: float, oversample: int = 4) -> float:
    """Grid approximation of the Bessel potential norm ||(1-Lap)^{s/2} f||_{L^p}.

    The trigonometric polynomial ``<k>^s f`` is sampled on a uniform grid of
    ``oversample*(2K+1)`` points per axis and the Riemann sum of ``|.|^p`` is
    returned to the power ``1/p``.  For p = 2 this is exact (discrete
    Parseval); for other p the error shrinks as ``oversample`` grows.
    """
    if not (math.isfinite(p) and p > 1):
        raise ValueError(f"p must be finite and > 1, got {p}")
    if oversample < 2:
        raise ValueError("oversample must be >= 2")
    h = apply_multiplier(f, bessel_symbol(f.box, s))
    values = np.abs(evaluate_grid(h, oversample * f.box.side))
    peak = float(values.max(initial=0.0))
    if peak == 0.0:
        return 0.0
    # Scale by the peak to keep large p from overflowing.
    return peak * float(np.mean((values / peak) ** p)) ** (1.0 / p)


@dataclass(frozen=True, eq=False)
class DataFunction:
    """A function on T^n x D: one spectrum per direction, all on one box.

    ``coeffs`` has shape ``(len(directions), *box.shape)``.
    """

    directions: tuple
    box: FreqBox
    coeffs: np.ndarray

    def __post_init__(self):
        dirs = tuple(self.directions)
        if len(set(dirs)) != len(dirs):
            raise ValueError("duplicate directions in data function")
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (len(dirs), *self.box.shape):
            raise ValueError(f"data shape {c.shape} does not match {len(dirs)} directions on {self.box}")
        c.flags.writeable = False
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_spectra(cls, directions: Sequence, spectra: Sequence[Spectrum]) -> DataFunction:
        if len(directions) != len(spectra):
            raise ValueError("need one spectrum per direction")
        if not spectra:
            raise ValueError("empty data function needs an explicit box")
        box = spectra[0].box
        for sp in spectra:
            _same_box(box, sp.box)
        return cls(tuple(directions), box, np.stack([sp.coeffs for sp in spectra]))

    @property
    def spectra(self) -> tuple[Spectrum, ...]:
        return tuple(Spectrum(self.box, c) for c in self.coeffs)

    def __len__(self):
        return len(self.directions)

    def __getitem__(self, i: int) -> Spectrum:
        return Spectrum(self.box, self.coeffs[i])


def _as_data(g) -> DataFunction:
    return getattr(g, "data", g)


def data_norm(g, w, s: float, p: float = 2.0, l: float = 2.0, oversample: int = 4) -> float:
    """Weighted mixed norm: l-aggregate over directions of per-direction L_s^p norms.

    ``w`` must provide ``table(directions, box)`` returning weights of shape
    ``(m, *box.shape)``.  p = 2 uses the exact Fourier-side sum.
    """
    if not l >= 1:
        raise ValueError(f"l must be >= 1, got {l}")
    g = _as_data(g)
    if len(g) == 0:
        return 0.0
    weighted = w.table(g.directions, g.box) * g.coeffs
    if p == 2:
        sym = bessel_symbol(g.box, 2 * s)
        axes = tuple(range(1, weighted.ndim))
        per = np.sqrt(np.sum(sym * np.abs(weighted) ** 2, axis=axes))
    else:
        per = np.array([lp_bessel_norm(Spectrum(g.box, c), p, s, oversample) for c in weighted])
    if math.isinf(l):
        return float(per.max())
    return float(np.sum(per**l) ** (1.0 / l))


def data_inner(h, g, w, s: float) -> complex:
    """Inner product of L_s^{2,2}(w): sum_A sum_k w^2 <k>^{2s} h conj(g)."""
    h, g = _as_data(h), _as_data(g)
    if h.directions != g.directions:
        raise ValueError("data functions live on different direction sets")
    w2 = w.table(g.directions, g.box) ** 2
    return complex(np.sum(w2 * bessel_symbol(g.box, 2 * s) * h.coeffs * np.conj(g.coeffs)))


SPECTRUM_SCHEMA = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "K": {"type": "integer", "minimum": 0},
        "real": {"type": "boolean"},
        "coeffs": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "k": {"type": "array", "items": {"type": "integer"}},
                    "re": {"type": "number"},
                    "im": {"type": "number"},
                },
                "required": ["k", "re", "im"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["n", "K", "real", "coeffs"],
    "additionalProperties": False,
}


def validate_schema(obj, schema, what: str):
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"invalid {what}: {exc.message}") from None


def spectrum_to_json(f: Spectrum) -> dict:
    entries = []
    for k, c in zip(f.box.frequencies(), f.coeffs.ravel()):
        if c != 0:
            entries.append({"k": [int(v) for v in k], "re": float(c.real), "im": float(c.imag)})
    return {"n": f.n, "K": f.box.K, "real": bool(f.real), "coeffs": entries}


def spectrum_from_json(obj: dict) -> Spectrum:
    validate_schema(obj, SPECTRUM_SCHEMA, "spectrum")
    box = FreqBox(obj["n"], obj["K"])
    c = np.zeros(box.shape, dtype=complex)
    for entry in obj["coeffs"]:
        k = entry["k"]
        if k not in box:
            raise SchemaError(f"frequency {k} outside box n={box.n}, K={box.K}")
        c[box.index(k)] = complex(entry["re"], entry["im"])
    try:
        return Spectrum(box, c, obj["real"])
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
