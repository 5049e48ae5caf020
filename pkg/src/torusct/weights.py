"""Weights w(k, A) on frequencies x directions and their normal symbol W_k.

Every weight here is relative to a working direction set D and frequency
box: sums over the orthogonal set Omega_k are taken over ``Omega_k & D``.
Certificates record the constants a construction guarantees; ``validate``
checks them against the tabulated values.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import CoveringError, SchemaError, WeightError
from .grassmann import Direction, DirectionSet, omega_rank, orthogonality_mask
from .spectrum import FreqBox, bracket, multiplier_values, validate_schema

DecayCertificate = Union[tuple, Callable[[Direction], tuple]]


@dataclass(frozen=True, eq=False)
class Weight:
    """A positive rule ``(k, A) -> w(k, A)`` with optional certificates.

    ``decay`` is a pair ``(C, N)`` meaning ``w(k, A) >= C <k>^-N`` for every
    direction, or a callable returning such a pair per direction.
    ``bounds`` is ``(c_w^2, C_w^2)`` bracketing W_k.  ``tabulate`` is an
    optional fast path returning the full ``(m, *box.shape)`` table.
    """

    rule: Callable[[tuple, Direction], float]
    kind: str = "custom"
    decay: Optional[DecayCertificate] = None
    bounds: Optional[tuple] = None
    tabulate: Optional[Callable] = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, k, A: Direction) -> float:
        return float(self.rule(tuple(int(v) for v in k), A))

    def table(self, directions, box: FreqBox) -> np.ndarray:
        directions = tuple(directions)
        key = (directions, box)
        if key not in self._cache:
            out = None
            if self.tabulate is not None:
                out = self.tabulate(directions, box)
            if out is None:
                ks = list(box)
                out = np.array([[self.rule(k, A) for k in ks] for A in directions], dtype=float)
                out = out.reshape(len(directions), *box.shape)
            out = np.array(out, dtype=float)
            out.flags.writeable = False
            self._cache[key] = out
        return self._cache[key]

    def decay_for(self, A: Direction) -> Optional[tuple]:
        if self.decay is None:
            return None
        return self.decay(A) if callable(self.decay) else tuple(self.decay)


@dataclass(frozen=True)
class NormalSymbol:
    """The table W_k = sum over Omega_k & D of w(k, A)^2."""

    box: FreqBox
    values: np.ndarray

    @property
    def min(self) -> float:
        return float(self.values.min())

    @property
    def max(self) -> float:
        return float(self.values.max())

    @property
    def uncovered(self) -> list[tuple[int, ...]]:
        """Frequencies where W_k = 0, so inversion is impossible there."""
        return [tuple(int(v) for v in k) for k in self.box.grid[self.values <= 0]]

    def require_positive(self):
        bad = self.uncovered
        if bad:
            raise CoveringError(f"W_k = 0 at {len(bad)} frequencies, e.g. {bad[:5]}", bad)


def normal_multiplier(w: Weight, D: DirectionSet, box: FreqBox) -> NormalSymbol:
    mask = orthogonality_mask(D.directions, box)
    values = np.sum(np.where(mask, w.table(D.directions, box) ** 2, 0.0), axis=0)
    values.flags.writeable = False
    return NormalSymbol(box, values)


def _check_box(k, box: FreqBox):
    if k not in box:
        raise KeyError(f"weight was built on K={box.K}; frequency {k} is outside")


def constant_weight(value: float = 1.0, origin: Optional[float] = None) -> Weight:
    """w = value everywhere, optionally with a different value at k = 0."""
    if value <= 0 or (origin is not None and origin <= 0):
        raise WeightError("weights must be strictly positive")

    def rule(k, A):
        if origin is not None and not any(k):
            return origin
        return value

    def tabulate(directions, box):
        out = np.full((len(directions), *box.shape), float(value))
        if origin is not None:
            out[(slice(None),) + (box.K,) * box.n] = origin
        return out

    low = value if origin is None else min(value, origin)
    return Weight(rule, kind="constant", decay=(low, 0.0), tabulate=tabulate)


def good_weight(h, N: float, D: DirectionSet, box: FreqBox,
                a: Optional[float] = None, b: Optional[float] = None,
                exponent: float = 1.0) -> Weight:
    """The construction ``h(k)/phi_k(A)^exponent + <k>^-N/phi(A)`` on orthogonal pairs, 1 elsewhere.

    ``h`` is a constant or a vectorised callable on the frequency grid, with
    values in ``[a, b]`` (taken from the box when not given).  With
    ``exponent = 1`` the weight carries the certificates
    ``a^2 <= W_k <= 2 (1 + b^2) sum_{i <= |D|} i^-2`` and
    ``w(k, A) >= <k>^-N / phi(A)``.  Other exponents give the single-term
    variant's decay profile and carry no W_k bounds.
    """
    hv = np.array(multiplier_values(box, h), dtype=float)
    a = float(hv.min()) if a is None else float(a)
    b = float(hv.max()) if b is None else float(b)
    if a <= 0:
        raise WeightError(f"h must be bounded below by a > 0, got a = {a}")
    if hv.min() < a or hv.max() > b:
        raise WeightError(f"h leaves the declared range [{a}, {b}]")
    dirs = D.directions
    phi = np.arange(1, len(dirs) + 1, dtype=float)
    gk = bracket(box.grid) ** (-float(N))

    def tabulate(directions, tbox):
        if directions != dirs or tbox != box:
            return None
        ranks = omega_rank(dirs, box).astype(float)
        on = ranks > 0
        safe = np.where(on, ranks, 1.0)
        vals = hv / safe**exponent + gk / phi.reshape(-1, *(1,) * box.n)
        return np.where(on, vals, 1.0)

    def rule(k, A):
        _check_box(k, box)
        table = weight.table(dirs, box)
        return float(table[(dirs.index(A),) + box.index(k)])

    bounds = None
    if exponent == 1.0:
        zeta = sum(1.0 / i**2 for i in range(1, len(dirs) + 1))
        bounds = (a * a, 2.0 * zeta * (1.0 + b * b))
    weight = Weight(
        rule,
        kind="good",
        decay=lambda A: (1.0 / D.enumeration(A), float(N)),
        bounds=bounds,
        tabulate=tabulate,
    )
    return weight


def normalize(w: Weight, D: DirectionSet, box: FreqBox) -> Weight:
    """Rescale so that W_k = 1 on the whole box."""
    W = normal_multiplier(w, D, box)
    try:
        W.require_positive()
    except CoveringError as exc:
        raise WeightError(f"cannot normalize: {exc}") from None
    root = np.sqrt(W.values)
    dirs = D.directions

    def tabulate(directions, tbox):
        if tbox != box:
            return None
        return w.table(directions, box) / root

    def rule(k, A):
        _check_box(k, box)
        return w(k, A) / float(root[box.index(k)])

    decay = None
    if w.decay is not None:
        top = float(root.max())
        decay = lambda A: (w.decay_for(A)[0] / top, w.decay_for(A)[1])
    out = Weight(rule, kind="normalized", decay=decay, bounds=(1.0, 1.0), tabulate=tabulate)
    out.table(dirs, box)
    return out


def partition_weight(D: DirectionSet, box: FreqBox) -> Weight:
    """``2^-phi_k(A)`` renormalised by the finite geometric sum; first powers over Omega_k & D sum to 1."""
    dirs = D.directions
    ranks = omega_rank(dirs, box)
    count = ranks.max(axis=0)
    if np.any(count == 0):
        bad = [tuple(int(v) for v in k) for k in box.grid[count == 0]]
        raise CoveringError(f"{len(bad)} frequencies have no orthogonal direction, e.g. {bad[:5]}", bad)
    norm = 1.0 - 2.0 ** (-count.astype(float))
    table = np.where(ranks > 0, 2.0 ** (-ranks.astype(float)) / norm, 1.0)

    def tabulate(directions, tbox):
        return table if (directions, tbox) == (dirs, box) else None

    def rule(k, A):
        _check_box(k, box)
        return float(table[(dirs.index(A),) + box.index(k)])

    return Weight(rule, kind="partition", decay=(2.0 ** -len(dirs), 0.0), tabulate=tabulate)


def partition_sums(w: Weight, D: DirectionSet, box: FreqBox) -> np.ndarray:
    """First-power sums of w over Omega_k & D for each k."""
    mask = orthogonality_mask(D.directions, box)
    return np.sum(np.where(mask, w.table(D.directions, box), 0.0), axis=0)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    passed: bool
    min: float
    max: float
    witness_k: Optional[tuple] = None
    note: str = ""


@dataclass(frozen=True)
class WeightReport:
    checks: tuple[PropertyCheck, ...]
    uniform_decay: Optional[tuple] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> PropertyCheck:
        return next(c for c in self.checks if c.name == name)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["property", "pass", "min", "max", "witness_k"])
        for c in self.checks:
            witness = "" if c.witness_k is None else " ".join(map(str, c.witness_k))
            writer.writerow([c.name, str(c.passed).lower(), repr(c.min), repr(c.max), witness])
        return buf.getvalue()


def _first_k(box: FreqBox, bad: np.ndarray):
    hits = np.argwhere(bad)
    if len(hits) == 0:
        return None
    return tuple(int(v) - box.K for v in hits[0])


def validate(w: Weight, D: DirectionSet, box: FreqBox, rtol: float = 1e-12) -> WeightReport:
    """Check positivity/decay, the upper bound and the lower bound on W_k.

    Failures are reported with a witness frequency, never raised.
    """
    table = w.table(D.directions, box)
    br = bracket(box.grid)

    # (i) polynomial decay, checked direction by direction
    ratios = []
    witness = None
    per_dir = []
    for a, A in enumerate(D):
        cert = w.decay_for(A)
        row = table[a]
        if cert is None:
            C, N = float(row.min()), 0.0
        else:
            C, N = map(float, cert)
        per_dir.append((C, N))
        floor = C * br ** (-N)
        ratio = row / floor if C > 0 else np.full(row.shape, -np.inf)
        ratios.append(ratio)
        bad = (row < floor * (1 - rtol)) | (row <= 0) | (C <= 0)
        if witness is None and np.any(bad):
            witness = _first_k(box, bad)
    ratios = np.array(ratios) if ratios else np.zeros(1)
    decay = PropertyCheck("decay", witness is None, float(ratios.min()), float(ratios.max()), witness,
                          "certified" if w.decay is not None else "empirical C, N=0")
    uniform = None
    if per_dir:
        uniform = (min(c for c, _ in per_dir), max(nn for _, nn in per_dir))

    W = normal_multiplier(w, D, box).values
    lo_i, hi_i = np.unravel_index(np.argmin(W), W.shape), np.unravel_index(np.argmax(W), W.shape)
    wmin, wmax = float(W[lo_i]), float(W[hi_i])
    if w.bounds is not None:
        c2, C2 = map(float, w.bounds)
        up_bad, lo_bad = W > C2 * (1 + rtol), (W < c2 * (1 - rtol)) | (W <= 0)
        note = f"certified c_w^2={c2!r}, C_w^2={C2!r}"
    else:
        up_bad, lo_bad = ~np.isfinite(W), W <= 0
        note = "empirical"
    upper = PropertyCheck("upper", not up_bad.any(), wmin, wmax, _first_k(box, up_bad), note)
    lower = PropertyCheck("lower", not lo_bad.any(), wmin, wmax, _first_k(box, lo_bad), note)
    return WeightReport((decay, upper, lower), uniform)


def certified_bounds(w: Weight, D: DirectionSet, box: FreqBox) -> tuple[float, float]:
    """(c_w, C_w) from the weight's certificate, else the empirical extremes of W_k."""
    if w.bounds is not None:
        c2, C2 = w.bounds
    else:
        W = normal_multiplier(w, D, box)
        c2, C2 = W.min, W.max
    return math.sqrt(c2), math.sqrt(C2)


# ---------------------------------------------------------------------------
# config files

WEIGHT_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["constant", "good", "partition", "normalized"]},
        "params": {"type": "object"},
    },
    "required": ["kind"],
    "additionalProperties": False,
}


def weight_from_config(cfg: dict, D: DirectionSet, box: FreqBox) -> Weight:
    """Build a weight from ``{"kind": ..., "params": {...}}``.

    constant: ``value`` (default 1), optional ``origin``;
    good: ``h`` (constant, default 1), ``N`` (default 0), optional ``a``, ``b``;
    partition: no params;
    normalized: ``base``, another weight config (default constant 1).
    """
    validate_schema(cfg, WEIGHT_SCHEMA, "weight config")
    kind, params = cfg["kind"], dict(cfg.get("params", {}))
    allowed = {
        "constant": {"value", "origin"},
        "good": {"h", "N", "a", "b"},
        "partition": set(),
        "normalized": {"base"},
    }[kind]
    unknown = set(params) - allowed
    if unknown:
        raise SchemaError(f"unknown {kind} weight params: {sorted(unknown)}")
    if kind == "constant":
        return constant_weight(float(params.get("value", 1.0)), params.get("origin"))
    if kind == "good":
        return good_weight(float(params.get("h", 1.0)), float(params.get("N", 0)), D, box,
                           params.get("a"), params.get("b"))
    if kind == "partition":
        return partition_weight(D, box)
    base = weight_from_config(params.get("base", {"kind": "constant"}), D, box)
    return normalize(base, D, box)
