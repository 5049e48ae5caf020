"""Rational d-planes in Q^n with exact integer arithmetic.

A :class:`Direction` is stored as the row Hermite normal form of the
saturated lattice ``span(A) & Z^n``.  That basis is unique, so two integer
spanning sets describe the same subspace exactly when their Directions
compare equal.  All arithmetic here uses Python integers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import SchemaError
from .spectrum import FreqBox, validate_schema

IntMatrix = list[list[int]]


# ---------------------------------------------------------------------------
# exact integer linear algebra


def _rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination."""
    m = [list(map(int, r)) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank, prev = 0, 1
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        p = m[rank][col]
        for i in range(rank + 1, len(m)):
            m[i] = [(p * m[i][j] - m[i][col] * m[rank][j]) // prev for j in range(ncols)]
        prev = p
        rank += 1
        if rank == len(m):
            break
    return rank


def _det(rows: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix (Bareiss)."""
    m = [list(map(int, r)) for r in rows]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1] if n else 1


def integer_kernel(rows: Sequence[Sequence[int]], n: int) -> IntMatrix:
    """Basis of the lattice ``{x in Z^n : M x = 0}``.

    Unimodular column operations bring ``M`` to column echelon form while
    the same operations are applied to an identity block; the identity
    columns sitting under zero columns of ``M`` span the full (hence
    saturated) integer kernel.
    """
    cols = [[int(r[j]) for r in rows] + [int(i == j) for i in range(n)] for j in range(n)]
    nrows = len(rows)
    lead = 0
    for i in range(nrows):
        while True:
            live = [j for j in range(lead, n) if cols[j][i] != 0]
            if len(live) <= 1:
                break
            j0 = min(live, key=lambda j: abs(cols[j][i]))
            for j in live:
                if j != j0:
                    q = cols[j][i] // cols[j0][i]
                    cols[j] = [a - q * b for a, b in zip(cols[j], cols[j0])]
        live = [j for j in range(lead, n) if cols[j][i] != 0]
        if live:
            j = live[0]
            cols[lead], cols[j] = cols[j], cols[lead]
            lead += 1
    return [c[nrows:] for c in cols[lead:]]


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """Row-style HNF of a full-row-rank integer matrix.

    Pivots are positive, each pivot lies strictly right of the one above,
    and entries above a pivot are reduced into ``[0, pivot)``.
    """
    m = [list(map(int, r)) for r in rows]
    if not m:
        return m
    ncols = len(m[0])
    r = 0
    for col in range(ncols):
        if r == len(m):
            break
        while True:
            live = [i for i in range(r, len(m)) if m[i][col] != 0]
            if len(live) <= 1:
                break
            i0 = min(live, key=lambda i: abs(m[i][col]))
            for i in live:
                if i != i0:
                    q = m[i][col] // m[i0][col]
                    m[i] = [a - q * b for a, b in zip(m[i], m[i0])]
        live = [i for i in range(r, len(m)) if m[i][col] != 0]
        if not live:
            continue
        i = live[0]
        m[r], m[i] = m[i], m[r]
        if m[r][col] < 0:
            m[r] = [-a for a in m[r]]
        p = m[r][col]
        for i in range(r):
            q = m[i][col] // p
            if q:
                m[i] = [a - q * b for a, b in zip(m[i], m[r])]
        r += 1
    return m[:r]


# ---------------------------------------------------------------------------
# directions


@dataclass(frozen=True, order=False)
class Direction:
    """A rational d-plane, held as the HNF basis of its saturated lattice."""

    basis: tuple[tuple[int, ...], ...]

    @property
    def d(self) -> int:
        return len(self.basis)

    @property
    def n(self) -> int:
        return len(self.basis[0])

    @property
    def max_entry(self) -> int:
        return max(abs(v) for row in self.basis for v in row)

    def sort_key(self):
        return (self.max_entry, tuple(v for row in self.basis for v in row))

    def matrix(self) -> np.ndarray:
        return np.array(self.basis, dtype=np.int64)

    def __repr__(self):
        rows = ",".join("(" + ",".join(map(str, r)) + ")" for r in self.basis)
        return f"span{{{rows}}}"


def canonicalize(vectors: Iterable[Sequence[int]]) -> Direction:
    """Canonical Direction of the rational span of ``vectors``."""
    rows = [[int(v) for v in vec] for vec in vectors]
    if not rows:
        raise ValueError("not a d-plane: no vectors")
    n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise ValueError("vectors have different lengths")
    d = len(rows)
    if _rank(rows) != d:
        raise ValueError("not a d-plane: vectors are linearly dependent")
    if d > n - 1:
        raise ValueError(f"not a d-plane: need 1 <= d <= n-1, got d={d}, n={n}")
    # Saturation = integer kernel of the integer kernel.
    saturated = integer_kernel(integer_kernel(rows, n), n)
    return Direction(tuple(tuple(r) for r in hermite_normal_form(saturated)))


def _dot(k: Sequence[int], v: Sequence[int]) -> int:
    return sum(int(a) * int(b) for a, b in zip(k, v))


def is_orthogonal(k: Sequence[int], A: Direction) -> bool:
    if len(k) != A.n:
        raise ValueError(f"frequency has dimension {len(k)}, direction lives in Q^{A.n}")
    return all(_dot(k, v) == 0 for v in A.basis)


def orthocomplement_basis(k: Sequence[int]) -> Direction:
    """Canonical (n-1)-plane orthogonal to a nonzero integer vector."""
    k = [int(v) for v in k]
    if not any(k):
        raise ValueError("k = 0 has no (n-1)-dimensional orthogonal complement")
    if len(k) < 2:
        raise ValueError("orthogonal complement needs n >= 2")
    return Direction(tuple(tuple(r) for r in hermite_normal_form(integer_kernel([k], len(k)))))


def height(P: Direction) -> int:
    """Height of a line: l-infinity norm of its primitive representative."""
    if P.d != 1:
        raise ValueError("height is defined for lines (d = 1) only")
    p = P.basis[0]
    return max(abs(v) for v in p) // math.gcd(*p)


@dataclass(frozen=True)
class DirectionSet:
    """Duplicate-free directions sorted by the global enumeration.

    The enumeration orders by the largest absolute basis entry, then
    lexicographically on the flattened HNF basis; position ``i`` in
    ``directions`` has enumeration value ``i + 1``.
    """

    n: int
    d: int
    directions: tuple[Direction, ...]

    def __post_init__(self):
        if not 1 <= self.d <= self.n - 1:
            raise ValueError(f"need 1 <= d <= n-1, got d={self.d}, n={self.n}")
        dirs = tuple(sorted(set(self.directions), key=Direction.sort_key))
        for A in dirs:
            if A.n != self.n or A.d != self.d:
                raise ValueError(f"direction {A} is not a {self.d}-plane in Q^{self.n}")
        object.__setattr__(self, "directions", dirs)

    @classmethod
    def of(cls, directions: Iterable[Direction]) -> DirectionSet:
        dirs = tuple(directions)
        if not dirs:
            raise ValueError("cannot infer dimensions of an empty direction set")
        return cls(dirs[0].n, dirs[0].d, dirs)

    def __len__(self):
        return len(self.directions)

    def __iter__(self):
        return iter(self.directions)

    def __getitem__(self, i):
        return self.directions[i]

    def enumeration(self, A: Direction) -> int:
        """1-based position of A in the global order."""
        return self.directions.index(A) + 1


def _primitive_representatives(box: FreqBox) -> list[tuple[int, ...]]:
    # One representative per line through a nonzero box frequency.
    seen = set()
    for k in box:
        if not any(k):
            continue
        g = math.gcd(*k)
        p = tuple(v // g for v in k)
        first = next(v for v in p if v != 0)
        if first < 0:
            p = tuple(-v for v in p)
        seen.add(p)
    return sorted(seen)


def covering_directions(n: int, d: int, box: FreqBox, extra: int = 1) -> DirectionSet:
    """A finite direction set with a direction orthogonal to every frequency of the box.

    For d = n-1 this is the orthogonal complement of every primitive
    frequency plus the span of the first n-1 coordinate axes.  For d < n-1
    each primitive frequency contributes the span of the first d HNF rows
    of its complement, and ``extra - 1`` further d-subsets of those rows.
    """
    if not 1 <= d <= n - 1:
        raise ValueError(f"need 1 <= d <= n-1, got d={d}, n={n}")
    if box.n != n:
        raise ValueError("box dimension does not match n")
    if extra < 1:
        raise ValueError("extra must be >= 1")
    axes = [[int(i == j) for j in range(n)] for i in range(d)]
    found = {canonicalize(axes)}
    for k in _primitive_representatives(box):
        comp = orthocomplement_basis(k)
        if d == n - 1:
            found.add(comp)
            continue
        subsets = itertools.islice(itertools.combinations(comp.basis, d), extra)
        for rows in subsets:
            found.add(canonicalize(rows))
    return DirectionSet(n, d, tuple(found))


def omega_k(k: Sequence[int], D: DirectionSet) -> list[Direction]:
    """Directions of D orthogonal to k, in D's order (this fixes phi_k)."""
    return [A for A in D if is_orthogonal(k, A)]


@lru_cache(maxsize=256)
def orthogonality_mask(directions: tuple[Direction, ...], box: FreqBox) -> np.ndarray:
    """Boolean table ``mask[a, k+K] = (k is orthogonal to directions[a])``."""
    ks = box.frequencies()
    out = np.zeros((len(directions), box.size), dtype=bool)
    for a, A in enumerate(directions):
        B = A.matrix()
        # int64 products are exact while |k . v| stays far below 2^63.
        if box.K * int(np.abs(B).sum(axis=1).max()) > 2**62:
            out[a] = [is_orthogonal(k, A) for k in box]
        else:
            out[a] = np.all(ks @ B.T == 0, axis=1)
    out = out.reshape(len(directions), *box.shape)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=256)
def omega_rank(directions: tuple[Direction, ...], box: FreqBox) -> np.ndarray:
    """Table of phi_k(A): 1-based rank of A within Omega_k, 0 where k is not orthogonal to A."""
    mask = orthogonality_mask(directions, box)
    ranks = np.cumsum(mask, axis=0) * mask
    ranks.flags.writeable = False
    return ranks


@dataclass(frozen=True)
class TransverseFrame:
    """Coordinate axes completing a direction's basis to a basis of R^n.

    ``axes`` are 0-based indices of the chosen standard basis vectors and
    ``det`` is the absolute determinant of the matrix with rows
    ``(v_1, ..., v_d, e_axes...)``, the number of times the parallelepiped
    coordinates wrap around the torus.
    """

    direction: Direction
    axes: tuple[int, ...]
    det: int

    def matrix(self) -> np.ndarray:
        """Rows ``e_{axes}`` then ``v_1..v_d``: maps ``(T, S)`` to ``T.E + S.V``."""
        n = self.direction.n
        unit = [[int(i == a) for i in range(n)] for a in self.axes]
        return np.array(unit + [list(r) for r in self.direction.basis], dtype=np.int64)

    def point(self, T: np.ndarray, S: np.ndarray | None = None) -> np.ndarray:
        """Parallelepiped coordinates ``sum t_j e_{axes_j} + sum s_i v_i`` for rows of T (and S)."""
        T = np.atleast_2d(np.asarray(T, dtype=float))
        if S is None:
            S = np.zeros((T.shape[0], self.direction.d))
        S = np.atleast_2d(np.asarray(S, dtype=float))
        return np.concatenate([T, S], axis=1) @ self.matrix().astype(float)


def transverse_frame(A: Direction) -> TransverseFrame:
    """Greedy completion by standard basis vectors in increasing index order."""
    n, d = A.n, A.d
    rows = [list(r) for r in A.basis]
    axes = []
    for i in range(n):
        if len(axes) == n - d:
            break
        e = [int(j == i) for j in range(n)]
        if _rank(rows + [e]) == len(rows) + 1:
            rows.append(e)
            axes.append(i)
    return TransverseFrame(A, tuple(axes), abs(_det(rows)))


# ---------------------------------------------------------------------------
# JSON


DIRECTION_SCHEMA = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 2},
        "d": {"type": "integer", "minimum": 1},
        "basis": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "integer"}},
            "minItems": 1,
        },
    },
    "required": ["n", "d", "basis"],
    "additionalProperties": False,
}

DIRECTION_SET_SCHEMA = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 2},
        "d": {"type": "integer", "minimum": 1},
        "directions": {"type": "array", "items": DIRECTION_SCHEMA},
    },
    "required": ["n", "d", "directions"],
    "additionalProperties": False,
}


def direction_to_json(A: Direction) -> dict:
    return {"n": A.n, "d": A.d, "basis": [list(r) for r in A.basis]}


def direction_from_json(obj: dict) -> Direction:
    validate_schema(obj, DIRECTION_SCHEMA, "direction")
    try:
        A = canonicalize(obj["basis"])
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    if (A.n, A.d) != (obj["n"], obj["d"]):
        raise SchemaError(f"basis shape does not match n={obj['n']}, d={obj['d']}")
    return A


def direction_set_to_json(D: DirectionSet) -> dict:
    return {"n": D.n, "d": D.d, "directions": [direction_to_json(A) for A in D]}


def direction_set_from_json(obj: dict) -> DirectionSet:
    validate_schema(obj, DIRECTION_SET_SCHEMA, "direction set")
    dirs = [direction_from_json(a) for a in obj["directions"]]
    if len(set(dirs)) != len(dirs):
        raise SchemaError("direction set lists the same subspace twice")
    try:
        return DirectionSet(obj["n"], obj["d"], tuple(dirs))
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
