import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from torusct import FreqBox, canonicalize, covering_directions, height, is_orthogonal, omega_k, orthocomplement_basis
from torusct.errors import SchemaError
from torusct.grassmann import (
    DirectionSet,
    direction_set_from_json,
    direction_set_to_json,
    integer_kernel,
    transverse_frame,
)
from torusct.spectrum import evaluate_points

from conftest import phantom


def minors_gcd(rows):
    # a full-rank integer basis is saturated iff its maximal minors are coprime
    M = np.array(rows)
    d, n = M.shape
    g = 0
    for cols in itertools.combinations(range(n), d):
        g = math.gcd(g, int(round(np.linalg.det(M[:, cols]))))
    return g


def is_row_hnf(rows):
    last = -1
    for i, r in enumerate(rows):
        piv = next(j for j, x in enumerate(r) if x != 0)
        if piv <= last or r[piv] <= 0:
            return False
        if any(not 0 <= rows[a][piv] < r[piv] for a in range(i)):
            return False
        last = piv
    return True


int_vec = lambda n: st.lists(st.integers(-4, 4), min_size=n, max_size=n)


@st.composite
def subspaces(draw):
    n = draw(st.integers(2, 4))
    d = draw(st.integers(1, n - 1))
    rows = draw(st.lists(int_vec(n), min_size=d, max_size=d))
    assume(np.linalg.matrix_rank(np.array(rows)) == d)
    return rows


@st.composite
def unimodular(draw, d):
    # product of random elementary integer operations
    U = np.eye(d, dtype=np.int64)
    for _ in range(draw(st.integers(0, 6))):
        i, j = draw(st.integers(0, d - 1)), draw(st.integers(0, d - 1))
        if i == j:
            U[i] *= -1
        else:
            U[i] += draw(st.integers(-3, 3)) * U[j]
    return U


def test_canonicalize_examples():
    assert canonicalize([(2, 4)]).basis == ((1, 2),)
    assert canonicalize([(1, 0, 0), (1, 1, 0)]).basis == ((1, 0, 0), (0, 1, 0))
    with pytest.raises(ValueError, match="not a d-plane"):
        canonicalize([(1, 1), (2, 2)])
    with pytest.raises(ValueError, match="not a d-plane"):
        canonicalize([(1, 0), (0, 1)])


@given(subspaces())
def test_canonical_form_is_saturated_hnf(rows):
    A = canonicalize(rows)
    basis = [list(r) for r in A.basis]
    assert is_row_hnf(basis)
    assert minors_gcd(basis) == 1
    # same rational span
    assert np.linalg.matrix_rank(np.array(basis + rows)) == len(rows)


@given(subspaces())
def test_canonical_idempotent(rows):
    A = canonicalize(rows)
    assert canonicalize(A.basis) == A


@given(st.data())
def test_representation_independence(data):
    rows = data.draw(subspaces())
    d = len(rows)
    U = data.draw(unimodular(d))
    scales = data.draw(st.lists(st.sampled_from([-3, -2, -1, 1, 2, 5]), min_size=d, max_size=d))
    mixed = (U @ np.array(rows)) * np.array(scales)[:, None]
    assert canonicalize(mixed.tolist()) == canonicalize(rows)


@given(subspaces(), st.data())
def test_orthogonality_is_basis_independent(rows, data):
    k = data.draw(int_vec(len(rows[0])))
    direct = all(sum(a * b for a, b in zip(k, v)) == 0 for v in rows)
    assert is_orthogonal(k, canonicalize(rows)) == direct


def test_orthogonality_examples():
    A = canonicalize([(1, 0)])
    assert is_orthogonal((0, 1), A)
    assert not is_orthogonal((1, 1), A)
    assert is_orthogonal((0, 0), A)
    with pytest.raises(ValueError):
        is_orthogonal((0, 0, 0), A)


def test_orthocomplement_examples():
    assert orthocomplement_basis((1, 0)).basis == ((0, 1),)
    assert orthocomplement_basis((2, 0)) == orthocomplement_basis((1, 0))
    P = orthocomplement_basis((1, 1, 1))
    assert P == canonicalize([(1, 0, -1), (0, 1, -1)])
    assert all(sum(v) == 0 for v in P.basis)
    with pytest.raises(ValueError):
        orthocomplement_basis((0, 0))


@given(st.integers(2, 4).flatmap(int_vec))
def test_orthocomplement_property(k):
    assume(any(k))
    P = orthocomplement_basis(k)
    assert P.d == len(k) - 1
    assert is_orthogonal(k, P)
    assert minors_gcd([list(r) for r in P.basis]) == 1


def test_integer_kernel_spans_kernel():
    K = integer_kernel([[2, 4, 6]], 3)
    assert len(K) == 2 and all(2 * a + 4 * b + 6 * c == 0 for a, b, c in K)


def test_height():
    assert height(canonicalize([(2, 4)])) == 2
    assert height(canonicalize([(1, 0)])) == 1
    assert height(canonicalize([(3, -5, 1)])) == 5


def _covers(D, box):
    return all(omega_k(k, D) for k in box)


def test_covering_n2_d1_k1():
    box = FreqBox(2, 1)
    D = covering_directions(2, 1, box)
    assert _covers(D, box)
    # complements of (1,0), (0,1), (1,1), (1,-1) are pairwise distinct
    expected = {orthocomplement_basis(k) for k in [(1, 0), (0, 1), (1, 1), (1, -1)]}
    assert set(D) == expected and len(D) == 4


def test_covering_n3():
    box = FreqBox(3, 1)
    D = covering_directions(3, 2, box)
    assert _covers(D, box)
    assert all(len(omega_k(k, D)) == 1 for k in box if any(k))
    assert _covers(covering_directions(3, 1, box, extra=1), box)


@pytest.mark.parametrize("n,d,K", [(n, d, K) for n in (2, 3, 4) for d in range(1, n) for K in (1, 2)])
def test_covering_exhaustive(n, d, K):
    box = FreqBox(n, K)
    assert _covers(covering_directions(n, d, box), box)


def test_omega_k():
    box = FreqBox(2, 2)
    D = covering_directions(2, 1, box)
    assert omega_k((0, 0), D) == list(D)
    assert omega_k((1, 0), D) == [canonicalize([(0, 1)])]
    partial = DirectionSet.of([canonicalize([(1, 0)])])
    assert omega_k((1, 1), partial) == []


def test_direction_set_sorted_and_deduplicated():
    A, B = canonicalize([(1, 2)]), canonicalize([(1, 0)])
    D = DirectionSet(2, 1, (A, B, A))
    assert D.directions == (B, A)
    assert D.enumeration(B) == 1 and D.enumeration(A) == 2


def test_transverse_frames():
    f = transverse_frame(canonicalize([(0, 1)]))
    assert (f.axes, f.det) == ((0,), 1)
    f = transverse_frame(canonicalize([(1, 2)]))
    assert (f.axes, f.det) == ((0,), 2)
    f = transverse_frame(canonicalize([(1, 0, 0), (0, 1, 0)]))
    assert (f.axes, f.det) == ((2,), 1)


@given(subspaces())
def test_wrap_count_equals_preimages(rows):
    # |phi_A^{-1}(x)| on the torus equals |det|: count lattice translates of x landing in [0,1)^n
    frame = transverse_frame(canonicalize(rows))
    E = frame.matrix().astype(float)
    n = E.shape[0]
    x = np.random.default_rng(len(rows)).random(n)
    Einv = np.linalg.inv(E)
    # x + m ranges over the parallelepiped's bounding box
    lo = np.floor(np.minimum(E, 0).sum(axis=0)).astype(int) - 1
    hi = np.ceil(np.maximum(E, 0).sum(axis=0)).astype(int) + 1
    count = 0
    for m in itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)]):
        p = (x + np.array(m)) @ Einv
        count += bool(np.all((p >= 0) & (p < 1)))
    assert count == frame.det


@settings(max_examples=15)
@given(subspaces(), st.integers(0, 10**6))
def test_wrapping_identity(rows, seed):
    frame = transverse_frame(canonicalize(rows))
    n = len(rows[0])
    f = phantom(n, 2, seed)
    # f o phi has frequencies k E, integrated exactly by an L-point rule once L exceeds them
    L = 2 * int(np.abs(frame.matrix()).sum(axis=1).max()) + 1
    axes = np.meshgrid(*[np.arange(L) / L] * n, indexing="ij")
    P = np.stack([a.ravel() for a in axes], axis=1)
    q = len(frame.axes)
    mean = evaluate_points(f, frame.point(P[:, :q], P[:, q:])).mean()
    assert abs(mean - f[(0,) * n]) <= 1e-10


def test_json_round_trip():
    D = covering_directions(3, 2, FreqBox(3, 1))
    assert direction_set_from_json(direction_set_to_json(D)) == D


def test_json_rejects_duplicates():
    obj = direction_set_to_json(covering_directions(2, 1, FreqBox(2, 1)))
    obj["directions"].append(obj["directions"][0])
    with pytest.raises(SchemaError):
        direction_set_from_json(obj)
