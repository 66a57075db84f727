import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcawitt import modring as mr
from qcawitt.errors import NoSolution, NotAUnit, Singular


def brute_span(M, d):
    """All Z_d-combinations of the rows of M."""
    M = np.asarray(M, dtype=np.int64) % d
    out = set()
    for coeffs in itertools.product(range(d), repeat=M.shape[0]):
        out.add(tuple((np.array(coeffs) @ M) % d))
    return out


small_mod = st.sampled_from([2, 3, 4, 5, 6, 8, 9, 12])


def matrices(rows, cols):
    return small_mod.flatmap(lambda d: st.tuples(
        st.just(d),
        st.lists(st.lists(st.integers(0, d - 1), min_size=cols, max_size=cols),
                 min_size=rows, max_size=rows).map(np.array)))


# -- examples ---------------------------------------------------------------------


@pytest.mark.parametrize("x,d,expected", [(0, 6, [0, 0]), (5, 6, [1, 2]), (35, 36, [3, 8])])
def test_crt_split_examples(x, d, expected):
    assert mr.crt_split(x, d) == expected


def test_mod_inverse_examples():
    assert mr.mod_inverse(1, 6) == 1
    assert mr.mod_inverse(5, 6) == 5
    with pytest.raises(NotAUnit):
        mr.mod_inverse(2, 6)


def test_howell_examples():
    H, U = mr.howell_form(np.eye(3, dtype=np.int64), 7)
    assert np.array_equal(H, np.eye(3))
    H, _ = mr.howell_form(np.array([[4]]), 6)
    assert H.tolist() == [[2]]
    # padded to the input row count; the nonzero rows are the canonical generators
    H, _ = mr.howell_form(np.array([[2, 0], [0, 0]]), 4)
    assert H[0].tolist() == [2, 0] and not H[1:].any()


def test_howell_transform_relates_input():
    M = np.array([[2, 3, 1], [4, 0, 2]])
    H, U = mr.howell_form(M, 6)
    assert brute_span(H, 6) == brute_span(M, 6)


def test_solve_examples():
    b = np.array([3, 1, 4])
    assert np.array_equal(mr.solve_linear(np.eye(3, dtype=np.int64), b, 5), b)
    x = mr.solve_linear(np.array([[2]]), [2], 4)
    assert (2 * x[0]) % 4 == 2
    with pytest.raises(NoSolution) as info:
        mr.solve_linear(np.array([[2]]), [1], 4)
    assert info.value.certificate is not None


def test_idempotent_rank_examples():
    assert mr.idempotent_rank(np.zeros((3, 3), dtype=np.int64), 5) == 0
    assert mr.idempotent_rank(np.eye(4, dtype=np.int64), 8) == 4
    assert mr.idempotent_rank(np.diag([1, 0]), 9) == 1


def test_idempotent_rank_free_image_with_nonunit_howell_pivots():
    # image spanned by (2, 1) over Z_4 is free of rank one
    e = np.array([[0, 2], [0, 1]])
    assert np.array_equal(e @ e % 4, e)
    assert mr.idempotent_rank(e, 4) == 1


def test_factorize():
    assert mr.factorize(360) == ((2, 3), (3, 2), (5, 1))
    assert mr.RingSpec.of(36).moduli == [4, 9]


def test_modmatrix_json_roundtrip():
    m = mr.ModMatrix(6, np.array([[1, 5], [0, 3]]))
    assert mr.ModMatrix.from_json(m.to_json()) == m


# -- properties -------------------------------------------------------------------


@given(st.integers(0, 10 ** 6), st.sampled_from([6, 12, 30, 36, 60, 72]))
def test_crt_roundtrip(x, d):
    x %= d
    assert mr.crt_join(mr.crt_split(x, d), d) == x


def test_crt_split_rejects_unreduced():
    with pytest.raises(ValueError):
        mr.crt_split(6, 6)


@given(st.integers(1, 500), st.integers(2, 200))
def test_mod_inverse_property(a, d):
    if np.gcd(a, d) == 1:
        assert a * mr.mod_inverse(a, d) % d == 1
    else:
        with pytest.raises(NotAUnit):
            mr.mod_inverse(a, d)


@settings(max_examples=60, deadline=None)
@given(matrices(3, 3))
def test_howell_span_matches_enumeration(case):
    d, M = case
    H, _ = mr.howell_form(M, d)
    assert brute_span(H, d) == brute_span(M, d)


@settings(max_examples=60, deadline=None)
@given(matrices(2, 3), st.data())
def test_solve_matches_enumeration(case, data):
    d, M = case
    b = np.array(data.draw(st.lists(st.integers(0, d - 1), min_size=2, max_size=2)))
    reachable = {tuple((M @ np.array(x)) % d) for x in itertools.product(range(d), repeat=3)}
    if tuple(b) in reachable:
        x = mr.solve_linear(M, b, d)
        assert np.array_equal(mr.matmul(M, x, d), b)
    else:
        with pytest.raises(NoSolution):
            mr.solve_linear(M, b, d)


@settings(max_examples=60, deadline=None)
@given(matrices(2, 3))
def test_kernel_matches_enumeration(case):
    d, M = case
    K = mr.kernel(M, d)
    assert not mr.matmul(M, K, d).any()
    brute = {x for x in itertools.product(range(d), repeat=3)
             if not (M @ np.array(x) % d).any()}
    assert brute_span(K.T, d) == brute


@settings(max_examples=60, deadline=None)
@given(matrices(3, 3))
def test_inverse_or_singular(case):
    d, M = case
    det = int(round(np.linalg.det(M))) % d
    if np.gcd(det, d) == 1:
        inv = mr.inverse(M, d)
        assert np.array_equal(mr.matmul(M, inv, d), np.eye(3))
    else:
        with pytest.raises(Singular):
            mr.inverse(M, d)


def test_matmul_large_modulus_exact():
    d = 2 ** 40 + 15
    rng = np.random.default_rng(0)
    A = rng.integers(0, d, (6, 6))
    B = rng.integers(0, d, (6, 6))
    exact = (A.astype(object) @ B.astype(object)) % d
    assert np.array_equal(mr.matmul(A, B, d), exact.astype(np.int64))


def test_matmul_float_path_exact():
    rng = np.random.default_rng(1)
    A = rng.integers(0, 97, (120, 120))
    B = rng.integers(0, 97, (120, 120))
    exact = (A.astype(object) @ B.astype(object)) % 97
    assert np.array_equal(mr.matmul(A, B, 97), exact.astype(np.int64))
