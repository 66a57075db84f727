import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcawitt import generators as G
from qcawitt import modring as mr
from qcawitt import pauli as P
from qcawitt import symplectic as S
from qcawitt.errors import BlockConditionsViolated, NotSymplectic, SchemaError


def phase_gate(d):
    return np.array([[1, 0], [1, 1]]) % d


def blockdiag(*blocks):
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.int64)
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


# -- examples ---------------------------------------------------------------------


def test_omega_examples():
    assert S.omega([1, 0], [0, 1], 7) == 1
    assert S.omega([3, 4, 1, 2], [3, 4, 1, 2], 7) == 0
    assert S.omega([2, 3], [1, 4], 5) == 0


def test_is_symplectic_examples():
    assert S.is_symplectic(np.eye(4, dtype=np.int64), 3)
    assert S.is_symplectic(blockdiag(phase_gate(5), phase_gate(5)), 5)
    assert not S.is_symplectic(np.array([[1, 1], [0, 0]]), 5)


def test_xz_blocks_examples():
    d = 3
    reg = S.Register.uniform(2, d)
    b = S.to_xz_blocks(S.SymplecticMap(reg, np.eye(4, dtype=np.int64)))
    assert np.array_equal(b.A, np.eye(2)) and np.array_equal(b.D, np.eye(2))
    assert not b.B.any() and not b.C.any()

    cz = P.kappa_of(P.cz_table(2, 0, 1, d)).M
    b = S.to_xz_blocks(S.SymplecticMap(reg, cz))
    assert np.array_equal(b.A, np.eye(2)) and np.array_equal(b.D, np.eye(2))
    assert b.C.tolist() == [[0, 1], [1, 0]] and not b.B.any()

    h = P.kappa_of(P.hadamard_table(2, 0, d).then(P.hadamard_table(2, 1, d))).M
    b = S.to_xz_blocks(S.SymplecticMap(reg, h))
    assert not b.A.any() and not b.D.any()
    assert np.array_equal(b.B, (-np.eye(2, dtype=np.int64)) % d)
    assert np.array_equal(b.C, np.eye(2))


def test_block_conditions_name_the_failure():
    I2, Z2 = np.eye(2, dtype=np.int64), np.zeros((2, 2), dtype=np.int64)
    S.check_block_conditions(I2, Z2, Z2, I2, 5)
    with pytest.raises(BlockConditionsViolated, match="A\\^T C symmetric"):
        S.check_block_conditions(I2, Z2, np.array([[0, 1], [0, 0]]), I2, 5)


def test_transvection_examples():
    assert np.array_equal(S.transvection([1, 0], 0, 5), np.eye(2))
    # the vector along Z gives X -> X Z; along X the sign flips: Z -> Z X^-1
    assert np.array_equal(S.transvection([0, 1], 1, 5), phase_gate(5))
    assert S.transvection([1, 0], 1, 5).tolist() == [[1, 4], [0, 1]]


def test_decompose_examples():
    assert S.decompose_transvections(np.eye(4, dtype=np.int64), 3) == []
    steps = S.decompose_transvections(phase_gate(3), 3)
    assert np.array_equal(S.recompose(steps, 2, 3), phase_gate(3))
    M = G.random_gate_symplectic(2, 4, np.random.default_rng(5))
    steps = S.decompose_transvections(M, 4)
    assert np.array_equal(S.recompose(steps, 4, 4), M % 4)
    assert len(steps) <= 8


def test_decompose_rejects_composite_factor():
    with pytest.raises(ValueError):
        S.decompose_transvections(np.eye(2, dtype=np.int64), 6)


def test_symplectic_basis_examples():
    Jm = S.J(2, 7)
    Pm = S.symplectic_basis(Jm, 7)
    assert np.array_equal(mr.matmul(mr.matmul(Pm.T, Jm, 7), Pm, 7), Jm)
    G2 = np.array([[0, 2], [-2, 0]]) % 5
    Pm = S.symplectic_basis(G2, 5)
    assert np.array_equal(mr.matmul(mr.matmul(Pm.T, G2, 5), Pm, 5), S.J(1, 5))


def test_symplectic_basis_random_z9():
    rng = np.random.default_rng(3)
    for _ in range(10):
        B = rng.integers(0, 9, (4, 4))
        while not mr.is_invertible(B, 9):
            B = rng.integers(0, 9, (4, 4))
        Gm = mr.matmul(mr.matmul(B.T, S.J(2, 9), 9), B, 9)   # nonsingular alternating
        Pm = S.symplectic_basis(Gm, 9)
        assert np.array_equal(mr.matmul(mr.matmul(Pm.T, Gm, 9), Pm, 9), S.J(2, 9))


def test_map_json_layouts():
    reg = S.Register(("a", "b"), (1, 2), 4)
    M = G.random_symplectic(3, 4, np.random.default_rng(0))
    m = S.SymplecticMap(reg, M)
    for layout in ("site_major", "xz_blocks"):
        back = S.SymplecticMap.from_json(m.to_json(layout))
        assert np.array_equal(back.M, m.M) and back.register == reg
    obj = m.to_json()
    del obj["layout"]
    with pytest.raises(SchemaError):
        S.SymplecticMap.from_json(obj)


def test_map_rejects_non_symplectic():
    reg = S.Register.uniform(1, 5)
    with pytest.raises(NotSymplectic):
        S.SymplecticMap(reg, np.array([[1, 1], [0, 0]]))


# -- properties -------------------------------------------------------------------


factors = st.sampled_from([2, 3, 4, 5, 7, 8, 9, 25, 27])


@settings(max_examples=60, deadline=None)
@given(factors, st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_decomposition_recomposes(q, N, seed):
    M = G.random_symplectic(N, q, np.random.default_rng(seed))
    steps = S.decompose_transvections(M, q)
    assert len(steps) <= 4 * N
    assert np.array_equal(S.recompose(steps, 2 * N, q), M % q)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 4, 6, 12]), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_transvections_preserve_omega(d, N, seed):
    rng = np.random.default_rng(seed)
    u = rng.integers(0, d, 2 * N)
    T = S.transvection(u, int(rng.integers(d)), d)
    x, y = rng.integers(0, d, 2 * N), rng.integers(0, d, 2 * N)
    assert S.omega(T @ x, T @ y, d) == S.omega(x, y, d)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 4, 6, 12]), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_sp_inverse(d, N, seed):
    M = G.random_symplectic(N, d, np.random.default_rng(seed))
    assert np.array_equal(mr.matmul(S.sp_inverse(M, d), M, d), np.eye(2 * N))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 5, 6, 9]), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_xz_roundtrip_and_block_conditions(d, N, seed):
    M = G.random_symplectic(N, d, np.random.default_rng(seed))
    reg = S.Register.uniform(N, d)
    b = S.to_xz_blocks(S.SymplecticMap(reg, M))
    S.check_block_conditions(b.A, b.B, b.C, b.D, d)
    assert np.array_equal(S.from_xz_blocks(b, reg).M, M % d)
    assert np.array_equal(S.xz_to_site(S.site_to_xz(M)), M)


def test_symplectic_basis_of_J_is_identity():
    assert np.array_equal(S.symplectic_basis(S.J(3, 7), 7), np.eye(6))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 4, 6, 9]), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_transvection_composition(d, N, seed):
    rng = np.random.default_rng(seed)
    u = rng.integers(0, d, 2 * N)
    c1, c2 = (int(x) for x in rng.integers(0, d, 2))
    lhs = mr.matmul(S.transvection(u, c1, d), S.transvection(u, c2, d), d)
    assert np.array_equal(lhs, S.transvection(u, c1 + c2, d))
