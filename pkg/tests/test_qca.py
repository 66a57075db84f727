import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcawitt import generators as G
from qcawitt import pauli
from qcawitt import qca as Q
from qcawitt.errors import (InvariantError, NotFound, OverlappingSupports, SchemaError,
                            SpaceMismatch, UnknownCell)


def setup(space, d=3, k=1):
    return space, Q.register_for(space, d, k)


def cz_pairs_layer(L, power=1):
    return tuple(Q.CZ((str(i), 0), (str(i + 1), 0), power) for i in range(0, L - 1, 2))


# -- spaces -----------------------------------------------------------------------


def test_parse_space():
    assert len(Q.parse_space("line:8")) == 8
    assert Q.parse_space("ring:10").dist[0, 9] == 1
    g = Q.parse_space("grid:3x2")
    assert len(g) == 6 and g.dist[g.index("0,0"), g.index("2,1")] == 2
    with pytest.raises(SchemaError):
        Q.parse_space("torus:4")


def test_space_json_and_validation():
    sp = Q.line(5)
    assert Q.Space.from_json(sp.to_json()) == sp
    explicit = Q.Space(("a", "b"), np.array([[0, 2], [2, 0]]))
    assert Q.Space.from_json(explicit.to_json()) == explicit
    with pytest.raises(SchemaError):
        Q.Space(("a", "b"), np.array([[0, 1], [2, 0]]))
    with pytest.warns(UserWarning):
        Q.Space(("a", "b", "c"), np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]]))
    with pytest.raises(UnknownCell):
        sp.index("nope")


# -- construction ------------------------------------------------------------------


def test_empty_script_is_identity():
    sp, reg = setup(Q.line(4))
    a = Q.from_gates(Q.GateScript(()), sp, reg)
    assert np.array_equal(a.M, np.eye(8)) and a.radius == 0


def test_single_cz_blocks():
    sp, reg = setup(Q.line(4))
    a = Q.from_gates(Q.GateScript(((Q.CZ(("1", 0), ("2", 0)),),)), sp, reg)
    assert a.radius == 1 and Q.tight_radius(a) == 1
    # X_1 -> X_1 Z_2: the image of cell 1 has a Z part in cell 2
    assert a.block("1", "2").tolist() == [[0, 0], [1, 0]]
    assert a.block("2", "1").tolist() == [[0, 0], [1, 0]]
    assert a.block("1", "1").tolist() == [[1, 0], [0, 1]]


def test_hadamard_everywhere():
    sp, reg = setup(Q.line(3), d=5)
    layer = tuple(Q.H(str(i), 0) for i in range(3))
    a = Q.from_gates(Q.GateScript((layer,)), sp, reg)
    assert a.radius == 0
    for i in range(3):
        assert a.block(str(i), str(i)).tolist() == [[0, 4], [1, 0]]


def test_compose_inverse_and_direct_sum():
    sp, reg = setup(Q.ring(12))
    rng = np.random.default_rng(0)
    a = Q.from_gates(G.random_script(sp, reg, rng, 3), sp, reg)
    assert np.array_equal(Q.compose(a, Q.inverse(a)).M, np.eye(24))
    s = Q.shift(sp, reg, 1)
    s2 = Q.compose(s, s)
    assert np.array_equal(s2.M, Q.shift(sp, reg, 2).M)
    assert Q.tight_radius(s2) == 2
    reg2 = Q.register_for(sp, 3, 2)
    ds = Q.direct_sum(Q.identity(sp, reg), Q.identity(sp, reg))
    assert ds.register == reg2 and np.array_equal(ds.M, np.eye(48))


def test_compose_order():
    # compose(a, b) applies a first
    sp, reg = setup(Q.line(2))
    h = Q.from_gates(Q.GateScript(((Q.H("0", 0),),)), sp, reg)
    p = Q.from_gates(Q.GateScript(((Q.P("0", 0),),)), sp, reg)
    both = Q.from_gates(Q.GateScript(((Q.H("0", 0),), (Q.P("0", 0),))), sp, reg)
    assert np.array_equal(Q.compose(h, p).M, both.M)


def test_direct_sum_requires_same_space():
    a = Q.identity(*setup(Q.line(3)))
    b = Q.identity(*setup(Q.line(4)))
    with pytest.raises(SpaceMismatch):
        Q.direct_sum(a, b)


def test_tight_radius_examples():
    sp, reg = setup(Q.ring(10))
    assert Q.tight_radius(Q.identity(sp, reg)) == 0
    assert Q.tight_radius(Q.from_gates(Q.GateScript((cz_pairs_layer(10),)), sp, reg)) == 1
    for s in (1, 2, 3):
        assert Q.tight_radius(Q.shift(sp, reg, s)) == s


def test_declared_radius_is_enforced():
    sp, reg = setup(Q.ring(10))
    s = Q.shift(sp, reg, 2)
    with pytest.raises(InvariantError):
        Q.from_matrix(sp, reg, s.M, radius=1)


def test_is_separated_examples():
    sp, reg = setup(Q.ring(6))
    assert Q.is_separated(Q.shift(sp, reg, 1))
    assert Q.is_separated(Q.identity(sp, reg))
    h = Q.from_gates(Q.GateScript((tuple(Q.H(str(i)) for i in range(6)),)), sp, reg)
    assert not Q.is_separated(h)


def test_block_circuit_and_partition_examples():
    sp, reg = setup(Q.line(6))
    ident = Q.identity(sp, reg)
    singles = [[c] for c in sp.cells]
    assert Q.is_block_circuit(ident, singles)
    assert sorted(Q.find_circuit_partition(ident, 0)) == singles
    cz = Q.from_gates(Q.GateScript((cz_pairs_layer(6),)), sp, reg)
    pairs = [["0", "1"], ["2", "3"], ["4", "5"]]
    assert Q.is_block_circuit(cz, pairs)
    assert sorted(Q.find_circuit_partition(cz, 1)) == pairs
    assert not Q.is_block_circuit(cz, singles)
    rsp, rreg = setup(Q.ring(10))
    sh = Q.shift(rsp, rreg, 1)
    assert not Q.is_block_circuit(sh, [[str(i) for i in range(5)], [str(i) for i in range(5, 10)]])
    with pytest.raises(NotFound):
        Q.find_circuit_partition(sh, 3)


def test_qca_json_roundtrip_and_schema():
    sp, reg = setup(Q.line(5), d=4, k=2)
    a = G.random_trivial_qca(sp, reg, np.random.default_rng(2))
    back = Q.CliffordQCA.from_json(a.to_json())
    assert np.array_equal(back.M, a.M) and back.radius == a.radius
    obj = a.to_json()
    obj["layout"] = "xz_blocks"
    with pytest.raises(SchemaError):
        Q.CliffordQCA.from_json(obj)
    obj = a.to_json()
    del obj["matrix"]
    with pytest.raises(SchemaError):
        Q.CliffordQCA.from_json(obj)


def test_script_json_and_layer_validation():
    sp, reg = setup(Q.line(4))
    script = Q.GateScript(((Q.H("0"), Q.CZ(("1", 0), ("2", 0), 2)), (Q.P("3", 0, 2),)))
    assert Q.GateScript.from_json(script.to_json()) == script
    with pytest.raises(OverlappingSupports):
        Q.from_gates(Q.GateScript(((Q.H("0"), Q.P("0")),)), sp, reg)
    with pytest.raises(OverlappingSupports):
        Q.from_gates(Q.GateScript(((Q.PERM({"0": "1", "1": "0"}), Q.H("2")),)), sp, reg)
    with pytest.raises(UnknownCell):
        Q.from_gates(Q.GateScript(((Q.H("9"),),)), sp, reg)
    with pytest.raises(SchemaError):
        Q.Gate.from_json({"gate": "T", "cell": "0"})


# -- properties -------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 4, 6]), st.integers(1, 2), st.integers(0, 2 ** 32 - 1))
def test_from_gates_matches_pauli_tables(d, k, seed):
    """Two independent routes from a script to its symplectic matrix."""
    sp, reg = setup(Q.line(5), d, k)
    script = G.random_script(sp, reg, np.random.default_rng(seed), 3)
    a = Q.from_gates(script, sp, reg)
    table = Q.script_gate_table(script, sp, reg)
    assert np.array_equal(pauli.kappa_of(table, reg).M, a.M)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3, 5, 6]), st.integers(0, 2 ** 32 - 1))
def test_radius_bookkeeping(d, seed):
    sp, reg = setup(Q.ring(16), d)
    rng = np.random.default_rng(seed)
    a = G.random_trivial_qca(sp, reg, rng)
    b = Q.compose(Q.shift(sp, reg, int(rng.integers(-2, 3))), a)
    ab = Q.compose(a, b)
    assert Q.tight_radius(ab) <= Q.tight_radius(a) + Q.tight_radius(b)
    assert ab.radius == a.radius + b.radius
    assert np.array_equal(Q.compose(b, Q.inverse(b)).M, np.eye(2 * reg.N))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3, 4]), st.integers(0, 2 ** 32 - 1))
def test_random_separated_is_local(d, seed):
    sp, reg = setup(Q.line(12), d, 2)
    a = G.random_separated(sp, reg, np.random.default_rng(seed))
    assert Q.is_separated(a) and Q.tight_radius(a) <= 1


def test_zero_qudit_cells():
    sp = Q.line(4)
    reg = Q.register_for(sp, 3, [1, 0, 2, 1])
    a = Q.from_gates(Q.GateScript(((Q.CZ(("0", 0), ("2", 1)),),)), sp, reg)
    assert reg.N == 4 and a.radius == 2
    assert a.block("0", "2").tolist() == [[0, 0], [0, 0], [0, 0], [1, 0]]
    assert a.block("1", "1").shape == (0, 0)
    assert Q.CliffordQCA.from_json(a.to_json()).register.k == (1, 0, 2, 1)
