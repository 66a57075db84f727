"""Clifford QCAs on finite metric spaces.

A ``CliffordQCA`` is a symplectic matrix on the register of a ``Space``
together with a declared radius.  The block of the matrix from cell ``i`` to
cell ``j`` is ``M[rows of j, cols of i]``; locality means every block between
cells farther apart than the radius vanishes.

Gate scripts are lists of layers, applied first layer first.  Gates:

``H``     ``{"gate": "H", "cell": c, "qudit": q, "power": e}``: X -> Z, Z -> X^-1
``P``     ``{"gate": "P", "cell": c, "qudit": q, "power": e}``: X -> X Z^e
``CZ``    ``{"gate": "CZ", "a": [c, q], "b": [c', q'], "power": e}``: X_a -> X_a Z_b^e
``PERM``  ``{"gate": "PERM", "map": {c: c', ...}}``: moves cell contents; alone in its layer
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import modring as mr
from . import pauli
from .errors import (BadPartition, InvariantError, NotFound, OverlappingSupports, SchemaError,
                     SpaceMismatch, UnknownCell)
from .symplectic import Register, SymplecticMap, is_symplectic, sp_inverse


# -- spaces -------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Space:
    cells: tuple
    dist: np.ndarray
    kind: str = "explicit"
    shape: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(str(c) for c in self.cells))
        D = np.array(self.dist, dtype=float).reshape(len(self.cells), len(self.cells))
        if not np.array_equal(D, D.T) or np.diag(D).any() or (D < 0).any():
            raise SchemaError("distance matrix must be symmetric, nonnegative, zero on the diagonal")
        if len(set(self.cells)) != len(self.cells):
            raise SchemaError("duplicate cell ids")
        if self.kind == "explicit" and len(self.cells) <= 64:
            viol = D[:, :, None] > D[:, None, :] + D.T[None, :, :] + 1e-9
            if viol.any():
                warnings.warn("distance matrix violates the triangle inequality", stacklevel=2)
        D.setflags(write=False)
        object.__setattr__(self, "dist", D)
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.cells)})

    def __eq__(self, other):
        return (isinstance(other, Space) and self.cells == other.cells
                and np.array_equal(self.dist, other.dist))

    def __hash__(self):
        return hash(self.cells)

    def __len__(self):
        return len(self.cells)

    def index(self, cell) -> int:
        try:
            return self._index[str(cell)]
        except KeyError:
            raise UnknownCell(f"unknown cell {cell!r}") from None

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if len(self.cells) else 0.0

    def region_diameter(self, idx) -> float:
        idx = np.asarray(list(idx), dtype=np.int64)
        return float(self.dist[np.ix_(idx, idx)].max()) if idx.size else 0.0

    def to_json(self) -> dict:
        if self.kind in ("line", "ring"):
            return {self.kind: {"length": len(self.cells)}}
        if self.kind == "grid":
            return {"grid": {"width": self.shape[0], "height": self.shape[1]}}
        return {"cells": list(self.cells), "dist": _num_list(self.dist)}

    @classmethod
    def from_json(cls, obj: dict) -> "Space":
        try:
            if "line" in obj:
                return line(int(obj["line"]["length"]))
            if "ring" in obj:
                return ring(int(obj["ring"]["length"]))
            if "grid" in obj:
                return grid(int(obj["grid"]["width"]), int(obj["grid"]["height"]))
            return cls(tuple(obj["cells"]), np.array(obj["dist"], dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad space: {exc}") from None


def _num_list(D):
    return [[int(x) if float(x).is_integer() else float(x) for x in row] for row in D]


def line(L: int) -> Space:
    x = np.arange(L)
    return Space(tuple(str(i) for i in x), np.abs(x[:, None] - x[None, :]), "line", (L,))


def ring(L: int) -> Space:
    x = np.arange(L)
    dx = np.abs(x[:, None] - x[None, :])
    return Space(tuple(str(i) for i in x), np.minimum(dx, L - dx), "ring", (L,))


def grid(W: int, H: int) -> Space:
    xs, ys = np.meshgrid(np.arange(W), np.arange(H), indexing="ij")
    xs, ys = xs.ravel(), ys.ravel()
    D = np.maximum(np.abs(xs[:, None] - xs[None, :]), np.abs(ys[:, None] - ys[None, :]))
    cells = tuple(f"{a},{b}" for a, b in zip(xs, ys))
    return Space(cells, D, "grid", (W, H))


def parse_space(spec: str) -> Space:
    """``line:N``, ``ring:N`` or ``grid:WxH``."""
    try:
        kind, arg = spec.split(":", 1)
        if kind == "line":
            return line(int(arg))
        if kind == "ring":
            return ring(int(arg))
        if kind == "grid":
            w, h = arg.lower().split("x")
            return grid(int(w), int(h))
    except ValueError:
        pass
    raise SchemaError(f"bad space spec {spec!r}; expected line:N, ring:N or grid:WxH")


def register_for(space: Space, d: int, k=1) -> Register:
    ks = [k] * len(space) if np.isscalar(k) else list(k)
    return Register(space.cells, tuple(ks), d)


# -- QCAs ---------------------------------------------------------------------------


def site_cells(reg: Register) -> np.ndarray:
    """Cell index of each site-major coordinate."""
    return np.repeat(reg.cell_of_qudit(), 2)


@dataclass(frozen=True, eq=False)
class CliffordQCA:
    space: Space
    register: Register
    map: SymplecticMap
    radius: float

    def __post_init__(self):
        if self.register.cells != self.space.cells:
            raise SpaceMismatch("register cells differ from space cells")
        if self.map.register != self.register:
            raise SpaceMismatch("map register differs")
        if tight_radius(self) > self.radius + 1e-9:
            raise InvariantError(f"nonzero block beyond declared radius {self.radius}")

    @property
    def d(self) -> int:
        return self.register.d

    @property
    def M(self) -> np.ndarray:
        return self.map.M

    def block(self, i, j) -> np.ndarray:
        """``alpha^i_j``: the part of the image of cell ``i`` lying in cell ``j``."""
        sc = site_cells(self.register)
        i, j = self.space.index(i), self.space.index(j)
        return self.M[np.ix_(sc == j, sc == i)]

    def to_json(self) -> dict:
        return {"space": self.space.to_json(), "register": {"k": list(self.register.k)},
                "radius": _num(self.radius), "matrix": mr.ModMatrix(self.d, self.M).to_json(),
                "layout": "site_major"}

    @classmethod
    def from_json(cls, obj: dict, check: bool = True) -> "CliffordQCA":
        try:
            space = Space.from_json(obj["space"])
            mat = mr.ModMatrix.from_json(obj["matrix"])
            reg = Register(space.cells, tuple(obj["register"]["k"]), mat.d)
            radius = float(obj["radius"])
            layout = obj.get("layout")
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad QCA: {exc}") from None
        if layout != "site_major":
            raise SchemaError("QCA layout must be 'site_major'")
        if mat.a.shape != (2 * reg.N, 2 * reg.N):
            raise SchemaError("matrix shape does not match register")
        return cls(space, reg, SymplecticMap(reg, mat.a, check=check), radius)


def _num(x):
    return int(x) if float(x).is_integer() else float(x)


def from_matrix(space: Space, register: Register, M, radius=None, check=True) -> CliffordQCA:
    S = SymplecticMap(register, M, check=check)
    r = _tight(space, register, S.M) if radius is None else radius
    return CliffordQCA(space, register, S, r)


def identity(space: Space, register: Register) -> CliffordQCA:
    return from_matrix(space, register, mr.identity(2 * register.N), 0, check=False)


def reduce_mod(alpha: CliffordQCA, q: int) -> CliffordQCA:
    """The same QCA with entries reduced modulo a divisor ``q`` of ``d``."""
    if alpha.d % q:
        raise ValueError(f"{q} does not divide {alpha.d}")
    reg = alpha.register.with_d(q)
    return from_matrix(alpha.space, reg, alpha.M % q, alpha.radius, check=False)


def _tight(space: Space, reg: Register, M: np.ndarray) -> float:
    rows, cols = np.nonzero(M)
    if rows.size == 0:
        return 0.0
    sc = site_cells(reg)
    return float(space.dist[sc[rows], sc[cols]].max())


def tight_radius(alpha: CliffordQCA) -> float:
    return _tight(alpha.space, alpha.register, alpha.M)


def _same_frame(a: CliffordQCA, b: CliffordQCA):
    if a.space != b.space or a.register != b.register:
        raise SpaceMismatch("QCAs live on different spaces or registers")


def compose(alpha: CliffordQCA, beta: CliffordQCA) -> CliffordQCA:
    """``beta alpha``: apply ``alpha`` first."""
    _same_frame(alpha, beta)
    M = mr.matmul(beta.M, alpha.M, alpha.d)
    return from_matrix(alpha.space, alpha.register, M, alpha.radius + beta.radius, check=False)


def inverse(alpha: CliffordQCA) -> CliffordQCA:
    """The inverse, with the tight radius (never larger than ``alpha``'s)."""
    Minv = sp_inverse(alpha.M, alpha.d)
    return from_matrix(alpha.space, alpha.register, Minv, None, check=False)


def direct_sum(alpha: CliffordQCA, beta: CliffordQCA) -> CliffordQCA:
    """Stack registers cell by cell: in each cell, ``alpha``'s qudits come first."""
    if alpha.space != beta.space or alpha.d != beta.d:
        raise SpaceMismatch("direct sum needs the same space and modulus")
    ra, rb = alpha.register, beta.register
    reg = Register(ra.cells, tuple(a + b for a, b in zip(ra.k, rb.k)), ra.d)
    ia, ib = [], []
    for c in range(len(ra.k)):
        off = reg.offsets[c]
        ia.extend(range(off, off + ra.k[c]))
        ib.extend(range(off + ra.k[c], off + ra.k[c] + rb.k[c]))
    sa = np.array([[2 * q, 2 * q + 1] for q in ia], dtype=np.int64).reshape(-1)
    sb = np.array([[2 * q, 2 * q + 1] for q in ib], dtype=np.int64).reshape(-1)
    M = np.zeros((2 * reg.N, 2 * reg.N), dtype=np.int64)
    M[np.ix_(sa, sa)] = alpha.M
    M[np.ix_(sb, sb)] = beta.M
    return from_matrix(alpha.space, reg, M, max(alpha.radius, beta.radius), check=False)


def is_separated(alpha: CliffordQCA) -> bool:
    M = alpha.M
    return not M[1::2, 0::2].any() and not M[0::2, 1::2].any()


def _cell_adjacency(alpha: CliffordQCA):
    rows, cols = np.nonzero(alpha.M)
    sc = site_cells(alpha.register)
    a, b = sc[rows], sc[cols]
    keep = a != b
    return a[keep], b[keep]


def is_block_circuit(alpha: CliffordQCA, partition) -> bool:
    n = len(alpha.space)
    label = np.full(n, -1)
    for s, part in enumerate(partition):
        for c in part:
            i = alpha.space.index(c)
            if label[i] != -1:
                raise BadPartition(f"cell {c!r} appears twice")
            label[i] = s
    if (label < 0).any():
        raise BadPartition("partition does not cover every cell")
    a, b = _cell_adjacency(alpha)
    if (label[a] != label[b]).any():
        return False
    sc = site_cells(alpha.register)
    for s in range(len(partition)):
        idx = np.flatnonzero(label[sc] == s)
        if idx.size and not is_symplectic(alpha.M[np.ix_(idx, idx)], alpha.d):
            return False
    return True


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)

    def groups(self):
        out = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return list(out.values())


def find_circuit_partition(alpha: CliffordQCA, max_diam: float) -> list[list[str]]:
    """Coarsest-needed partition making ``alpha`` block-diagonal, if its parts are small."""
    uf = _UnionFind(len(alpha.space))
    for x, y in zip(*_cell_adjacency(alpha)):
        uf.union(int(x), int(y))
    groups = uf.groups()
    for g in groups:
        diam = alpha.space.region_diameter(g)
        if diam > max_diam + 1e-9:
            raise NotFound(f"connected support region of diameter {diam} exceeds {max_diam}")
    part = [[alpha.space.cells[i] for i in g] for g in groups]
    if not is_block_circuit(alpha, part):
        raise NotFound("blocks of the connectivity partition are not symplectic")
    return part


# -- gates and scripts ------------------------------------------------------------------


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple = ()      # ((cell, qudit), ...)
    power: int = 1
    perm: tuple = ()         # ((cell, cell'), ...) for PERM

    def to_json(self) -> dict:
        if self.kind in ("H", "P"):
            (c, q), = self.targets
            return {"gate": self.kind, "cell": c, "qudit": q, "power": self.power}
        if self.kind == "CZ":
            (ca, qa), (cb, qb) = self.targets
            return {"gate": "CZ", "a": [ca, qa], "b": [cb, qb], "power": self.power}
        return {"gate": "PERM", "map": {a: b for a, b in self.perm}}

    @classmethod
    def from_json(cls, obj: dict) -> "Gate":
        try:
            kind = obj["gate"]
            if kind in ("H", "P"):
                return cls(kind, ((str(obj["cell"]), int(obj.get("qudit", 0))),),
                           int(obj.get("power", 1)))
            if kind == "CZ":
                a, b = obj["a"], obj["b"]
                return cls("CZ", ((str(a[0]), int(a[1])), (str(b[0]), int(b[1]))),
                           int(obj.get("power", 1)))
            if kind == "PERM":
                return cls("PERM", perm=tuple(sorted((str(k), str(v))
                                                     for k, v in obj["map"].items())))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise SchemaError(f"bad gate {obj!r}: {exc}") from None
        raise SchemaError(f"unknown gate kind {obj.get('gate')!r}")


def H(cell, qudit=0, power=1) -> Gate:
    return Gate("H", ((str(cell), qudit),), power)


def P(cell, qudit=0, power=1) -> Gate:
    return Gate("P", ((str(cell), qudit),), power)


def CZ(a, b, power=1) -> Gate:
    return Gate("CZ", ((str(a[0]), a[1]), (str(b[0]), b[1])), power)


def PERM(mapping: dict) -> Gate:
    return Gate("PERM", perm=tuple(sorted((str(k), str(v)) for k, v in mapping.items())))


@dataclass(frozen=True)
class GateScript:
    layers: tuple

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(tuple(layer) for layer in self.layers))

    def __add__(self, other: "GateScript") -> "GateScript":
        return GateScript(self.layers + other.layers)

    def gates(self):
        for layer in self.layers:
            yield from layer

    def to_json(self) -> dict:
        return {"layers": [[g.to_json() for g in layer] for layer in self.layers]}

    @classmethod
    def from_json(cls, obj: dict) -> "GateScript":
        try:
            layers = obj["layers"]
        except (KeyError, TypeError):
            raise SchemaError("gate script needs a 'layers' list") from None
        if not isinstance(layers, list) or not all(isinstance(x, list) for x in layers):
            raise SchemaError("'layers' must be a list of lists")
        return cls(tuple(tuple(Gate.from_json(g) for g in layer) for layer in layers))


def _qudit_index(space: Space, reg: Register, cell, q) -> int:
    ci = space.index(cell)
    if not 0 <= q < reg.k[ci]:
        raise UnknownCell(f"cell {cell!r} has no qudit {q}")
    return reg.offsets[ci] + q


def _perm_qudits(space: Space, reg: Register, g: Gate) -> np.ndarray:
    """Target qudit of each qudit under a PERM gate."""
    mapping = {space.index(a): space.index(b) for a, b in g.perm}
    if sorted(mapping.keys()) != sorted(mapping.values()):
        raise SchemaError("PERM map is not a bijection on its cells")
    target = np.arange(reg.N)
    for a, b in mapping.items():
        if reg.k[a] != reg.k[b]:
            raise SchemaError("PERM moves cells with different qudit counts")
        for q in range(reg.k[a]):
            target[reg.offsets[a] + q] = reg.offsets[b] + q
    return target


def gate_diameter(g: Gate, space: Space) -> float:
    if g.kind == "PERM":
        return max((space.dist[space.index(a), space.index(b)] for a, b in g.perm), default=0.0)
    cells = [space.index(c) for c, _ in g.targets]
    return space.region_diameter(cells)


def validate_layer(layer, space: Space, reg: Register) -> float:
    """Check disjointness and return the layer diameter."""
    if any(g.kind == "PERM" for g in layer):
        if len(layer) != 1:
            raise OverlappingSupports("a PERM gate must be alone in its layer")
        _perm_qudits(space, reg, layer[0])
        return float(gate_diameter(layer[0], space))
    used = set()
    uf = _UnionFind(len(space))
    for g in layer:
        qs = [_qudit_index(space, reg, c, q) for c, q in g.targets]
        if len(set(qs)) != len(qs) or used.intersection(qs):
            raise OverlappingSupports(f"gate {g.to_json()} overlaps another gate in its layer")
        used.update(qs)
        cells = [space.index(c) for c, _ in g.targets]
        for c in cells[1:]:
            uf.union(cells[0], c)
    return max((space.region_diameter(grp) for grp in uf.groups() if len(grp) > 1), default=0.0)


def layer_matrix(layer, space: Space, reg: Register) -> np.ndarray:
    d = reg.d
    n = 2 * reg.N
    M = mr.identity(n)
    for g in layer:
        if g.kind == "PERM":
            tgt = _perm_qudits(space, reg, g)
            M = np.zeros((n, n), dtype=np.int64)
            M[2 * tgt, 2 * np.arange(reg.N)] = 1
            M[2 * tgt + 1, 2 * np.arange(reg.N) + 1] = 1
            return M
        qs = [_qudit_index(space, reg, c, q) for c, q in g.targets]
        if g.kind == "H":
            t = qs[0]
            blk = np.linalg.matrix_power(np.array([[0, -1], [1, 0]], dtype=np.int64), g.power % 4)
            M[2 * t:2 * t + 2, 2 * t:2 * t + 2] = blk % d
        elif g.kind == "P":
            t = qs[0]
            M[2 * t + 1, 2 * t] = g.power % d
        elif g.kind == "CZ":
            s, t = qs
            M[2 * s + 1, 2 * t] = g.power % d
            M[2 * t + 1, 2 * s] = g.power % d
        else:
            raise SchemaError(f"unknown gate {g.kind}")
    return M


def from_gates(script: GateScript, space: Space, register: Register) -> CliffordQCA:
    """Compose the layer maps; the declared radius is the sum of layer diameters."""
    if register.cells != space.cells:
        raise SpaceMismatch("register does not match space")
    d = register.d
    M = mr.identity(2 * register.N)
    radius = 0.0
    for layer in script.layers:
        radius += validate_layer(layer, space, register)
        M = mr.matmul(layer_matrix(layer, space, register), M, d)
    if not is_symplectic(M, d):
        raise InvariantError("gate script produced a non-symplectic matrix")
    return from_matrix(space, register, M, radius, check=False)


def script_gate_table(script: GateScript, space: Space, register: Register) -> pauli.GateTable:
    """The Pauli-level gate table of a script, built from the per-gate tables."""
    n, d = register.N, register.d
    table = pauli.GateTable.identity(n, d)
    for layer in script.layers:
        validate_layer(layer, space, register)
        for g in layer:
            if g.kind == "PERM":
                step = pauli.perm_table(n, _perm_qudits(space, register, g), d)
            else:
                qs = [_qudit_index(space, register, c, q) for c, q in g.targets]
                if g.kind == "H":
                    step = pauli.hadamard_table(n, qs[0], d, g.power)
                elif g.kind == "P":
                    step = pauli.phase_table(n, qs[0], d, g.power)
                else:
                    step = pauli.cz_table(n, qs[0], qs[1], d, g.power)
            table = table.then(step)
    return table


def shift(space: Space, register: Register, s: int = 1) -> CliffordQCA:
    """Translation by ``s`` cells on a ring (every cell must hold the same qudit count)."""
    if space.kind != "ring":
        raise SchemaError("shifts with bounded displacement need a ring")
    L = len(space)
    mapping = {space.cells[i]: space.cells[(i + s) % L] for i in range(L)}
    script = GateScript(((PERM(mapping),),))
    return from_gates(script, space, register)
