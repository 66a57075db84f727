"""The standard alternating form on Z_d^{2N}, symplectic maps and transvections.

Two coordinate layouts are used throughout.  *Site-major* interleaves the
X and Z exponents of each qudit, ``(a_1, b_1, a_2, b_2, ...)``; gate locality
is visible there.  *xz-blocks* lists all X exponents first and all Z
exponents second, ``(a_1, ..., a_N, b_1, ..., b_N)``; the block algebra of
``[[A, B], [C, D]]`` lives there.  Matrices act on column vectors.

Sign convention: ``J`` is ``[[0, 1], [-1, 0]]`` per qudit, so
``omega((a, b), (e, f)) = a*f - b*e``.  With this convention the transvection
``tau(u, c): x -> x + c*omega(x, u)*u`` gives the phase gate
``[[1, 0], [1, 1]]`` for ``u = e_Z, c = 1`` and ``[[1, -1], [0, 1]]`` for
``u = e_X, c = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import modring as mr
from .errors import (BlockConditionsViolated, InvariantError, NoSolution, NotAlternating, NotSymplectic,
                     SchemaError, ShapeMismatch, Singular)


@dataclass(frozen=True)
class Register:
    """Ordered cells with ``k[i]`` qudits each, over Z_d."""

    cells: tuple
    k: tuple
    d: int

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(str(c) for c in self.cells))
        object.__setattr__(self, "k", tuple(int(x) for x in self.k))
        if len(self.cells) != len(self.k):
            raise ShapeMismatch("one qudit count per cell expected")
        if any(x < 0 for x in self.k):
            raise ValueError("qudit counts must be nonnegative")
        if len(set(self.cells)) != len(self.cells):
            raise ValueError("duplicate cell ids")
        mr.RingSpec.of(self.d)

    @classmethod
    def uniform(cls, ncells: int, d: int, k: int = 1) -> "Register":
        return cls(tuple(str(i) for i in range(ncells)), (k,) * ncells, d)

    @property
    def N(self) -> int:
        return sum(self.k)

    @property
    def offsets(self) -> list[int]:
        out, acc = [], 0
        for x in self.k:
            out.append(acc)
            acc += x
        return out

    def qudit(self, cell_index: int, q: int) -> int:
        """Global qudit index of qudit ``q`` in cell ``cell_index``."""
        if not 0 <= q < self.k[cell_index]:
            raise IndexError(f"cell {self.cells[cell_index]} has {self.k[cell_index]} qudits")
        return self.offsets[cell_index] + q

    def cell_of_qudit(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.k)), self.k)

    def with_d(self, d: int) -> "Register":
        return Register(self.cells, self.k, d)

    def to_json(self) -> dict:
        return {"cells": list(self.cells), "k": list(self.k), "d": self.d}

    @classmethod
    def from_json(cls, obj: dict) -> "Register":
        try:
            return cls(tuple(obj["cells"]), tuple(obj["k"]), int(obj["d"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad register: {exc}") from None


def _d_of(reg_or_d) -> int:
    return reg_or_d.d if isinstance(reg_or_d, Register) else int(reg_or_d)


def J(N: int, d: int) -> np.ndarray:
    """Site-major standard form: block-diagonal ``[[0, 1], [-1, 0]]``."""
    out = np.zeros((2 * N, 2 * N), dtype=np.int64)
    idx = np.arange(N)
    out[2 * idx, 2 * idx + 1] = 1
    out[2 * idx + 1, 2 * idx] = d - 1
    return out


def omega(u, v, reg_or_d) -> int:
    d = _d_of(reg_or_d)
    u = np.asarray(u, dtype=np.int64).ravel() % d
    v = np.asarray(v, dtype=np.int64).ravel() % d
    if u.size != v.size or u.size % 2:
        raise ShapeMismatch(f"vectors of lengths {u.size} and {v.size}")
    a, b = u[0::2], u[1::2]
    e, f = v[0::2], v[1::2]
    return int((a @ f - b @ e) % d)


def is_symplectic(M, reg_or_d) -> bool:
    d = _d_of(reg_or_d)
    M = np.asarray(M, dtype=np.int64) % d
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
        raise ShapeMismatch(f"expected a square even-sized matrix, got {M.shape}")
    if isinstance(reg_or_d, Register) and M.shape[0] != 2 * reg_or_d.N:
        raise ShapeMismatch("matrix size does not match register")
    Jm = J(M.shape[0] // 2, d)
    return bool(np.array_equal(mr.matmul(mr.matmul(M.T, Jm, d), M, d), Jm))


def sp_inverse(M, d: int) -> np.ndarray:
    """Inverse of a symplectic matrix, ``J^{-1} M^T J``."""
    M = np.asarray(M, dtype=np.int64) % d
    Jm = J(M.shape[0] // 2, d)
    return (-mr.matmul(mr.matmul(Jm, M.T, d), Jm, d)) % d


def xz_perm(N: int) -> np.ndarray:
    """``perm[p]`` is the site-major index of xz-block position ``p``."""
    return np.concatenate([2 * np.arange(N), 2 * np.arange(N) + 1]).astype(np.int64)


def site_to_xz(M: np.ndarray) -> np.ndarray:
    p = xz_perm(M.shape[0] // 2)
    return M[np.ix_(p, p)]


def xz_to_site(M: np.ndarray) -> np.ndarray:
    inv = np.argsort(xz_perm(M.shape[0] // 2))
    return M[np.ix_(inv, inv)]


def vec_site_to_xz(v) -> np.ndarray:
    v = np.asarray(v)
    return v[xz_perm(v.size // 2)]


@dataclass(frozen=True, eq=False)
class SymplecticMap:
    """A symplectic automorphism of the register's module, stored site-major."""

    register: Register
    M: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        d = self.register.d
        M = np.array(self.M, dtype=np.int64) % d
        if M.shape != (2 * self.register.N, 2 * self.register.N):
            raise ShapeMismatch(f"matrix shape {M.shape} does not fit {self.register.N} qudits")
        if self.check and not is_symplectic(M, d):
            raise NotSymplectic("matrix does not preserve the standard form")
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    @property
    def d(self) -> int:
        return self.register.d

    def __eq__(self, other):
        return (isinstance(other, SymplecticMap) and self.register == other.register
                and np.array_equal(self.M, other.M))

    def __matmul__(self, other: "SymplecticMap") -> "SymplecticMap":
        if self.register != other.register:
            raise ShapeMismatch("registers differ")
        return SymplecticMap(self.register, mr.matmul(self.M, other.M, self.d), check=False)

    def inverse(self) -> "SymplecticMap":
        return SymplecticMap(self.register, sp_inverse(self.M, self.d), check=False)

    def to_json(self, layout: str = "site_major") -> dict:
        if layout == "site_major":
            M = self.M
        elif layout == "xz_blocks":
            M = site_to_xz(self.M)
        else:
            raise ValueError(f"unknown layout {layout!r}")
        return {"register": self.register.to_json(), "layout": layout,
                "matrix": mr.ModMatrix(self.d, M).to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "SymplecticMap":
        if "layout" not in obj:
            raise SchemaError("symplectic map JSON needs a 'layout' field")
        reg = Register.from_json(obj["register"])
        mat = mr.ModMatrix.from_json(obj["matrix"])
        if mat.d != reg.d:
            raise SchemaError("matrix modulus differs from register modulus")
        if obj["layout"] == "site_major":
            M = mat.a
        elif obj["layout"] == "xz_blocks":
            M = xz_to_site(mat.a)
        else:
            raise SchemaError(f"unknown layout {obj['layout']!r}")
        return cls(reg, M)


@dataclass(frozen=True, eq=False)
class XZBlocks:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    d: int

    def __post_init__(self):
        for name in "ABCD":
            arr = np.array(getattr(self, name), dtype=np.int64, ndmin=2) % self.d
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        check_block_conditions(self.A, self.B, self.C, self.D, self.d)

    @property
    def N(self) -> int:
        return self.A.shape[0]

    def full(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])


def check_block_conditions(A, B, C, D, d: int) -> None:
    """Raise ``BlockConditionsViolated`` naming the first failing identity."""
    N = A.shape[0]
    I = mr.identity(N)
    mm = lambda X, Y: mr.matmul(X, Y, d)  # noqa: E731
    sym = lambda X: np.array_equal(X, X.T)  # noqa: E731
    checks = [
        ("A^T C symmetric", lambda: sym(mm(A.T, C))),
        ("B^T D symmetric", lambda: sym(mm(B.T, D))),
        ("A^T D - C^T B = I", lambda: np.array_equal((mm(A.T, D) - mm(C.T, B)) % d, I)),
        ("A B^T symmetric", lambda: sym(mm(A, B.T))),
        ("C D^T symmetric", lambda: sym(mm(C, D.T))),
        ("A D^T - B C^T = I", lambda: np.array_equal((mm(A, D.T) - mm(B, C.T)) % d, I)),
    ]
    for name, ok in checks:
        if not ok():
            raise BlockConditionsViolated(name)


def to_xz_blocks(S: SymplecticMap) -> XZBlocks:
    N = S.register.N
    X = site_to_xz(S.M)
    return XZBlocks(X[:N, :N], X[:N, N:], X[N:, :N], X[N:, N:], S.d)


def from_xz_blocks(b: XZBlocks, register: Register | None = None) -> SymplecticMap:
    reg = register if register is not None else Register.uniform(b.N, b.d)
    return SymplecticMap(reg, xz_to_site(b.full()), check=False)


def transvection(u, c: int, reg_or_d) -> np.ndarray:
    """Matrix of ``x -> x + c*omega(x, u)*u``."""
    d = _d_of(reg_or_d)
    u = np.asarray(u, dtype=np.int64).ravel() % d
    n = u.size
    Ju = mr.matmul(J(n // 2, d), u, d)
    T = (mr.identity(n) + (int(c) % d) * np.outer(u, Ju) % d) % d
    return T


def _local_modulus(factor: int) -> int:
    f = mr.factorize(factor)
    if len(f) != 1:
        raise ValueError(f"{factor} is not a prime power")
    return f[0][0]


def decompose_transvections(S, factor: int) -> list[tuple[np.ndarray, int]]:
    """Write a symplectic matrix over Z_{p^k} as an ordered product of transvections.

    Returns ``[(u_1, c_1), ..., (u_L, c_L)]`` with
    ``S == T(u_1, c_1) @ T(u_2, c_2) @ ... @ T(u_L, c_L)`` over Z_factor and
    ``L <= 4N``.  The reduction clears one hyperbolic pair of columns at a
    time.  A column ``v`` is sent to its target ``e`` by one transvection when
    ``omega(v, e)`` is a unit, otherwise by two, routed through an
    intermediate vector ``z`` with both pairings units; over a local ring such
    a ``z`` exists because units are exactly the elements nonzero mod p.
    """
    p = _local_modulus(factor)
    q = factor
    M = np.asarray(S.M if isinstance(S, SymplecticMap) else S, dtype=np.int64) % q
    if not is_symplectic(M, q):
        raise NotSymplectic(f"matrix is not symplectic mod {q}")
    n = M.shape[0]
    N = n // 2
    Jm = J(N, q)
    steps: list[tuple[np.ndarray, int]] = []
    cur = M.copy()

    def om(x, y):
        return int(x @ Jm @ y % q) if n else 0

    def send(v, target):
        nonlocal cur
        w = int(om(v, target))
        inv = pow(w, -1, q)
        u = (target - v) % q
        T = transvection(u, inv, q)
        cur = mr.matmul(T, cur, q)
        steps.append((u, inv))

    def intermediate(v, e, lo):
        # z supported on coordinates >= lo with omega(v, z) and omega(z, e) units
        cols = np.arange(lo, n)
        r1 = mr.matmul(v, Jm, q)[cols]
        r2 = mr.matmul(Jm, e, q)[cols]
        for rows, rhs in (([r1, r2], [1, 1]), ([r1], [1])):
            try:
                sol = mr.solve_linear(np.array(rows), rhs, q)
            except NoSolution:
                continue
            z = np.zeros(n, dtype=np.int64)
            z[cols] = sol
            if om(v, z) % p and om(z, e) % p:
                return z
        raise Singular("no intermediate vector; input is not invertible")

    for i in range(N):
        e = np.zeros(n, dtype=np.int64)
        e[2 * i] = 1
        v = cur[:, 2 * i].copy()
        if not np.array_equal(v, e):
            if om(v, e) % p:
                send(v, e)
            else:
                z = intermediate(v, e, 2 * i)
                send(v, z)
                send(z, e)
        f = np.zeros(n, dtype=np.int64)
        f[2 * i + 1] = 1
        w = cur[:, 2 * i + 1].copy()
        if not np.array_equal(w, f):
            if om(w, f) % p:
                send(w, f)
            else:
                z = (e + f) % q
                send(w, z)
                send(z, f)
    if not np.array_equal(cur, mr.identity(n)):
        raise InvariantError("transvection reduction did not reach the identity")
    return [(u, (-c) % q) for u, c in steps]


def recompose(steps, n: int, d: int) -> np.ndarray:
    out = mr.identity(n)
    for u, c in steps:
        out = mr.matmul(out, transvection(u, c, d), d)
    return out


def symplectic_basis(G, factor: int) -> np.ndarray:
    """``P`` with ``P^T G P = J`` for a nonsingular alternating ``G`` over Z_{p^k}.

    Symplectic Gram-Schmidt: columns come out ordered ``e_1, f_1, e_2, f_2, ...``.
    """
    p = _local_modulus(factor)
    q = factor
    G = np.asarray(G, dtype=np.int64) % q
    m = G.shape[0]
    if G.shape != (m, m) or not np.array_equal(G, (-G.T) % q) or np.diag(G).any():
        raise NotAlternating("G must be alternating")
    if m % 2:
        raise Singular("odd-sized alternating matrix is singular")

    def B(x, y):
        return int(x @ G @ y % q)

    W = [row for row in mr.identity(m)]
    cols = []
    while W:
        pair = None
        for i in range(len(W)):
            for j in range(i + 1, len(W)):
                if B(W[i], W[j]) % p:
                    pair = (i, j)
                    break
            if pair:
                break
        if pair is None:
            raise Singular(f"alternating form is singular mod {p}")
        i, j = pair
        x, y = W[i], W[j]
        ef = B(x, y)
        e, f = x, y * pow(ef, -1, q) % q
        W = [w for t, w in enumerate(W) if t not in (i, j)]
        W = [(w - B(w, f) * e + B(w, e) * f) % q for w in W]
        cols.extend([e, f])
    P = np.array(cols, dtype=np.int64).T.reshape(m, m)
    if not np.array_equal(mr.matmul(mr.matmul(P.T, G, q), P, q), J(m // 2, q)):
        raise InvariantError("symplectic basis check failed")
    return P
