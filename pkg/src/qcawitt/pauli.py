"""Generalized Pauli operators with exact phases, and Clifford gate tables.

A ``PauliOp`` is ``xi_m**phase * prod_i X_i**a_i Z_i**b_i`` in normal order
(X before Z on each qudit, qudits in site order), with ``X`` the shift
``|j> -> |j+1>`` and ``Z = diag(xi**j)``, ``xi = exp(2 pi i / d)``.  Then
``Z X = xi X Z``.  The phase modulus is ``m = d`` for odd ``d`` and ``m = 2d``
for even ``d``; a Z_d-valued exponent ``t`` enters the phase as
``twist(t) = t * (m // d)``.

Products obey ``q p = xi**omega(p, q) p q`` where ``omega`` is the standard
form ``sum a f - b e``.

A ``GateTable`` lists the images of ``X_1, Z_1, X_2, Z_2, ...`` under the
conjugation ``P -> U^dagger P U``.  With that convention the table of the
word "``U_1`` then ``U_2``" is realised by the unitary ``U_1 U_2``, and the
symplectic matrices compose as ``kappa(second) @ kappa(first)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import modring as mr
from .errors import DimensionTooLarge, InvariantError, NotSymplectic, RegisterMismatch, SchemaError
from .symplectic import Register, SymplecticMap, is_symplectic, omega


@dataclass(frozen=True)
class PhaseSpec:
    d: int

    @property
    def m(self) -> int:
        return self.d if self.d % 2 else 2 * self.d

    def twist(self, t: int) -> int:
        return (int(t) % self.d) * (self.m // self.d) % self.m


@dataclass(frozen=True, eq=False)
class PauliOp:
    d: int
    phase: int
    vec: np.ndarray

    def __post_init__(self):
        m = PhaseSpec(self.d).m
        v = np.array(self.vec, dtype=np.int64).ravel() % self.d
        if v.size % 2:
            raise RegisterMismatch("Pauli vector must have even length")
        v.setflags(write=False)
        object.__setattr__(self, "vec", v)
        object.__setattr__(self, "phase", int(self.phase) % m)

    @property
    def n(self) -> int:
        return self.vec.size // 2

    @property
    def m(self) -> int:
        return PhaseSpec(self.d).m

    def __eq__(self, other):
        return (isinstance(other, PauliOp) and self.d == other.d and self.phase == other.phase
                and np.array_equal(self.vec, other.vec))

    def __hash__(self):
        return hash((self.d, self.phase, self.vec.tobytes()))

    def __repr__(self):
        return f"PauliOp(d={self.d}, phase={self.phase}, vec={self.vec.tolist()})"

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        return pauli_mul(self, other)

    def to_json(self) -> dict:
        return {"phase": self.phase, "vec": [int(x) for x in self.vec]}

    @classmethod
    def from_json(cls, obj: dict, d: int) -> "PauliOp":
        try:
            return cls(d, int(obj["phase"]), np.array(obj["vec"], dtype=np.int64))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad Pauli operator: {exc}") from None


def identity_op(n: int, d: int) -> PauliOp:
    return PauliOp(d, 0, np.zeros(2 * n, dtype=np.int64))


def single(kind: str, qudit: int, n: int, d: int, power: int = 1) -> PauliOp:
    """``X_qudit**power`` or ``Z_qudit**power`` on an ``n``-qudit register."""
    v = np.zeros(2 * n, dtype=np.int64)
    v[2 * qudit + (0 if kind == "X" else 1)] = power
    return PauliOp(d, 0, v)


def _check_same(p: PauliOp, q: PauliOp):
    if p.d != q.d or p.vec.size != q.vec.size:
        raise RegisterMismatch(f"registers differ: d={p.d},{q.d} n={p.n},{q.n}")


def pauli_mul(p: PauliOp, q: PauliOp) -> PauliOp:
    """Normal-ordered product ``p q``."""
    _check_same(p, q)
    ps = PhaseSpec(p.d)
    swap = int(p.vec[1::2] @ q.vec[0::2])
    return PauliOp(p.d, p.phase + q.phase + ps.twist(swap), p.vec + q.vec)


def pauli_pow(p: PauliOp, e: int) -> PauliOp:
    """``p**e`` for ``e >= 0``."""
    e = int(e)
    if e < 0:
        raise ValueError("negative powers are not supported; use e mod order")
    ps = PhaseSpec(p.d)
    ba = int(p.vec[1::2] @ p.vec[0::2]) % p.d
    # p^e = phase^e * xi^{C(e,2) * b.a} X^{e a} Z^{e b}
    cross = (e * (e - 1) // 2) % p.d * ba
    return PauliOp(p.d, e * p.phase + ps.twist(cross), e * p.vec)


def commutation_exponent(p: PauliOp, q: PauliOp) -> int:
    _check_same(p, q)
    return omega(p.vec, q.vec, p.d)


def product_with_multiplicities(factors_vec: np.ndarray, factors_phase: np.ndarray,
                                mult: np.ndarray, d: int):
    """Phase and vector of ``prod_j F_j**mult_j`` in the listed order.

    ``factors_vec`` holds one site-major vector per row.  Vectorised so that
    applying a table to an operator costs a few array operations.
    """
    ps = PhaseSpec(d)
    mult = np.asarray(mult, dtype=np.int64) % d
    V = np.asarray(factors_vec, dtype=np.int64) % d
    X, Z = V[:, 0::2], V[:, 1::2]
    # cross terms between distinct factors: sum_{i<j} c_i c_j z_i . x_j
    cz = (mult[:, None] * Z) % d
    prefix = np.cumsum(cz, axis=0) % d
    prefix = np.vstack([np.zeros((1, Z.shape[1]), dtype=np.int64), prefix[:-1]])
    cx = (mult[:, None] * X) % d
    t = int(np.sum((prefix * cx) % d) % d)
    # self terms of each power: C(c, 2) z_j . x_j
    zx = np.sum((Z * X) % d, axis=1) % d
    half = (mult * (mult - 1) // 2) % d
    t = (t + int(np.sum(half * zx % d))) % d
    phase = (int(np.sum(mult * (np.asarray(factors_phase, dtype=np.int64) % ps.m) % ps.m))
             + ps.twist(t)) % ps.m
    vec = (mult @ V) % d if len(mult) else np.zeros(V.shape[1], dtype=np.int64)
    return phase, vec


@dataclass(frozen=True, eq=False)
class GateTable:
    """Images of ``X_1, Z_1, ..., X_n, Z_n`` under a Clifford conjugation."""

    d: int
    n: int
    phases: np.ndarray
    vecs: np.ndarray  # row r is the image of generator r (site-major order)

    def __post_init__(self):
        ps = PhaseSpec(self.d)
        ph = np.array(self.phases, dtype=np.int64).ravel() % ps.m
        V = np.array(self.vecs, dtype=np.int64).reshape(2 * self.n, 2 * self.n) % self.d
        ph.setflags(write=False)
        V.setflags(write=False)
        object.__setattr__(self, "phases", ph)
        object.__setattr__(self, "vecs", V)

    @classmethod
    def identity(cls, n: int, d: int) -> "GateTable":
        return cls(d, n, np.zeros(2 * n, dtype=np.int64), mr.identity(2 * n))

    @classmethod
    def from_images(cls, images: list[PauliOp]) -> "GateTable":
        d = images[0].d
        n = len(images) // 2
        return cls(d, n, [p.phase for p in images], [p.vec for p in images])

    def image(self, r: int) -> PauliOp:
        return PauliOp(self.d, int(self.phases[r]), self.vecs[r])

    @property
    def images(self) -> list[PauliOp]:
        return [self.image(r) for r in range(2 * self.n)]

    def __eq__(self, other):
        return (isinstance(other, GateTable) and self.d == other.d and self.n == other.n
                and np.array_equal(self.phases, other.phases)
                and np.array_equal(self.vecs, other.vecs))

    def apply(self, p: PauliOp) -> PauliOp:
        if p.d != self.d or p.n != self.n:
            raise RegisterMismatch("operator does not live on this table's register")
        ph, vec = product_with_multiplicities(self.vecs, self.phases, p.vec, self.d)
        return PauliOp(self.d, p.phase + ph, vec)

    def then(self, other: "GateTable") -> "GateTable":
        """The table of "this conjugation, then ``other``"."""
        if other.d != self.d or other.n != self.n:
            raise RegisterMismatch("tables act on different registers")
        out = [other.apply(img) for img in self.images]
        return GateTable.from_images(out) if out else self

    def to_json(self) -> dict:
        images = {}
        for i in range(self.n):
            images[f"X{i + 1}"] = self.image(2 * i).to_json()
            images[f"Z{i + 1}"] = self.image(2 * i + 1).to_json()
        return {"d": self.d, "n": self.n, "images": images}

    @classmethod
    def from_json(cls, obj: dict) -> "GateTable":
        try:
            d, n, images = int(obj["d"]), int(obj["n"]), obj["images"]
            ops = []
            for i in range(n):
                ops.append(PauliOp.from_json(images[f"X{i + 1}"], d))
                ops.append(PauliOp.from_json(images[f"Z{i + 1}"], d))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad gate table: {exc}") from None
        if any(op.n != n for op in ops):
            raise SchemaError("image vectors must have length 2n")
        return cls.from_images(ops) if ops else cls.identity(0, d)


# -- elementary gate tables ---------------------------------------------------


def hadamard_table(n: int, qudit: int, d: int, power: int = 1) -> GateTable:
    """X -> Z, Z -> X^{-1} on one qudit, iterated ``power`` times."""
    base = GateTable.identity(n, d)
    ph = base.phases.copy()
    V = base.vecs.copy()
    V[2 * qudit] = 0
    V[2 * qudit, 2 * qudit + 1] = 1
    V[2 * qudit + 1] = 0
    V[2 * qudit + 1, 2 * qudit] = d - 1
    step = GateTable(d, n, ph, V)
    out = base
    for _ in range(int(power) % 4):
        out = out.then(step)
    return out


def phase_table(n: int, qudit: int, d: int, power: int = 1) -> GateTable:
    """X -> xi_m^{c (m/d - 1)} X Z^c, Z -> Z for power ``c``.

    For even ``d`` the extra ``xi_{2d}^c`` keeps the image of order ``d``.
    """
    c = int(power) % (PhaseSpec(d).m)
    ps = PhaseSpec(d)
    ph = np.zeros(2 * n, dtype=np.int64)
    V = mr.identity(2 * n)
    V[2 * qudit, 2 * qudit + 1] = c % d
    ph[2 * qudit] = (c * (ps.m // d - 1)) % ps.m
    return GateTable(d, n, ph, V)


def cz_table(n: int, q1: int, q2: int, d: int, power: int = 1) -> GateTable:
    """X_1 -> X_1 Z_2^c, X_2 -> Z_1^c X_2, Z_i -> Z_i."""
    if q1 == q2:
        raise ValueError("CZ needs two distinct qudits")
    V = mr.identity(2 * n)
    V[2 * q1, 2 * q2 + 1] = power % d
    V[2 * q2, 2 * q1 + 1] = power % d
    return GateTable(d, n, np.zeros(2 * n, dtype=np.int64), V)


def perm_table(n: int, perm, d: int) -> GateTable:
    """Move qudit ``i`` to position ``perm[i]``."""
    perm = np.asarray(perm, dtype=np.int64)
    V = np.zeros((2 * n, 2 * n), dtype=np.int64)
    for i, j in enumerate(perm):
        V[2 * i, 2 * j] = 1
        V[2 * i + 1, 2 * j + 1] = 1
    return GateTable(d, n, np.zeros(2 * n, dtype=np.int64), V)


def pauli_gate_table(n: int, qudit: int, d: int, xpow: int, zpow: int) -> GateTable:
    """Conjugation by ``X^xpow Z^zpow``: X -> xi^{-zpow} X, Z -> xi^{xpow} Z."""
    ps = PhaseSpec(d)
    ph = np.zeros(2 * n, dtype=np.int64)
    ph[2 * qudit] = ps.twist(-zpow)
    ph[2 * qudit + 1] = ps.twist(xpow)
    return GateTable(d, n, ph, mr.identity(2 * n))


# -- kappa ----------------------------------------------------------------------


def kappa_of(g: GateTable, register: Register | None = None) -> SymplecticMap:
    """The symplectic matrix whose columns are the image vectors.

    Raises ``NotSymplectic`` when the images do not define a Clifford
    automorphism: wrong commutation relations, or an image of the wrong order.
    """
    reg = register if register is not None else Register.uniform(g.n, g.d)
    if reg.N != g.n or reg.d != g.d:
        raise RegisterMismatch("register does not match the gate table")
    M = g.vecs.T.copy()
    if not is_symplectic(M, g.d):
        raise NotSymplectic("images do not satisfy the Pauli commutation relations")
    for r, img in enumerate(g.images):
        if pauli_pow(img, g.d).phase != 0:
            raise NotSymplectic(f"image of generator {r} does not have order d")
    return SymplecticMap(reg, M, check=False)


def kernel_layer(g: GateTable) -> list[tuple[int, int, int]]:
    """Pauli gates ``(qudit, xpow, zpow)`` realising a phase-only table.

    For ``g(X_i) = xi^{m_i} X_i`` and ``g(Z_i) = xi^{n_i} Z_i`` the layer of
    ``X_i^{n_i} Z_i^{-m_i}`` reproduces ``g`` exactly; this is checked before
    returning.
    """
    kappa = kappa_of(g)
    if not np.array_equal(kappa.M, mr.identity(2 * g.n)):
        raise ValueError("table is not phase-only")
    ps = PhaseSpec(g.d)
    step = ps.m // g.d
    gates = []
    check = GateTable.identity(g.n, g.d)
    for i in range(g.n):
        mx, nz = int(g.phases[2 * i]), int(g.phases[2 * i + 1])
        if mx % step or nz % step:
            raise NotSymplectic("phase is not a power of xi")
        m_i, n_i = mx // step, nz // step
        if m_i or n_i:
            gates.append((i, n_i % g.d, (-m_i) % g.d))
            check = check.then(pauli_gate_table(g.n, i, g.d, n_i, -m_i))
    if check != g:
        raise InvariantError("kernel layer does not reproduce the table")
    return gates


# -- dense oracle -----------------------------------------------------------------

DENSE_LIMIT = 128


def _dense_ops(d: int):
    ps = PhaseSpec(d)
    X = np.roll(np.eye(d), 1, axis=0).astype(complex)
    Z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return X, Z, np.exp(2j * np.pi / ps.m)


def dense_pauli(p: PauliOp) -> np.ndarray:
    """Explicit ``d^n x d^n`` matrix of a Pauli operator (site 1 is the most significant)."""
    if p.d ** p.n > DENSE_LIMIT:
        raise DimensionTooLarge(f"{p.d}^{p.n} exceeds {DENSE_LIMIT}")
    X, Z, w = _dense_ops(p.d)
    out = np.array([[1.0 + 0j]])
    for i in range(p.n):
        a, b = int(p.vec[2 * i]), int(p.vec[2 * i + 1])
        local = np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b)
        out = np.kron(out, local)
    return out * w ** p.phase


def _embed(local: np.ndarray, qudits: list[int], n: int, d: int) -> np.ndarray:
    """Embed an operator on ``qudits`` (in that order) into ``n`` qudits."""
    k = len(qudits)
    rest = [q for q in range(n) if q not in qudits]
    order = list(qudits) + rest
    full = np.kron(local, np.eye(d ** (n - k)))
    full = full.reshape([d] * (2 * n))
    inv = np.argsort(order)
    axes = list(inv) + [n + i for i in inv]
    return full.transpose(axes).reshape(d ** n, d ** n)


def dense_unitary(gate: str, n: int, d: int, qudits, power: int = 1, perm=None) -> np.ndarray:
    """Explicit unitary for an elementary gate, matching the tables above."""
    if d ** n > DENSE_LIMIT:
        raise DimensionTooLarge(f"{d}^{n} exceeds {DENSE_LIMIT}")
    j = np.arange(d)
    xi = np.exp(2j * np.pi / d)
    if gate == "H":
        F = np.exp(-2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)
        local = np.linalg.matrix_power(F, int(power) % 4)
        return _embed(local, list(qudits), n, d)
    if gate == "P":
        if d % 2:
            diag = xi ** (-(j * (j - 1) // 2))
        else:
            diag = np.exp(-2j * np.pi * (j * j) / (2 * d))
        return _embed(np.diag(diag ** int(power)), list(qudits), n, d)
    if gate == "CZ":
        jj = np.outer(j, j).ravel()
        return _embed(np.diag(xi ** (-int(power) * jj)), list(qudits), n, d)
    if gate == "PAULI":
        X, Z, _ = _dense_ops(d)
        xp, zp = power
        local = np.linalg.matrix_power(X, xp % d) @ np.linalg.matrix_power(Z, zp % d)
        return _embed(local, list(qudits), n, d)
    if gate == "PERM":
        dim = d ** n
        U = np.zeros((dim, dim))
        for idx in range(dim):
            digits = np.unravel_index(idx, [d] * n)
            new = [0] * n
            for i, t in enumerate(perm):
                new[t] = digits[i]
            U[np.ravel_multi_index(new, [d] * n), idx] = 1
        # conjugation U^dagger P U moves qudit i to perm[i], so use the inverse
        return U.T
    raise ValueError(f"unknown gate {gate!r}")


def dense_oracle_check(g: GateTable, unitary: np.ndarray | None = None, tol: float = 1e-9) -> bool:
    """Check a table against explicit matrices.

    With a unitary ``U``: every tabled image must equal ``U^dagger G U`` for its
    generator ``G``, phases included.  Without one: the image matrices must
    satisfy the defining relations (order d and the generator commutation
    phases), which is what makes the table extend to an automorphism.
    """
    if g.d ** g.n > DENSE_LIMIT:
        raise DimensionTooLarge(f"{g.d}^{g.n} exceeds {DENSE_LIMIT}")
    d, n = g.d, g.n
    gens = [single("X" if r % 2 == 0 else "Z", r // 2, n, d) for r in range(2 * n)]
    imgs = [dense_pauli(p) for p in g.images]
    if unitary is not None:
        U = np.asarray(unitary, dtype=complex)
        for G, img in zip(gens, imgs):
            if not np.allclose(U.conj().T @ dense_pauli(G) @ U, img, atol=tol):
                return False
        return True
    eye = np.eye(d ** n)
    xi = np.exp(2j * np.pi / d)
    for r, img in enumerate(imgs):
        if not np.allclose(np.linalg.matrix_power(img, d), eye, atol=tol):
            return False
        for s in range(r + 1, len(imgs)):
            w = omega(gens[r].vec, gens[s].vec, d)
            # q p = xi^{omega(p, q)} p q
            if not np.allclose(imgs[s] @ img, xi ** w * (img @ imgs[s]), atol=tol):
                return False
    return True
