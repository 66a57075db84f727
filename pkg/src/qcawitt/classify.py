"""Invariants and certificates for Clifford QCAs.

* ``formation_of``: the formation ``(H_{-1}(L); L, alpha L)`` with ``L`` the X summand.
* ``certify_trivial``: writes ``alpha`` (after an optional Hadamard pre-layer)
  as ``[[1, 0], [C A^-1, 1]] [[1, B A^T], [0, 1]] diag(A, A^-T)``.  The two
  triangular factors become CZ/phase circuits, the last is separated.
* ``delooping_index``: per prime-power factor, the band-restricted rank of
  ``alpha p alpha^-1`` minus that of ``p``, where ``p`` projects onto
  everything left of a cut.

Block notation is the xz layout: ``A`` maps X to X, ``C`` maps X to Z,
``B`` maps Z to X and ``D`` maps Z to Z.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import forms
from . import modring as mr
from . import qca as Q
from .errors import (ABlockSingular, CutTooClose, FormationsDiffer, InvariantError, NotSymmetric,
                     SchemaError, Singular, SupportTouchesBoundary)
from .symplectic import Register, site_to_xz, sp_inverse, xz_to_site

STRATEGIES = ("none", "all", "greedy-local", "pivot", "auto")


def xz(alpha: Q.CliffordQCA):
    """``(A, B, C, D)`` blocks of ``alpha``."""
    N = alpha.register.N
    X = site_to_xz(alpha.M)
    return X[:N, :N], X[:N, N:], X[N:, :N], X[N:, N:]


def from_blocks(space, register, A, B, C, D, radius=None) -> Q.CliffordQCA:
    M = xz_to_site(np.block([[A, B], [C, D]]) % register.d)
    return Q.from_matrix(space, register, M, radius, check=False)


# -- formations ------------------------------------------------------------------------


def standard_form(N: int, d: int) -> forms.EpsForm:
    return forms.hyperbolic(N, -1, "symmetric", d)[0]


def formation_of(alpha: Q.CliffordQCA) -> forms.Formation:
    N, d = alpha.register.N, alpha.d
    f, L = forms.hyperbolic(N, -1, "symmetric", d)
    A, _, C, _ = xz(alpha)
    G = forms.Lagrangian(np.vstack([A, C]).reshape(2 * N, N), d)
    return forms.Formation(f, L, G)


# -- certificates -----------------------------------------------------------------------


@dataclass(frozen=True)
class TrivialityCertificate:
    """``target == from_gates(circuit) @ separated @ H_pre^{-1}``.

    ``hadamard_prelayer`` lists the (cell, qudit) pairs of ``H_pre``; its
    inverse is ``H^3`` on the same qudits.
    """

    target: Q.CliffordQCA
    separated: Q.CliffordQCA
    circuit: Q.GateScript
    hadamard_prelayer: tuple

    @property
    def gate_diameter(self) -> float:
        space = self.target.space
        return max((Q.gate_diameter(g, space) for g in self.circuit.gates()), default=0.0)

    def prelayer_script(self, power: int = 3) -> Q.GateScript:
        if not self.hadamard_prelayer:
            return Q.GateScript(())
        return Q.GateScript(((tuple(Q.H(c, q, power) for c, q in self.hadamard_prelayer)),))

    def recompose(self) -> Q.CliffordQCA:
        space, reg = self.target.space, self.target.register
        pre_inv = Q.from_gates(self.prelayer_script(3), space, reg)
        circ = Q.from_gates(self.circuit, space, reg)
        return Q.compose(Q.compose(pre_inv, self.separated), circ)

    def check(self) -> bool:
        return (Q.is_separated(self.separated)
                and np.array_equal(self.recompose().M, self.target.M))

    def to_json(self) -> dict:
        return {"kind": "triviality_certificate", "target": self.target.to_json(),
                "separated": self.separated.to_json(), "circuit": self.circuit.to_json(),
                "hadamard_prelayer": [[c, q] for c, q in self.hadamard_prelayer],
                "gate_diameter": Q._num(self.gate_diameter)}

    @classmethod
    def from_json(cls, obj: dict) -> "TrivialityCertificate":
        try:
            return cls(Q.CliffordQCA.from_json(obj["target"]),
                       Q.CliffordQCA.from_json(obj["separated"]),
                       Q.GateScript.from_json(obj["circuit"]),
                       tuple((str(c), int(q)) for c, q in obj["hadamard_prelayer"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad certificate: {exc}") from None


def _qudit_labels(reg: Register):
    return [(reg.cells[c], q) for c in range(len(reg.k)) for q in range(reg.k[c])]


def symmetric_to_gates(C, space: Q.Space, register: Register) -> Q.GateScript:
    """Phase and CZ gates whose product is ``[[1, 0], [C, 1]]``.

    Gates are packed greedily into layers in which no qudit is touched twice
    and two-cell gates have disjoint cell pairs, so a layer's diameter is the
    largest distance spanned by one of its gates.
    """
    d = register.d
    C = np.asarray(C, dtype=np.int64) % d
    N = register.N
    if C.shape != (N, N):
        raise SchemaError(f"expected a {N}x{N} matrix")
    if not np.array_equal(C, C.T):
        raise NotSymmetric("C must be symmetric")
    labels = _qudit_labels(register)
    cell_of = register.cell_of_qudit()
    gates = []
    for t in np.flatnonzero(np.diag(C)):
        gates.append((Q.P(labels[t][0], labels[t][1], int(C[t, t])), {int(t)}, set()))
    iu, ju = np.nonzero(np.triu(C, 1))
    order = np.lexsort((iu, space.dist[cell_of[iu], cell_of[ju]]))
    for s, t in zip(iu[order], ju[order]):
        cells = {int(cell_of[s]), int(cell_of[t])}
        g = Q.CZ(labels[s], labels[t], int(C[s, t]))
        gates.append((g, {int(s), int(t)}, cells if len(cells) > 1 else set()))
    layers: list[list] = []
    used_q: list[set] = []
    used_c: list[set] = []
    for g, qs, cells in gates:
        for li in range(len(layers)):
            if not (qs & used_q[li]) and not (cells & used_c[li]):
                break
        else:
            layers.append([])
            used_q.append(set())
            used_c.append(set())
            li = len(layers) - 1
        layers[li].append(g)
        used_q[li] |= qs
        used_c[li] |= cells
    # single-qudit phase gates on a cell used by a two-cell gate are harmless:
    # they do not enlarge any region beyond that gate's cell pair.
    return Q.GateScript(tuple(tuple(layer) for layer in layers))


def upper_to_gates(T, space: Q.Space, register: Register) -> Q.GateScript:
    """Gates for ``[[1, T], [0, 1]]`` (``T`` symmetric): ``H^3``, gates of ``-T``, ``H``."""
    d = register.d
    T = np.asarray(T, dtype=np.int64) % d
    if not T.any():
        return Q.GateScript(())
    labels = _qudit_labels(register)
    supp = np.flatnonzero(T.any(axis=0) | T.any(axis=1))
    pre = (tuple(Q.H(labels[t][0], labels[t][1], 3) for t in supp),)
    post = (tuple(Q.H(labels[t][0], labels[t][1], 1) for t in supp),)
    mid = symmetric_to_gates((-T) % d, space, register)
    return Q.GateScript(pre) + mid + Q.GateScript(post)


def _separated_from(A, space, register) -> Q.CliffordQCA:
    d = register.d
    Ainv = mr.inverse(A, d)
    N = register.N
    Z = np.zeros((N, N), dtype=np.int64)
    return from_blocks(space, register, A, Z, Z, Ainv.T)


def same_formation_equivalence(alpha: Q.CliffordQCA, beta: Q.CliffordQCA) -> TrivialityCertificate:
    """Certificate that ``beta^-1 alpha`` is a circuit after a separated QCA.

    Equal formations mean ``gamma = beta^-1 alpha`` preserves the X summand,
    so ``gamma = [[A, B], [0, A^-T]] = [[1, B A^T], [0, 1]] diag(A, A^-T)``.
    """
    Q._same_frame(alpha, beta)
    gamma = Q.compose(alpha, Q.inverse(beta))
    A, B, C, D = xz(gamma)
    d = alpha.d
    if C.any():
        raise FormationsDiffer("alpha L and beta L are different Lagrangians")
    try:
        theta = _separated_from(A, alpha.space, alpha.register)
    except Singular as exc:
        raise InvariantError("A block of beta^-1 alpha is singular despite C = 0") from exc
    T = mr.matmul(B, A.T, d)
    if not np.array_equal(T, T.T):
        raise InvariantError("B A^T is not symmetric")
    circuit = upper_to_gates(T, alpha.space, alpha.register)
    cert = TrivialityCertificate(gamma, theta, circuit, ())
    if not cert.check():
        raise InvariantError("equivalence certificate does not recompose")
    return cert


def _apply_prelayer(alpha: Q.CliffordQCA, S) -> np.ndarray:
    """Site-major matrix of ``alpha`` after H on the qudits ``S`` (H first)."""
    M = alpha.M.copy()
    d = alpha.d
    for t in S:
        x, z = M[:, 2 * t].copy(), M[:, 2 * t + 1].copy()
        M[:, 2 * t] = z            # alpha(H x_t) = alpha(z_t)
        M[:, 2 * t + 1] = (-x) % d  # alpha(H z_t) = -alpha(x_t)
    return M


def _a_block(M: np.ndarray) -> np.ndarray:
    return M[0::2, 0::2]


def _pivot_set(A, B, p: int, order=None) -> set:
    """Qudits to flip so the chosen columns of ``[A | B]`` form a basis mod ``p``.

    Row-reduce ``[A | B]`` mod p (with the qudits of ``A`` taken in ``order``)
    and flip every qudit whose ``A`` column is not a pivot.  Because the rows
    of ``[A | B]`` span a Lagrangian, the kept ``A`` pivots together with the
    ``B`` columns of the flipped qudits are a basis.
    """
    N = A.shape[0]
    order = np.arange(N) if order is None else np.asarray(order)
    AB = np.hstack([A[:, order], B[:, order]]) % p
    piv = {c for c, _ in mr.pivots(mr.howell_basis(AB, p))}
    return {int(order[c]) for c in range(N) if c not in piv}


def _pivot_candidates(alpha: Q.CliffordQCA, tries: int = 64):
    """Pre-layer candidates, one per prime-power factor, then randomized ones.

    For prime-power ``d`` the first candidate always works.  For composite
    ``d`` one pre-layer must serve every factor, so further candidates come
    from seeded random qudit orders and random trial flips ``R``: the pivot
    rule applied to ``alpha H_R`` gives ``S'`` and the candidate is the
    symmetric difference of ``R`` and ``S'`` (``H^2`` only flips signs).
    """
    A, B, _, _ = xz(alpha)
    N = alpha.register.N
    d = alpha.d
    primes = [p for p, _ in mr.factorize(d)]
    for p in primes:
        yield tuple(sorted(_pivot_set(A, B, p)))
    if len(primes) == 1:
        return
    rng = np.random.default_rng(0)
    for _ in range(tries):
        R = set(np.flatnonzero(rng.random(N) < 0.5).tolist())
        order = rng.permutation(N)
        Mr = _apply_prelayer(alpha, sorted(R))
        X = site_to_xz(Mr)
        Ar, Br = X[:N, :N], X[:N, N:]
        p = primes[int(rng.integers(len(primes)))]
        yield tuple(sorted(R ^ _pivot_set(Ar, Br, p, order)))


def _strategy_candidates(alpha: Q.CliffordQCA, strategy: str):
    N = alpha.register.N
    if strategy == "none":
        yield ()
    elif strategy == "all":
        yield tuple(range(N))
    elif strategy == "greedy-local":
        A = _a_block(alpha.M)
        yield tuple(int(t) for t in np.flatnonzero(~A.any(axis=0)))
    elif strategy == "pivot":
        seen = set()
        for S in _pivot_candidates(alpha):
            if S not in seen:
                seen.add(S)
                yield S
    elif strategy == "auto":
        seen = set()
        for s in ("none", "greedy-local", "pivot", "all"):
            for S in _strategy_candidates(alpha, s):
                if S not in seen:
                    seen.add(S)
                    yield S
    else:
        raise ValueError(f"unknown pre-layer strategy {strategy!r}; choose from {STRATEGIES}")


def certify_trivial(alpha: Q.CliffordQCA, prelayer_search: str = "auto") -> TrivialityCertificate:
    """Factor ``alpha`` into a CZ/phase/Hadamard circuit after a separated QCA.

    ``ABlockSingular`` means no pre-layer tried made the X-to-X block
    invertible; that is inconclusive.
    """
    d = alpha.d
    N = alpha.register.N
    space, reg = alpha.space, alpha.register
    chosen = None
    for S in _strategy_candidates(alpha, prelayer_search):
        Mp = _apply_prelayer(alpha, S)
        if mr.is_invertible(_a_block(Mp), d):
            chosen = (S, Mp)
            break
    if chosen is None:
        raise ABlockSingular(f"no pre-layer from strategy {prelayer_search!r} makes A invertible")
    S, Mp = chosen
    X = site_to_xz(Mp)
    A, B, C, D = X[:N, :N], X[:N, N:], X[N:, :N], X[N:, N:]
    Ainv = mr.inverse(A, d)
    CAi = mr.matmul(C, Ainv, d)
    if not np.array_equal(CAi, CAi.T):
        raise InvariantError("C A^-1 is not symmetric")
    schur = (D - mr.matmul(CAi, B, d)) % d
    if not np.array_equal(schur, Ainv.T % d):
        raise InvariantError("D - C A^-1 B differs from A^-T")
    T = mr.matmul(B, A.T, d)
    theta = _separated_from(A, space, reg)
    circuit = upper_to_gates(T, space, reg) + symmetric_to_gates(CAi, space, reg)
    labels = _qudit_labels(reg)
    cert = TrivialityCertificate(alpha, theta, circuit, tuple(labels[t] for t in S))
    if not cert.check():
        raise InvariantError("triviality certificate does not recompose")
    return cert


# -- delooping index -----------------------------------------------------------------------


def _positions(space: Q.Space) -> np.ndarray:
    if space.kind not in ("line", "ring"):
        raise SchemaError("the delooping index needs a line or ring space")
    return np.arange(len(space))


def left_projection(alpha: Q.CliffordQCA, cut: int) -> np.ndarray:
    """0/1 mask over site-major coordinates of the cells left of ``cut``.

    On a ring "left" means the half-ring ``[cut - L//2, cut)``.
    """
    pos = _positions(alpha.space)
    L = len(pos)
    if alpha.space.kind == "ring":
        left = ((cut - pos) % L >= 1) & ((cut - pos) % L <= L // 2)
    else:
        left = pos < cut
    return left[Q.site_cells(alpha.register)]


def _band_cells(space: Q.Space, cut: int, w: int) -> np.ndarray:
    L = len(space)
    cells = np.arange(cut - w, cut + w)
    if space.kind == "ring":
        return cells % L
    return cells[(cells >= 0) & (cells < L)]


def _check_legal(alpha: Q.CliffordQCA, cut: int, r: int, w: int):
    L = len(alpha.space)
    if alpha.space.kind == "ring":
        if L // 2 - w < 3 * r + 1:
            raise CutTooClose(f"ring of length {L} too short for band half-width {w} and radius {r}")
        return
    if cut < w or cut > L - w:
        raise CutTooClose(f"cut {cut} is closer than {w} cells to an end of the line")
    edge = np.zeros(L, dtype=bool)
    edge[: 2 * r] = True
    edge[L - 2 * r:] = True
    mask = edge[Q.site_cells(alpha.register)]
    M = alpha.M
    off = (M - mr.identity(M.shape[0])) % alpha.d
    if off[mask].any() or off[:, mask].any():
        raise SupportTouchesBoundary("nonidentity blocks within 2r of an end of the line")


def delooping_index(alpha: Q.CliffordQCA, cut: int, width: int | None = None) -> dict[int, int]:
    """Per prime-power factor ``q``: rank of ``alpha p alpha^-1`` minus rank of ``p`` on the band.

    The band is the cells ``[cut - w, cut + w)`` with ``w = 2 * tight_radius``
    unless ``width`` is given.  Outside the band ``alpha p alpha^-1`` is the
    identity on the far left and zero on the far right, so its restriction
    to the band is an idempotent.
    """
    r = int(np.ceil(Q.tight_radius(alpha)))
    w = 2 * r if width is None else int(width)
    if w < 2 * r:
        raise ValueError(f"band half-width {w} is below 2r = {2 * r}")
    _check_legal(alpha, cut, r, w)
    d = alpha.d
    mask = left_projection(alpha, cut)
    Pm = np.diag(mask.astype(np.int64))
    Minv = sp_inverse(alpha.M, d)
    conj = mr.matmul(mr.matmul(alpha.M, Pm, d), Minv, d)
    band_cells = set(_band_cells(alpha.space, cut, w).tolist())
    sites = np.flatnonzero([c in band_cells for c in Q.site_cells(alpha.register)])
    qb = conj[np.ix_(sites, sites)]
    pb = Pm[np.ix_(sites, sites)]
    out = {}
    for q in mr.RingSpec.of(d).moduli:
        out[q] = mr.idempotent_rank(qb % q, q) - mr.idempotent_rank(pb % q, q)
    return out


def split_at(alpha: Q.CliffordQCA, m: int) -> bool:
    """True iff no nonzero block connects a cell left of ``m`` with one at or right of it."""
    pos = np.arange(len(alpha.space))
    a, b = Q._cell_adjacency(alpha)
    left_a, left_b = pos[a] < m, pos[b] < m
    return not (left_a != left_b).any()
