"""Epsilon-symmetric and epsilon-quadratic forms, Lagrangians and formations over Z_d.

Forms live on the free module Z_d^m with the trivial involution, so the dual
of a matrix is its transpose.  A symmetric form stores ``psi`` with
``psi == eps * psi.T``.  A quadratic form stores a representative of the
class of ``psi`` modulo ``{chi - eps * chi.T}``; ``normalize_quadratic`` picks
the lower-triangular representative.  The bilinear form attached to either
kind is ``bilinear(f)``.

Hyperbolic forms use the block layout ``L + L*`` with ``L`` the first ``r``
coordinates.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import modring as mr
from .errors import (BudgetExceeded, InvariantError, NoSolution, NoSplitting, NotAComplement,
                     NotComplementary, NotFound, ObstructedCorrection, SchemaError, ShapeMismatch)

KINDS = ("symmetric", "quadratic")


def normalize_quadratic(psi, eps: int, d: int) -> np.ndarray:
    """Lower-triangular representative of ``psi`` modulo ``{chi - eps chi^T}``.

    Entries above the diagonal are folded below it as ``psi_ji + eps psi_ij``.
    For ``eps = -1`` the diagonal is only defined modulo ``2 Z_d``.
    """
    P = np.array(psi, dtype=np.int64) % d
    m = P.shape[0]
    iu = np.triu_indices(m, 1)
    P[iu[1], iu[0]] = (P[iu[1], iu[0]] + eps * P[iu]) % d
    P[iu] = 0
    if eps == -1:
        diag = np.diag(P) % np.gcd(2, d)
        P[np.arange(m), np.arange(m)] = diag
    return P % d


@dataclass(frozen=True, eq=False)
class EpsForm:
    epsilon: int
    kind: str
    psi: np.ndarray
    d: int

    def __post_init__(self):
        if self.epsilon not in (1, -1):
            raise ValueError("epsilon must be +1 or -1")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        P = np.array(self.psi, dtype=np.int64) % self.d
        if P.size == 0:
            P = np.zeros((0, 0), dtype=np.int64)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ShapeMismatch("form matrix must be square")
        if self.kind == "symmetric" and not np.array_equal(P, (self.epsilon * P.T) % self.d):
            raise ValueError("symmetric form must satisfy psi = eps psi^T")
        if self.kind == "quadratic":
            P = normalize_quadratic(P, self.epsilon, self.d)
        P.setflags(write=False)
        object.__setattr__(self, "psi", P)

    @property
    def m(self) -> int:
        return self.psi.shape[0]

    def __eq__(self, other):
        return (isinstance(other, EpsForm) and (self.epsilon, self.kind, self.d)
                == (other.epsilon, other.kind, other.d) and np.array_equal(self.psi, other.psi))

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "kind": self.kind,
                "psi": mr.ModMatrix(self.d, self.psi).to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "EpsForm":
        try:
            mat = mr.ModMatrix.from_json(obj["psi"])
            return cls(int(obj["epsilon"]), obj["kind"], mat.a, mat.d)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad form: {exc}") from None


def bilinear(f: EpsForm) -> np.ndarray:
    if f.kind == "quadratic":
        return (f.psi + f.epsilon * f.psi.T) % f.d
    return f.psi.copy()


def pullback(f: EpsForm, T) -> np.ndarray:
    """``T^T psi T`` (not normalized)."""
    T = np.asarray(T, dtype=np.int64)
    return mr.matmul(mr.matmul(T.T, f.psi, f.d), T, f.d)


def restricted_is_zero(f: EpsForm, T) -> bool:
    """Does the form vanish on the column span of ``T``?"""
    R = pullback(f, T)
    if f.kind == "quadratic":
        return not normalize_quadratic(R, f.epsilon, f.d).any()
    return not R.any()


def is_nonsingular(f: EpsForm) -> bool:
    return f.m == 0 or mr.is_invertible(bilinear(f), f.d)


def hyperbolic(r: int, epsilon: int, kind: str, d: int):
    """``H_eps(Z_d^r)`` and its standard Lagrangian (the first summand)."""
    I = mr.identity(r)
    Z = np.zeros((r, r), dtype=np.int64)
    if r == 0:
        return (EpsForm(epsilon, kind, np.zeros((0, 0), dtype=np.int64), d),
                Lagrangian(np.zeros((0, 0), dtype=np.int64), d))
    if kind == "quadratic":
        psi = np.block([[Z, I], [Z, Z]])
    else:
        psi = np.block([[Z, I], [epsilon * I, Z]])
    f = EpsForm(epsilon, kind, psi.reshape(2 * r, 2 * r), d)
    return f, Lagrangian(np.vstack([I, Z]).reshape(2 * r, r), d)


@dataclass(frozen=True, eq=False)
class Lagrangian:
    """A submodule given by the column span of ``basis``.

    On construction the columns are replaced by a canonical basis when the
    span is free (always the case for a genuine Lagrangian); otherwise the
    Howell generators are kept so that predicates can still reject it.
    """

    basis: np.ndarray
    d: int

    def __post_init__(self):
        B = np.array(self.basis, dtype=np.int64, ndmin=2) % self.d
        if B.size == 0:
            B = B.reshape(B.shape[0], 0)
            B.setflags(write=False)
            object.__setattr__(self, "basis", B)
            object.__setattr__(self, "free", True)
            return
        try:
            canon = mr.free_basis(B.T, self.d).T
            free = True
        except ValueError:
            canon = mr.howell_basis(B.T, self.d).T
            free = False
        canon = canon.reshape(B.shape[0], -1)
        canon.setflags(write=False)
        object.__setattr__(self, "basis", canon)
        object.__setattr__(self, "free", free)

    @property
    def m(self) -> int:
        return self.basis.shape[0]

    @property
    def r(self) -> int:
        return self.basis.shape[1]

    def __eq__(self, other):
        return (isinstance(other, Lagrangian) and self.d == other.d
                and mr.same_row_span(self.basis.T, other.basis.T, self.d))

    def to_json(self) -> dict:
        return {"basis": mr.ModMatrix(self.d, self.basis).to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "Lagrangian":
        try:
            mat = mr.ModMatrix.from_json(obj["basis"])
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad Lagrangian: {exc}") from None
        return cls(mat.a, mat.d)


@dataclass(frozen=True)
class Formation:
    form: EpsForm
    F: Lagrangian
    G: Lagrangian

    def to_json(self) -> dict:
        return {"form": self.form.to_json(), "F": self.F.to_json(), "G": self.G.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "Formation":
        try:
            return cls(EpsForm.from_json(obj["form"]), Lagrangian.from_json(obj["F"]),
                       Lagrangian.from_json(obj["G"]))
        except KeyError as exc:
            raise SchemaError(f"bad formation: missing {exc}") from None


def _full_span(M, d: int) -> bool:
    """Do the columns of ``M`` span Z_d^rows?"""
    M = np.asarray(M, dtype=np.int64)
    return np.array_equal(mr.howell_basis(M.T, d), mr.identity(M.shape[0]))


def is_lagrangian(L: Lagrangian, f: EpsForm) -> bool:
    d = f.d
    if L.m != f.m or not L.free or 2 * L.r != f.m:
        return False
    i = L.basis
    if not restricted_is_zero(f, i):
        return False
    dual = mr.matmul(i.T, bilinear(f), d)  # i^T Psi : M -> L*
    if not _full_span(dual, d):
        return False
    return mr.same_row_span(mr.kernel(dual, d).T, i.T, d)


def _verify_iso(f: EpsForm, Phi: np.ndarray, target: EpsForm) -> bool:
    """Is ``Phi`` an isometry from ``target`` onto ``f`` (``Phi^T f Phi == target``)?"""
    d = f.d
    if not mr.is_invertible(Phi, d):
        return False
    R = pullback(f, Phi)
    if f.kind == "quadratic":
        return np.array_equal(normalize_quadratic(R, f.epsilon, d), target.psi)
    return np.array_equal(R, target.psi)


def _correction(S: np.ndarray, f: EpsForm) -> np.ndarray:
    """``k`` making ``j + i k`` isotropic, given ``S = j^T psi j``."""
    d, eps = f.d, f.epsilon
    r = S.shape[0]
    if f.kind == "quadratic":
        return (-S.T) % d
    low = np.tril(S, -1)
    if eps == -1:
        if np.diag(S).any():
            raise ObstructedCorrection("j^T psi j has a nonzero diagonal; the symmetric "
                                       "(-1) correction is obstructed")
        return low % d
    k = (-low) % d
    for t in range(r):
        s = int(-S[t, t]) % d
        try:
            k[t, t] = int(mr.solve_linear(np.array([[2]]), [s], d)[0])
        except NoSolution:
            raise ObstructedCorrection("diagonal of j^T psi j is not divisible by 2") from None
    return k


def lagrangian_to_hyperbolic(f: EpsForm, L: Lagrangian) -> np.ndarray:
    """An isometry ``Phi: H_eps(L) -> f`` with ``Phi`` sending the standard Lagrangian onto ``L``.

    Returns the ``m x m`` matrix ``[i | j']``: ``i`` is the basis of ``L`` and
    ``j' = j + i k`` a corrected splitting of ``i^T Psi``.
    """
    d = f.d
    if not is_lagrangian(L, f):
        raise ValueError("L is not a Lagrangian of f")
    r = L.r
    i = L.basis
    dual = mr.matmul(i.T, bilinear(f), d)
    try:
        j = np.column_stack([mr.solve_linear(dual, e, d) for e in mr.identity(r)]) \
            if r else np.zeros((f.m, 0), dtype=np.int64)
    except NoSolution as exc:
        raise NoSplitting("i^T Psi is not surjective") from exc
    S = pullback(f, j)
    k = _correction(S, f)
    jp = (j + mr.matmul(i, k, d)) % d
    Phi = np.hstack([i, jp]).reshape(f.m, f.m)
    H, _ = hyperbolic(r, f.epsilon, f.kind, d)
    if not _verify_iso(f, Phi, H):
        raise InvariantError("constructed hyperbolic isometry failed its check")
    return Phi


def are_complementary(F: Lagrangian, G: Lagrangian, f: EpsForm) -> bool:
    d = f.d
    if F.m != f.m or G.m != f.m:
        return False
    both = np.hstack([F.basis, G.basis])
    if not _full_span(both, d):
        return False
    return not mr.kernel(both, d).any()


def trivial_formation_iso(fm: Formation) -> np.ndarray:
    """An isomorphism of formations ``fm -> (H_eps(F); F, F*)``.

    With ``h = [F | G]`` the form pulls back to one whose only surviving block
    is ``e = F^T Psi G``; ``diag(1, e) @ h^{-1}`` carries it to the hyperbolic
    form, ``F`` to the first summand and ``G`` to the second.
    """
    f, F, G = fm.form, fm.F, fm.G
    d = f.d
    if not are_complementary(F, G, f):
        raise NotComplementary("F and G are not complementary")
    r = F.r
    h = np.hstack([F.basis, G.basis])
    e = mr.matmul(mr.matmul(F.basis.T, bilinear(f), d), G.basis, d)
    u = mr.identity(2 * r)
    u[r:, r:] = e
    Phi = mr.matmul(u, mr.inverse(h, d), d)
    H, L = hyperbolic(r, f.epsilon, f.kind, d)
    Lstar = Lagrangian(np.vstack([np.zeros((r, r), dtype=np.int64), mr.identity(r)]), d)
    ok = (_verify_iso(H, Phi, f)
          and Lagrangian(mr.matmul(Phi, F.basis, d), d) == L
          and Lagrangian(mr.matmul(Phi, G.basis, d), d) == Lstar)
    if not ok:
        raise InvariantError("formation isomorphism failed its check")
    return Phi


def _graph_params(r: int, eps: int, kind: str, d: int):
    """Matrices ``S`` with ``{(S y, y)}`` a Lagrangian complement of ``L`` in ``H_eps``."""
    iu = list(zip(*np.triu_indices(r)))
    for vals in itertools.product(range(d), repeat=len(iu)):
        yield _graph_from_values(vals, iu, r, eps, kind, d)


def _graph_from_values(vals, iu, r, eps, kind, d):
    S = np.zeros((r, r), dtype=np.int64)
    for (a, b), v in zip(iu, vals):
        S[a, b] = v
        if a != b:
            S[b, a] = (-eps * v) % d
    return S


def _graph_ok(S, r, eps, kind, d) -> bool:
    if not np.array_equal(S, (-eps * S.T) % d):
        return False
    if kind == "quadratic":
        return not normalize_quadratic(S.T, eps, d).any()
    return True


def count_graph_candidates(r: int, d: int) -> int:
    return d ** (r * (r + 1) // 2)


def find_common_complement(fm: Formation, budget: int = 100_000, seed: int = 0,
                           shard: tuple[int, int] = (0, 1)) -> Lagrangian:
    """Search for a Lagrangian complementary to both ``F`` and ``G``.

    Every complement of ``F`` is the image of a graph ``{(S y, y)}`` under an
    isometry from the hyperbolic form sending the standard Lagrangian to
    ``F``, so enumerating the graph parameters in lexicographic order is an
    exhaustive search.  If there are more candidates than ``budget``, random
    candidates are drawn from ``seed`` instead and failure raises
    ``BudgetExceeded``.  ``shard = (i, k)`` keeps every k-th candidate starting
    at i, for splitting an exhaustive run across workers.
    """
    f, F, G = fm.form, fm.F, fm.G
    d, eps, kind = f.d, f.epsilon, f.kind
    r = F.r
    Phi = lagrangian_to_hyperbolic(f, F)
    total = count_graph_candidates(r, d)

    def candidate(S):
        if not _graph_ok(S, r, eps, kind, d):
            return None
        Lp = Lagrangian(mr.matmul(Phi, np.vstack([S, mr.identity(r)]), d), d)
        if are_complementary(Lp, F, f) and are_complementary(Lp, G, f):
            if not is_lagrangian(Lp, f):
                raise InvariantError("graph candidate is not a Lagrangian")
            return Lp
        return None

    if total <= budget:
        for idx, S in enumerate(_graph_params(r, eps, kind, d)):
            if idx % shard[1] != shard[0]:
                continue
            hit = candidate(S)
            if hit is not None:
                return hit
        raise NotFound("no common complement exists among all candidates", exhaustive=True)
    rng = np.random.default_rng(seed)
    iu = list(zip(*np.triu_indices(r)))
    for _ in range(budget):
        vals = rng.integers(0, d, size=len(iu))
        hit = candidate(_graph_from_values(vals, iu, r, eps, kind, d))
        if hit is not None:
            return hit
    raise BudgetExceeded(f"{budget} random candidates out of {total} tried")


def elementary_criterion(fm: Formation, Fhat: Lagrangian) -> bool:
    """Is the projection of ``G`` to ``F`` along ``Fhat`` a free direct summand?"""
    f, F, G = fm.form, fm.F, fm.G
    d = f.d
    if not are_complementary(F, Fhat, f):
        raise NotAComplement("Fhat is not a Lagrangian complement of F")
    basis = np.hstack([F.basis, Fhat.basis])
    coords = mr.matmul(mr.inverse(basis, d), G.basis, d)
    pi_G = coords[: F.r]
    return mr.is_free_summand(pi_G.T, d)
