"""Exact arithmetic and canonical linear algebra over Z_d.

Matrices are plain ``numpy`` int64 arrays with entries in ``[0, d)``; the
modulus travels alongside as an ``int``.  ``ModMatrix`` is the carrier used
for JSON I/O and for values that need to remember their own modulus.

Anything rank-like (inverses, idempotent ranks) is computed one prime-power
factor at a time and glued back together with the Chinese remainder theorem,
because Z_{p^k} is local and Z_d in general is not.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd

import numpy as np

from .errors import NoSolution, NotAUnit, NotIdempotent, SchemaError, ShapeMismatch, Singular

MAX_MODULUS = 2**31 - 1
_FLOAT_EXACT = 2 ** 53
_INT64_SAFE = 2**62


@lru_cache(maxsize=None)
def factorize(d: int) -> tuple[tuple[int, int], ...]:
    """Prime-power factorization of ``d`` as ``((p, k), ...)`` with p increasing."""
    if d < 1:
        raise ValueError(f"modulus must be positive, got {d}")
    out = []
    n = d
    p = 2
    while p * p <= n:
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            out.append((p, k))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


@dataclass(frozen=True)
class RingSpec:
    d: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.d < 2 or self.d > MAX_MODULUS:
            raise ValueError(f"modulus out of range: {self.d}")
        prod = 1
        for p, k in self.factors:
            prod *= p**k
        if prod != self.d or factorize(self.d) != tuple(self.factors):
            raise ValueError(f"bad factorization {self.factors} of {self.d}")

    @classmethod
    def of(cls, d: int) -> "RingSpec":
        return cls(d, factorize(d))

    @property
    def moduli(self) -> list[int]:
        return [p**k for p, k in self.factors]


def ring(d) -> RingSpec:
    return d if isinstance(d, RingSpec) else RingSpec.of(int(d))


def crt_split(x: int, ring_: RingSpec | int) -> list[int]:
    R = ring(ring_)
    if not 0 <= x < R.d:
        raise ValueError(f"{x} is not a reduced residue mod {R.d}")
    return [x % q for q in R.moduli]


@lru_cache(maxsize=None)
def _crt_idempotents(d: int) -> tuple[int, ...]:
    # e_q = 1 mod q and 0 mod every other factor
    out = []
    for q in RingSpec.of(d).moduli:
        c = d // q
        out.append(c * pow(c, -1, q) % d if q != d else 1)
    return tuple(out)


def crt_join(residues, ring_: RingSpec | int) -> int:
    R = ring(ring_)
    if len(residues) != len(R.moduli):
        raise ShapeMismatch("one residue per factor expected")
    return sum(int(x) * e for x, e in zip(residues, _crt_idempotents(R.d))) % R.d


def crt_join_arrays(arrays, d: int) -> np.ndarray:
    """CRT-join equally shaped integer arrays, one per prime-power factor of ``d``."""
    out = np.zeros_like(np.asarray(arrays[0], dtype=np.int64))
    for arr, e in zip(arrays, _crt_idempotents(d)):
        out = (out + (np.asarray(arr, dtype=np.int64) % d) * e % d) % d
    return out


def mod_inverse(x: int, d: int) -> int:
    try:
        return pow(int(x) % d, -1, d)
    except ValueError:
        raise NotAUnit(f"{x} is not a unit mod {d}") from None


def is_unit(x: int, d: int) -> bool:
    return gcd(int(x) % d, d) == 1


def reduce(a, d: int) -> np.ndarray:
    return np.asarray(a, dtype=np.int64) % d


def matmul(A, B, d: int) -> np.ndarray:
    """``A @ B mod d`` without int64 overflow."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    inner = A.shape[-1] if A.ndim else 1
    bound = (d - 1) ** 2 * max(inner, 1)
    if bound < _FLOAT_EXACT and A.size * B.size > 4096:
        # products of reduced entries sum exactly in double precision, and BLAS is fast
        prod = (A % d).astype(np.float64) @ (B % d).astype(np.float64)
        return np.rint(prod).astype(np.int64) % d
    if bound < _INT64_SAFE:
        return ((A % d) @ (B % d)) % d
    out = (A.astype(object) @ B.astype(object)) % d
    return out.astype(np.int64)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class ModMatrix:
    """A matrix over Z_d with entries reduced into ``[0, d)``."""

    d: int
    a: np.ndarray

    def __post_init__(self):
        arr = np.array(self.a, dtype=np.int64, ndmin=2) % self.d
        if np.asarray(self.a).size == 0:
            arr = np.zeros(np.shape(self.a) if np.ndim(self.a) == 2 else (0, 0), dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "a", arr)

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    def __eq__(self, other):
        return (isinstance(other, ModMatrix) and self.d == other.d
                and self.a.shape == other.a.shape and bool(np.array_equal(self.a, other.a)))

    def __matmul__(self, other: "ModMatrix") -> "ModMatrix":
        if other.d != self.d:
            raise ShapeMismatch("moduli differ")
        return ModMatrix(self.d, matmul(self.a, other.a, self.d))

    def __repr__(self):
        return f"ModMatrix(d={self.d}, {self.a.tolist()})"

    def to_json(self) -> dict:
        return {"d": self.d, "rows": self.rows, "cols": self.cols,
                "entries": [int(x) for x in self.a.ravel()]}

    @classmethod
    def from_json(cls, obj: dict) -> "ModMatrix":
        try:
            d, rows, cols, entries = int(obj["d"]), int(obj["rows"]), int(obj["cols"]), obj["entries"]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad ModMatrix JSON: {exc}") from None
        if len(entries) != rows * cols:
            raise SchemaError(f"ModMatrix: {len(entries)} entries for {rows}x{cols}")
        if any((not isinstance(x, int)) or x < 0 or x >= d for x in entries):
            raise SchemaError("ModMatrix entries must be integers in [0, d)")
        return cls(d, np.array(entries, dtype=np.int64).reshape(rows, cols))


def _unwrap(M, d):
    if isinstance(M, ModMatrix):
        return np.array(M.a), M.d
    if d is None:
        raise TypeError("modulus required for a bare array")
    return np.array(M, dtype=np.int64, ndmin=2) % d, d


# -- Howell form -------------------------------------------------------------


def _gcdex(a: int, b: int):
    """Return ``(g, s, t, u, v)`` with ``s*a + t*b = g``, ``u*a + v*b = 0``, ``s*v - t*u = 1``."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    g = old_r
    if g == 0:
        return 0, 1, 0, 0, 1
    return g, old_s, old_t, -b // g, a // g


def _normalizer(a: int, d: int) -> int:
    """A unit ``w`` with ``a*w = gcd(a, d) (mod d)``."""
    g = gcd(a, d)
    n = d // g
    w0 = pow(a // g, -1, n) if n > 1 else 0
    w = w0
    while gcd(w, d) != 1:
        w += n
    return w % d


def howell_form(M, d: int | None = None):
    """Howell normal form ``H`` of the row span of ``M`` and a transform ``U``.

    ``U`` is square and invertible over Z_d with ``U @ pad(M) == H`` where
    ``pad(M)`` is ``M`` followed by zero rows.  Extra rows are only appended
    when the span needs more generators than ``M`` has rows (e.g. ``[[2, 1]]``
    over Z_4 has Howell form ``[[2, 1], [0, 2]]``); otherwise ``H`` and ``U``
    keep the shape of ``M``.  Nonzero rows of ``H`` come first, with pivots
    dividing ``d`` and entries above each pivot reduced below it.

    Returns ``(H, U)`` as ``ModMatrix`` when given a ``ModMatrix``, else arrays.
    """
    wrapped = isinstance(M, ModMatrix)
    A, d = _unwrap(M, d)
    n, m = A.shape
    U = identity(n)
    A = [row for row in A]
    U = [row for row in U]

    def comb(x, y, s, t):
        return (s % d * x % d + t % d * y % d) % d

    r = 0
    for c in range(m):
        if r >= len(A):
            break
        for i in range(r + 1, len(A)):
            if A[i][c] == 0:
                continue
            g, s, t, u, v = _gcdex(int(A[r][c]), int(A[i][c]))
            A[r], A[i] = comb(A[r], A[i], s, t), comb(A[r], A[i], u, v)
            U[r], U[i] = comb(U[r], U[i], s, t), comb(U[r], U[i], u, v)
        piv = int(A[r][c])
        if piv == 0:
            continue
        w = _normalizer(piv, d)
        if w != 1:
            A[r] = A[r] * w % d
            U[r] = U[r] * w % d
        g = int(A[r][c])
        for k in range(r):
            q = int(A[k][c]) // g
            if q:
                A[k] = (A[k] - q * A[r]) % d
                U[k] = (U[k] - q * U[r]) % d
        ann = d // g
        if ann != d:
            new = A[r] * ann % d
            if new.any():
                z = next((i for i in range(r + 1, len(A)) if not A[i].any()), None)
                if z is None:
                    U = [np.append(row, 0) for row in U]
                    e = np.zeros(len(U) + 1, dtype=np.int64)
                    e[-1] = 1
                    U.append(e)
                    A.append(np.zeros(m, dtype=np.int64))
                    z = len(A) - 1
                A[z] = new
                U[z] = (U[z] + ann * U[r]) % d
        r += 1
    H = np.array(A, dtype=np.int64).reshape(len(A), m)
    Um = np.array(U, dtype=np.int64).reshape(len(U), len(U))
    if wrapped:
        return ModMatrix(d, H), ModMatrix(d, Um)
    return H, Um


def pad_rows(M: np.ndarray, rows: int) -> np.ndarray:
    M = np.asarray(M, dtype=np.int64)
    if M.shape[0] >= rows:
        return M
    return np.vstack([M, np.zeros((rows - M.shape[0], M.shape[1]), dtype=np.int64)])


def howell_basis(M, d: int) -> np.ndarray:
    """Nonzero rows of the Howell form: the canonical generating set of the row span."""
    A = np.asarray(M, dtype=np.int64)
    if A.size == 0:
        return np.zeros((0, A.shape[1] if A.ndim == 2 else 0), dtype=np.int64)
    H, _ = howell_form(A, d)
    return H[H.any(axis=1)]


def same_row_span(M1, M2, d: int) -> bool:
    h1, h2 = howell_basis(M1, d), howell_basis(M2, d)
    return h1.shape == h2.shape and bool(np.array_equal(h1, h2))


def pivots(H: np.ndarray) -> list[tuple[int, int]]:
    """``(column, pivot value)`` for each nonzero row of an echelon matrix."""
    out = []
    for row in H:
        nz = np.flatnonzero(row)
        if nz.size:
            out.append((int(nz[0]), int(row[nz[0]])))
    return out


def _free_basis_local(M: np.ndarray, q: int, p: int) -> np.ndarray | None:
    """Canonical basis rows of the span of ``M`` over Z_q (q = p^k), or None if not free."""
    rows = [r % q for r in M]
    chosen = []
    while rows:
        hit = next(((i, int(c)) for i, r in enumerate(rows)
                    for c in np.flatnonzero(r % p)), None)
        if hit is None:
            break
        i, c = hit
        piv = rows.pop(i)
        piv = piv * pow(int(piv[c]), -1, q) % q
        rows = [(r - int(r[c]) * piv) % q for r in rows]
        chosen.append(piv)
    if any(r.any() for r in rows):
        return None
    if not chosen:
        return np.zeros((0, M.shape[1]), dtype=np.int64)
    B = np.array(chosen, dtype=np.int64)
    # normalise: the pivot columns of the reduction mod p are determined by the
    # span, and B restricted to them is invertible
    cols = [c for c, _ in pivots(howell_basis(B % p, p))]
    return matmul(inverse(B[:, cols], q), B, q)


def free_basis(M, d: int) -> np.ndarray:
    """Canonical basis (as rows) of the row span of ``M`` when it is a free direct summand.

    Howell pivots are not the right test: ``(2, 1)`` spans a free summand of
    Z_4^2 although its Howell form is ``[[2, 1], [0, 2]]``.  Instead, per
    prime-power factor, rows are eliminated on unit pivots; the span is a
    free summand exactly when nothing non-unit is left over.  The basis is
    normalised to the identity on the pivot columns of its reduction mod p,
    and per-factor bases are CRT-joined row by row.  Raises ``ValueError``
    when the span is not free of constant rank.
    """
    M = np.asarray(M, dtype=np.int64)
    if M.ndim != 2:
        M = M.reshape(0, 0)
    parts = []
    for (p, _), q in zip(RingSpec.of(d).factors, RingSpec.of(d).moduli):
        B = _free_basis_local(M, q, p)
        if B is None:
            raise ValueError(f"span is not a free summand mod {q}")
        parts.append(B)
    ranks = {b.shape[0] for b in parts}
    if len(ranks) != 1:
        raise ValueError("span has different ranks over different factors")
    if ranks == {0}:
        return np.zeros((0, M.shape[1]), dtype=np.int64)
    return crt_join_arrays(parts, d)


def is_free_summand(M, d: int) -> bool:
    """True iff the row span of ``M`` is a free direct summand of Z_d^cols."""
    try:
        free_basis(M, d)
    except ValueError:
        return False
    return True


def kernel(M, d: int) -> np.ndarray:
    """Generators (as columns) of ``{x : M x = 0 mod d}``."""
    M = np.asarray(M, dtype=np.int64) % d
    r, c = M.shape
    K = np.hstack([M.T, identity(c)])
    H, _ = howell_form(K, d)
    rows = [h[r:] for h in H if h.any() and not h[:r].any()]
    if not rows:
        return np.zeros((c, 0), dtype=np.int64)
    return np.array(rows, dtype=np.int64).T


def _in_span_reduce(H: np.ndarray, v: np.ndarray, upto: int, d: int):
    """Greedily reduce ``v`` by Howell rows whose pivot lies before column ``upto``.

    Returns the reduced vector and the coefficients used.
    """
    v = v.copy() % d
    coeffs = np.zeros(H.shape[0], dtype=np.int64)
    for i, row in enumerate(H):
        nz = np.flatnonzero(row)
        if not nz.size or nz[0] >= upto:
            continue
        pc = nz[0]
        g = int(row[pc])
        e = int(v[pc])
        if e % g:
            break
        q = e // g
        if q:
            v = (v - q * row) % d
            coeffs[i] = q
    return v, coeffs


def _solve_local(M: np.ndarray, b: np.ndarray, q: int):
    r, c = M.shape
    K = np.hstack([M.T % q, identity(c)])
    H, _ = howell_form(K, q)
    v = np.concatenate([b % q, np.zeros(c, dtype=np.int64)])
    v, _ = _in_span_reduce(H, v, r, q)
    if v[:r].any():
        return None
    return (-v[r:]) % q


def _no_solution_certificate(M: np.ndarray, b: np.ndarray, q: int) -> np.ndarray | None:
    r, c = M.shape
    K = np.hstack([M % q, (b % q).reshape(r, 1), identity(r)])
    H, _ = howell_form(K, q)
    for h in H:
        if not h[:c].any() and h[c] % q:
            return h[c + 1:] % q
    return None


def solve_linear(M, b, d: int | None = None) -> np.ndarray:
    """A solution ``x`` of ``M x = b`` over Z_d.

    Solved independently over each prime-power factor and CRT-joined.  Raises
    ``NoSolution`` carrying a certificate ``y`` with ``y M = 0``, ``y b != 0``.
    """
    A, d = _unwrap(M, d)
    b = np.asarray(b, dtype=np.int64).ravel() % d
    if A.shape[0] != b.size:
        raise ShapeMismatch(f"matrix has {A.shape[0]} rows, right side has {b.size}")
    parts = []
    for q, e in zip(RingSpec.of(d).moduli, _crt_idempotents(d)):
        x = _solve_local(A, b, q)
        if x is None:
            y = _no_solution_certificate(A, b, q)
            cert = None if y is None else (y * e) % d
            raise NoSolution(f"system has no solution mod {q}", cert)
        parts.append(x)
    return crt_join_arrays(parts, d)


def _inverse_local(M: np.ndarray, q: int) -> np.ndarray:
    n = M.shape[0]
    A = np.hstack([M % q, identity(n)])
    for c in range(n):
        piv = next((i for i in range(c, n) if gcd(int(A[i, c]), q) == 1), None)
        if piv is None:
            raise Singular(f"matrix is singular mod {q}")
        if piv != c:
            A[[c, piv]] = A[[piv, c]]
        A[c] = A[c] * pow(int(A[c, c]), -1, q) % q
        col = A[:, c].copy()
        col[c] = 0
        nz = np.flatnonzero(col)
        if nz.size:
            A[nz] = (A[nz] - np.outer(col[nz], A[c]) % q) % q
    return A[:, n:]


def inverse(M, d: int | None = None):
    """Matrix inverse over Z_d; raises ``Singular`` if the determinant is not a unit."""
    wrapped = isinstance(M, ModMatrix)
    A, d = _unwrap(M, d)
    if A.shape[0] != A.shape[1]:
        raise ShapeMismatch("inverse of a non-square matrix")
    if A.shape[0] == 0:
        out = A.copy()
    else:
        out = crt_join_arrays([_inverse_local(A, q) for q in RingSpec.of(d).moduli], d)
    return ModMatrix(d, out) if wrapped else out


def is_invertible(M, d: int) -> bool:
    try:
        inverse(M, d)
    except Singular:
        return False
    return True


def idempotent_rank(p, factor: int) -> int:
    """Rank of the (free) image of an idempotent over the local ring Z_{p^k}."""
    A, _ = _unwrap(p, factor) if not isinstance(p, ModMatrix) else (np.array(p.a), p.d)
    A = A % factor
    if A.shape[0] != A.shape[1]:
        raise ShapeMismatch("idempotent must be square")
    if not np.array_equal(matmul(A, A, factor), A):
        raise NotIdempotent(f"p^2 != p mod {factor}")
    f = factorize(factor)
    if len(f) > 1:
        raise ValueError(f"{factor} is not a prime power")
    # the image is projective, hence free, and its rank survives reduction mod p
    prime = f[0][0] if f else 1
    return len(pivots(howell_basis(A % prime, prime))) if prime > 1 else 0
