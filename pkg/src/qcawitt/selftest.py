"""The property suite behind ``qca selftest`` and the acceptance tests.

Each ``check_*`` function runs one family of randomized checks against an
independent oracle (dense matrices, brute-force enumeration, recomposition
through a different code path) and returns a ``CheckResult``.  ``scale``
multiplies every instance count, so ``scale=1`` is the full suite.
"""
from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import classify as K
from . import forms
from . import generators as G
from . import modring as mr
from . import pauli
from . import qca as Q
from . import symplectic as sp


@dataclass
class CheckResult:
    name: str
    passed: bool
    instances: int
    seconds: float = 0.0
    failures: list = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        msg = f"{status} {self.name}: {self.instances} instances in {self.seconds:.2f}s"
        if self.failures:
            msg += f"; first failure: {self.failures[0]}"
        return msg


def _count(n, scale):
    return max(1, int(round(n * scale)))


class _Recorder:
    def __init__(self, name):
        self.name = name
        self.n = 0
        self.failures = []
        self.t0 = time.perf_counter()

    def __call__(self, ok, what=""):
        self.n += 1
        if not ok:
            self.failures.append(what)

    def result(self, limit=None) -> CheckResult:
        dt = time.perf_counter() - self.t0
        ok = not self.failures and (limit is None or dt < limit)
        fails = list(self.failures)
        if limit is not None and dt >= limit:
            fails.append(f"time {dt:.1f}s over the {limit}s budget")
        return CheckResult(self.name, ok, self.n, dt, fails)


# -- 1: Pauli gate tables against dense unitaries -----------------------------------------


def _elementary(n, d):
    """Every H, P and CZ gate on ``n`` qudits, with every power."""
    for q in range(n):
        for e in range(1, 4):
            yield pauli.hadamard_table(n, q, d, e), pauli.dense_unitary("H", n, d, [q], e)
        for e in range(1, d):
            yield pauli.phase_table(n, q, d, e), pauli.dense_unitary("P", n, d, [q], e)
    for a, b in itertools.permutations(range(n), 2):
        for e in range(1, d):
            yield (pauli.cz_table(n, a, b, d, e),
                   pauli.dense_unitary("CZ", n, d, [a, b], e))


def _random_gate(n, d, rng):
    kind = "CZ" if n > 1 and rng.random() < 0.4 else str(rng.choice(["H", "P"]))
    if kind == "CZ":
        a, b = (int(x) for x in rng.choice(n, 2, replace=False))
        e = int(rng.integers(1, d))
        return pauli.cz_table(n, a, b, d, e), pauli.dense_unitary("CZ", n, d, [a, b], e)
    q = int(rng.integers(n))
    if kind == "H":
        e = int(rng.integers(1, 4))
        return pauli.hadamard_table(n, q, d, e), pauli.dense_unitary("H", n, d, [q], e)
    e = int(rng.integers(1, d))
    return pauli.phase_table(n, q, d, e), pauli.dense_unitary("P", n, d, [q], e)


def check_dense_oracle(seed=0, scale=1.0, dims=(2, 3, 4, 5), words=200) -> CheckResult:
    rec = _Recorder("pauli tables vs dense conjugation")
    rng = np.random.default_rng(seed)
    for d in dims:
        sizes = [n for n in (1, 2, 3) if d ** n <= pauli.DENSE_LIMIT]
        for n in sizes:
            for table, U in _elementary(n, d):
                rec(pauli.dense_oracle_check(table, U), f"elementary gate d={d} n={n}")
        for w in range(_count(words, scale)):
            n = int(rng.choice(sizes))
            table = pauli.GateTable.identity(n, d)
            U = np.eye(d ** n, dtype=complex)
            for _ in range(int(rng.integers(1, 9))):
                t, V = _random_gate(n, d, rng)
                table = table.then(t)
                U = U @ V
            rec(pauli.dense_oracle_check(table, U), f"word {w} d={d} n={n}")
    return rec.result(limit=10.0 if scale >= 1 else None)


# -- 2: commutation law ----------------------------------------------------------------------


def _random_pauli(n, d, rng):
    m = pauli.PhaseSpec(d).m
    return pauli.PauliOp(d, int(rng.integers(m)), rng.integers(0, d, 2 * n))


def check_commutation(seed=0, scale=1.0, dims=(2, 3, 4, 6, 8, 9), pairs=10_000) -> CheckResult:
    rec = _Recorder("Pauli commutation law")
    rng = np.random.default_rng(seed)
    for d in dims:
        ph = pauli.PhaseSpec(d)
        for _ in range(_count(pairs, scale)):
            n = int(rng.integers(1, 7))
            p, q = _random_pauli(n, d, rng), _random_pauli(n, d, rng)
            w = sp.omega(p.vec, q.vec, d)
            lhs = q * p
            rhs = p * q
            ok = (np.array_equal(lhs.vec, rhs.vec)
                  and lhs.phase == (rhs.phase + ph.twist(w)) % ph.m)
            rec(ok, f"d={d} p={p.to_json()} q={q.to_json()}")
    return rec.result()


# -- 3: transvection decompositions -------------------------------------------------------------


def _transvection_oracle(u, c, q):
    """``I + c u (J u)^T`` with ``J`` written out directly."""
    n = len(u)
    Jm = np.zeros((n, n), dtype=np.int64)
    for i in range(0, n, 2):
        Jm[i, i + 1], Jm[i + 1, i] = 1, -1
    u = np.asarray(u, dtype=np.int64) % q
    return (np.eye(n, dtype=np.int64) + c * np.outer(u, Jm @ u)) % q


def check_transvections(seed=0, scale=1.0, factors=(2, 3, 4, 5, 8, 9), count=500) -> CheckResult:
    rec = _Recorder("transvection decomposition")
    rng = np.random.default_rng(seed)
    for q in factors:
        for t in range(_count(count, scale)):
            N = int(rng.integers(1, 5))
            S = G.random_gate_symplectic(N, q, rng, layers=int(rng.integers(1, 7)))
            steps = sp.decompose_transvections(S, q)
            R = np.eye(2 * N, dtype=np.int64)
            for u, c in steps:
                R = R @ _transvection_oracle(u, c, q) % q
            rec(np.array_equal(R, S % q) and len(steps) <= 4 * N, f"q={q} instance {t}")
    return rec.result(limit=60.0 if scale >= 1 else None)


# -- 4: symmetric matrices to gates -----------------------------------------------------------------


def check_symmetric_gates(seed=0, scale=1.0, dims=(2, 3, 5, 9), count=200, cells=32) -> CheckResult:
    rec = _Recorder("symmetric_to_gates")
    rng = np.random.default_rng(seed)
    space = Q.line(cells)
    for d in dims:
        reg = Q.register_for(space, d)
        N = reg.N
        for t in range(_count(count, scale)):
            C = G.random_banded_symmetric(N, d, int(rng.integers(0, 4)), rng)
            alpha = Q.from_gates(K.symmetric_to_gates(C, space, reg), space, reg)
            A, B, Cb, D = K.xz(alpha)
            ok = (np.array_equal(A, np.eye(N, dtype=np.int64)) and not B.any()
                  and np.array_equal(Cb, C % d) and np.array_equal(D, np.eye(N, dtype=np.int64)))
            rec(ok, f"d={d} instance {t}")
    return rec.result()


# -- 5: triviality certificates --------------------------------------------------------------------


def check_certify(seed=0, scale=1.0, dims=(2, 3, 4, 5, 9, 6), count=200, cells=64) -> CheckResult:
    rec = _Recorder("certify_trivial factorization")
    rng = np.random.default_rng(seed)
    space = Q.line(cells)
    for t in range(_count(count, scale)):
        d = dims[t % len(dims)]
        reg = Q.register_for(space, d, int(rng.integers(1, 3)))
        alpha = G.random_trivial_qca(space, reg, rng)
        if alpha.radius > 3:
            rec(False, f"generator produced radius {alpha.radius}")
            continue
        t0 = time.perf_counter()
        cert = K.certify_trivial(alpha)
        dt = time.perf_counter() - t0
        rec(cert.check() and dt < 1.0, f"instance {t} d={d} ({dt:.2f}s)")
    return rec.result()


# -- 6: delooping index ----------------------------------------------------------------------------


def _ring_qca(space, reg, rng, s):
    """Circuit, separated layer and a shift by ``s``; index should be ``2 s k``."""
    circ = Q.from_gates(G.random_script(space, reg, rng, 1), space, reg)
    sep = G.random_separated(space, reg, rng)
    return Q.compose(Q.compose(circ, sep), Q.shift(space, reg, s))


def _bulk_line_circuit(L, reg, rng, margin):
    space = Q.line(L)
    script = G.random_script(space, reg, rng, 2)
    keep = lambda g: all(margin <= int(c) < L - margin for c, _ in g.targets)
    return Q.from_gates(Q.GateScript(tuple(tuple(g for g in layer if keep(g))
                                           for layer in script.layers)), space, reg)


def check_delooping(seed=0, scale=1.0, pairs=200) -> CheckResult:
    rec = _Recorder("delooping index")
    rng = np.random.default_rng(seed)
    zero = lambda idx: all(v == 0 for v in idx.values())
    # identity
    for d in (2, 3, 4, 9, 6):
        for sp_ in (Q.line(32), Q.ring(32)):
            reg = Q.register_for(sp_, d)
            ident = Q.identity(sp_, reg)
            rec(all(zero(K.delooping_index(ident, c)) for c in range(1, 31)), f"identity d={d}")
    # shifts
    for q in (2, 3, 4, 5, 8, 9):
        for s in (1, 2, 3):
            for k in (1, 2):
                space = Q.ring(40)
                reg = Q.register_for(space, q, k)
                sh = Q.shift(space, reg, s)
                rec(K.delooping_index(sh, 7) == {q: 2 * s * k}, f"shift q={q} s={s} k={k}")
                back = Q.shift(space, reg, -s)
                rec(K.delooping_index(back, 7) == {q: -2 * s * k}, f"shift q={q} s=-{s} k={k}")
    # circuits on a line, every legal cut
    for t in range(_count(20, scale)):
        d = int(rng.choice([2, 3, 4, 5, 6, 9]))
        reg = Q.register_for(Q.line(40), d)
        c = _bulk_line_circuit(40, reg, rng, 8)
        r = int(np.ceil(Q.tight_radius(c)))
        cuts = range(2 * r, 40 - 2 * r + 1)
        rec(all(zero(K.delooping_index(c, m)) for m in cuts), f"line circuit {t} d={d}")
    # additivity, inverse, expected value on composed pairs
    space = Q.ring(64)
    samples = []
    for t in range(_count(pairs, scale)):
        d = int(rng.choice([2, 3, 4, 5, 6, 9]))
        k = int(rng.integers(1, 3)) if t % 4 == 0 else 1
        reg = Q.register_for(space, d, k)
        s1, s2 = (int(x) for x in rng.integers(-1, 2, 2))
        a, b = _ring_qca(space, reg, rng, s1), _ring_qca(space, reg, rng, s2)
        cut = int(rng.integers(64))
        ia, ib = K.delooping_index(a, cut), K.delooping_index(b, cut)
        iab = K.delooping_index(Q.compose(a, b), cut)
        ok = all(iab[q] == ia[q] + ib[q] for q in ia)
        ok &= all(v == 2 * s1 * k for v in ia.values())
        rec(ok, f"pair {t} d={d} s=({s1},{s2}): {ia} + {ib} vs {iab}")
        if t < 5:
            inv = K.delooping_index(Q.inverse(a), cut)
            rec(all(inv[q] == -ia[q] for q in ia), f"inverse {t}")
        if len(samples) < _count(10, scale):
            samples.append((a, ia))
    # every legal cut and band widths 2r, 3r, 4r
    for t, (a, ia) in enumerate(samples):
        r = int(np.ceil(Q.tight_radius(a)))
        rec(all(K.delooping_index(a, m) == ia for m in range(64)), f"cut invariance {t}")
        for w in (2 * r, 3 * r, 4 * r):
            rec(K.delooping_index(a, 5, width=w) == ia, f"band width {w} sample {t}")
    return rec.result()


# -- 7: Lagrangians of the rank-one hyperbolic module ------------------------------------------------


def _span(vectors, d):
    vectors = [np.asarray(v) % d for v in vectors]
    out = set()
    for coeffs in itertools.product(range(d), repeat=len(vectors)):
        v = sum((c * u for c, u in zip(coeffs, vectors)), np.zeros(2, dtype=np.int64)) % d
        out.add(tuple(int(x) for x in v))
    return frozenset(out)


def _brute_lagrangians(f: forms.EpsForm):
    """Submodules of ``Z_d^2`` equal to their own orthogonal, with vanishing refinement."""
    d = f.d
    B = forms.bilinear(f)
    allv = [np.array(v) for v in itertools.product(range(d), repeat=2)]
    subs = {_span([u, v], d) for u in allv for v in allv}
    found = set()
    for S in subs:
        perp = frozenset(tuple(int(x) for x in v) for v in allv
                         if all((v @ B @ np.array(s)) % d == 0 for s in S))
        if perp != S:
            continue
        if f.kind == "quadratic":
            # the refinement v^T psi v lives in Z_d / (1 - eps) Z_d
            g = np.gcd(1 - f.epsilon, d)
            if any((np.array(s) @ f.psi @ np.array(s)) % g for s in S):
                continue
        found.add(S)
    return found


def check_lagrangians(seed=0, scale=1.0, dims=(2, 3)) -> CheckResult:
    rec = _Recorder("Lagrangians of H_-1(Z_d)")
    for d in dims:
        for kind in ("symmetric", "quadratic"):
            f, _ = forms.hyperbolic(1, -1, kind, d)
            truth = _brute_lagrangians(f)
            if kind == "symmetric":
                rec(len(truth) == d + 1, f"brute force found {len(truth)} for d={d}")
            lib = {}
            for v in itertools.product(range(d), repeat=2):
                if not any(v):
                    continue
                L = forms.Lagrangian(np.array(v).reshape(2, 1), d)
                if forms.is_lagrangian(L, f):
                    lib[_span([v], d)] = L
            rec(set(lib) == truth, f"d={d} {kind}: library {len(lib)} vs brute {len(truth)}")
            B = forms.bilinear(f)
            Hf, _ = forms.hyperbolic(1, -1, kind, d)
            BH = forms.bilinear(Hf)
            e1, e2 = _span([[1, 0]], d), _span([[0, 1]], d)
            for SF, F in lib.items():
                Phi = forms.lagrangian_to_hyperbolic(f, F)
                ok = np.array_equal(Phi.T @ B @ Phi % d, BH) and _span([Phi[:, 0]], d) == SF
                rec(ok, f"lagrangian_to_hyperbolic d={d} {kind} {sorted(SF)}")
                for SG, Gl in lib.items():
                    comp = len(SF & SG) == 1 and len(_span([Phi[:, 0], Gl.basis[:, 0]], d)) == d * d
                    rec(forms.are_complementary(F, Gl, f) == comp, f"complementarity d={d}")
                    if not comp:
                        continue
                    Psi = forms.trivial_formation_iso(forms.Formation(f, F, Gl))
                    img_F = _span([Psi @ F.basis[:, 0]], d)
                    img_G = _span([Psi @ Gl.basis[:, 0]], d)
                    ok = (np.array_equal(Psi.T @ BH @ Psi % d, B % d)
                          and img_F == e1 and img_G == e2)
                    rec(ok, f"trivial_formation_iso d={d} {kind}")
    return rec.result()


# -- 8: same-formation equivalence -------------------------------------------------------------------


def _upper_factor(space, reg, rng):
    """``[[A, B], [0, A^-T]]`` built from gates: Hadamard-conjugated CZ/phase, then separated."""
    d, N = reg.d, reg.N
    T = G.random_banded_symmetric(N, d, 1, rng)
    up = Q.from_gates(K.upper_to_gates(T, space, reg), space, reg)
    return Q.compose(up, G.random_separated(space, reg, rng))


def check_equivalence(seed=0, scale=1.0, dims=(2, 3, 4, 5, 6, 9), count=100, cells=24) -> CheckResult:
    rec = _Recorder("same_formation_equivalence")
    rng = np.random.default_rng(seed)
    space = Q.line(cells)
    for t in range(_count(count, scale)):
        d = dims[t % len(dims)]
        reg = Q.register_for(space, d)
        alpha = Q.from_gates(G.random_script(space, reg, rng, 3), space, reg)
        u = _upper_factor(space, reg, rng)
        beta = Q.compose(u, alpha)          # beta = alpha . u (u acts first)
        N = reg.N
        same = mr.same_row_span(K.formation_of(alpha).G.basis.T, K.formation_of(beta).G.basis.T, d)
        cert = K.same_formation_equivalence(alpha, beta)
        # independent recomposition: beta . target == alpha
        ok = same and cert.check() and np.array_equal(
            mr.matmul(beta.M, cert.target.M, d), alpha.M % d)
        X = sp.site_to_xz(cert.target.M)
        ok &= not X[N:, :N].any()
        rec(ok, f"instance {t} d={d}")
    return rec.result()


# -- 9: CRT coherence ------------------------------------------------------------------------------------


def _random_idempotent(n, d, rng):
    a = int(rng.integers(0, n + 1))
    S = G.random_symplectic((n + 1) // 2, d, rng)[:n, :n]
    while not mr.is_invertible(S, d):
        S = G.random_symplectic((n + 1) // 2, d, rng)[:n, :n]
    D = np.diag([1] * a + [0] * (n - a))
    return mr.matmul(mr.matmul(S, D, d), mr.inverse(S, d), d), a


def check_crt(seed=0, scale=1.0, dims=(6, 12, 36), count=100) -> CheckResult:
    rec = _Recorder("CRT coherence")
    rng = np.random.default_rng(seed)
    for d in dims:
        moduli = mr.RingSpec.of(d).moduli
        for t in range(_count(count, scale)):
            # transvection decomposition, per factor then joined
            N = int(rng.integers(1, 4))
            S = G.random_symplectic(N, d, rng)
            parts = [sp.recompose(sp.decompose_transvections(S % q, q), 2 * N, q) for q in moduli]
            rec(np.array_equal(mr.crt_join_arrays(parts, d), S % d), f"decompose d={d} {t}")
            # idempotent ranks
            n = int(rng.integers(1, 6))
            E, a = _random_idempotent(n, d, rng)
            rec(all(mr.idempotent_rank(E % q, q) == a for q in moduli), f"rank d={d} {t}")
            # linear solves
            M = rng.integers(0, d, (4, 5))
            b = mr.matmul(M, rng.integers(0, d, 5), d)
            x = mr.solve_linear(M, b, d)
            xs = [mr.solve_linear(M % q, b % q, q) for q in moduli]
            y = mr.crt_join_arrays(xs, d)
            rec(np.array_equal(mr.matmul(M, x, d), b) and np.array_equal(mr.matmul(M, y, d), b),
                f"solve d={d} {t}")
            # Howell spans agree factorwise
            Hd = mr.howell_basis(M, d)
            rec(all(mr.same_row_span(Hd % q, mr.howell_basis(M % q, q), q) for q in moduli),
                f"howell d={d} {t}")
            # delooping index
            if t < _count(20, scale):
                space = Q.ring(32)
                reg = Q.register_for(space, d)
                s = int(rng.integers(-1, 2))
                a_ = _ring_qca(space, reg, rng, s) if rng.random() < 0.5 else \
                    G.random_trivial_qca(space, reg, rng, layers=1)
                cut = int(rng.integers(32))
                idx = K.delooping_index(a_, cut)
                per = {q: K.delooping_index(Q.reduce_mod(a_, q), cut)[q] for q in moduli}
                rec(idx == per, f"index d={d} {t}: {idx} vs {per}")
    return rec.result()


CHECKS = {
    "dense-oracle": check_dense_oracle,
    "commutation": check_commutation,
    "transvections": check_transvections,
    "symmetric-gates": check_symmetric_gates,
    "certify": check_certify,
    "delooping": check_delooping,
    "lagrangians": check_lagrangians,
    "equivalence": check_equivalence,
    "crt": check_crt,
}


def _run_one(args):
    name, seed, scale = args
    return CHECKS[name](seed=seed, scale=scale)


def run_all(seed=0, scale=1.0, jobs=1, names=None) -> list[CheckResult]:
    """Run the named checks (all by default); results come back in suite order."""
    names = list(CHECKS) if names is None else list(names)
    tasks = [(n, seed, scale) for n in names]
    if jobs <= 1:
        return [_run_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_run_one, tasks))
