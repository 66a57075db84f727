"""Random instances for tests, the self-test command and benchmarks.

Everything takes a ``numpy.random.Generator`` so results are reproducible
from a seed.
"""
from __future__ import annotations

import numpy as np

from . import modring as mr
from . import qca as Q
from .symplectic import Register, transvection


def random_symplectic(N: int, d: int, rng, steps: int | None = None) -> np.ndarray:
    """Product of random transvections (a gate-like random walk on Sp(2N, Z_d))."""
    steps = 4 * N + 4 if steps is None else steps
    M = mr.identity(2 * N)
    for _ in range(steps):
        u = rng.integers(0, d, 2 * N)
        M = mr.matmul(transvection(u, int(rng.integers(0, d)), d), M, d)
    return M


def random_gate_symplectic(N: int, d: int, rng, layers: int = 6) -> np.ndarray:
    """Symplectic matrix generated by random H, P and CZ gates on ``N`` qudits."""
    space = Q.line(N)
    reg = Q.register_for(space, d)
    return Q.from_gates(random_script(space, reg, rng, layers, max_dist=N), space, reg).M


def random_layer(space: Q.Space, reg: Register, rng, max_dist: float = 1, p_gate: float = 0.6):
    """One layer of random H/P/CZ gates on disjoint qudits, CZ spans at most ``max_dist``."""
    d = reg.d
    free = {(c, q) for ci, c in enumerate(space.cells) for q in range(reg.k[ci])}
    order = sorted(free)
    rng.shuffle(order)
    gates = []
    used_cells: set = set()
    for c, q in order:
        if (c, q) not in free or rng.random() > p_gate:
            continue
        kind = rng.choice(["H", "P", "CZ", "CZ"])
        if kind == "CZ":
            ci = space.index(c)
            near = [(c2, q2) for (c2, q2) in free if (c2, q2) != (c, q)
                    and space.dist[ci, space.index(c2)] <= max_dist
                    and (c2 == c or (c2 not in used_cells and c not in used_cells))]
            if not near:
                continue
            near.sort()
            c2, q2 = near[int(rng.integers(len(near)))]
            gates.append(Q.CZ((c, q), (c2, q2), int(rng.integers(1, d))))
            free -= {(c, q), (c2, q2)}
            if c2 != c:
                used_cells |= {c, c2}
        elif kind == "H":
            gates.append(Q.H(c, q, int(rng.integers(1, 4))))
            free.discard((c, q))
        else:
            gates.append(Q.P(c, q, int(rng.integers(1, d))))
            free.discard((c, q))
    return tuple(gates)


def random_script(space: Q.Space, reg: Register, rng, layers: int = 3, max_dist: float = 1,
                  ) -> Q.GateScript:
    return Q.GateScript(tuple(random_layer(space, reg, rng, max_dist) for _ in range(layers)))


def random_banded_symmetric(N: int, d: int, band: int, rng, density: float = 0.5) -> np.ndarray:
    C = rng.integers(0, d, (N, N)) * (rng.random((N, N)) < density)
    C = np.triu(C)
    i, j = np.indices((N, N))
    C[np.abs(i - j) > band] = 0
    return (C + np.triu(C, 1).T) % d


def random_local_invertible(space: Q.Space, reg: Register, rng, layers: int = 1) -> np.ndarray:
    """Banded ``A`` whose inverse is banded too.

    Each layer is block-diagonal with 2x2 blocks on disjoint pairs of
    consecutive qudits (in neighbouring cells), each block an elementary
    shear times unit scalings, so the layer and its inverse have the same
    support.
    """
    d = reg.d
    N = reg.N
    cell_of = reg.cell_of_qudit()
    units = [u for u in range(1, d) if np.gcd(u, d) == 1]
    A = mr.identity(N)
    for _ in range(layers):
        E = mr.identity(N)
        start = int(rng.integers(2))
        for s in range(start, N - 1, 2):
            t = s + 1
            if space.dist[cell_of[s], cell_of[t]] > 1:
                continue
            c = int(rng.integers(0, d))
            if rng.random() < 0.5:
                E[s, t] = c
            else:
                E[t, s] = c
        for t in range(N):
            if rng.random() < 0.3:
                E[:, t] = E[:, t] * units[int(rng.integers(len(units)))] % d
        A = mr.matmul(E, A, d)
    return A


def random_separated(space: Q.Space, reg: Register, rng, layers: int = 1) -> Q.CliffordQCA:
    d = reg.d
    N = reg.N
    A = random_local_invertible(space, reg, rng, layers)
    Ainv = mr.inverse(A, d)
    from .classify import from_blocks
    Z = np.zeros((N, N), dtype=np.int64)
    return from_blocks(space, reg, A, Z, Z, Ainv.T)


def random_trivial_qca(space: Q.Space, reg: Register, rng, layers: int = 2,
                       sep_layers: int = 1) -> Q.CliffordQCA:
    """``separated`` after a random H/P/CZ circuit: trivial by construction."""
    circ = Q.from_gates(random_script(space, reg, rng, layers), space, reg)
    sep = random_separated(space, reg, rng, sep_layers)
    return Q.compose(circ, sep)
