"""Re-derive certificates from scratch.

Nothing here reuses the code that produced a certificate.  Gate scripts are
turned into symplectic matrices through the Pauli-level gate tables and
``kappa_of``.  The symplectic form and transvections are written out
directly.  Products use Python integers, so there are no overflow shortcuts.
Each check function returns an ordered dict of named booleans.
"""
from __future__ import annotations

import numpy as np

from . import pauli
from . import qca as Q
from .errors import SchemaError
from .modring import ModMatrix, factorize


def _exact(M) -> np.ndarray:
    return np.asarray(M).astype(object)


def _mul(A, B, d) -> np.ndarray:
    return (_exact(A) @ _exact(B)) % d


def _J(n) -> np.ndarray:
    Jm = np.zeros((n, n), dtype=object)
    for i in range(0, n, 2):
        Jm[i, i + 1], Jm[i + 1, i] = 1, -1
    return Jm


def preserves_form(M, d) -> bool:
    M = _exact(M)
    n = M.shape[0]
    return bool(((M.T @ _J(n) @ M - _J(n)) % d == 0).all())


def separated_blocks(M) -> bool:
    """X images have no Z part and Z images no X part (site-major layout)."""
    M = np.asarray(M)
    return not M[1::2, 0::2].any() and not M[0::2, 1::2].any()


def script_matrix(script: Q.GateScript, space: Q.Space, reg) -> np.ndarray:
    """Symplectic matrix of a script via the Pauli gate tables."""
    table = Q.script_gate_table(script, space, reg)
    return np.asarray(pauli.kappa_of(table, reg).M)


def _prelayer_inverse(labels, space, reg) -> np.ndarray:
    if not labels:
        return np.eye(2 * reg.N, dtype=np.int64)
    layer = tuple(Q.H(c, q, 3) for c, q in labels)
    return script_matrix(Q.GateScript((layer,)), space, reg)


def _locality(alpha: Q.CliffordQCA) -> bool:
    """Every nonzero block lies within the declared radius."""
    sc = Q.site_cells(alpha.register)
    far = alpha.space.dist[np.ix_(sc, sc)] > alpha.radius + 1e-9
    return not (np.asarray(alpha.M) % alpha.d)[far].any()


def check_triviality(obj: dict) -> dict:
    try:
        target = Q.CliffordQCA.from_json(obj["target"], check=False)
        sep = Q.CliffordQCA.from_json(obj["separated"], check=False)
        circuit = Q.GateScript.from_json(obj["circuit"])
        labels = [(str(c), int(q)) for c, q in obj["hadamard_prelayer"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad triviality certificate: {exc}") from None
    d = target.d
    space, reg = target.space, target.register
    checks = {
        "target_symplectic": preserves_form(target.M, d),
        "target_local": _locality(target),
        "separated_symplectic": preserves_form(sep.M, d),
        "separated_has_no_offdiagonal_blocks": separated_blocks(sep.M),
        "separated_same_register": sep.register == reg,
    }
    if not all(checks.values()):
        return checks
    circ = script_matrix(circuit, space, reg)
    pre_inv = _prelayer_inverse(labels, space, reg)
    rebuilt = _mul(_mul(circ, sep.M, d), pre_inv, d)
    checks["recomposes_to_target"] = bool((rebuilt == np.asarray(target.M) % d).all())
    return checks


def check_equivalence(obj: dict) -> dict:
    try:
        alpha = Q.CliffordQCA.from_json(obj["alpha"], check=False)
        beta = Q.CliffordQCA.from_json(obj["beta"], check=False)
        inner = obj["certificate"]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad equivalence certificate: {exc}") from None
    checks = {"alpha_symplectic": preserves_form(alpha.M, alpha.d),
              "beta_symplectic": preserves_form(beta.M, beta.d)}
    checks.update(check_triviality(inner))
    target = Q.CliffordQCA.from_json(inner["target"], check=False)
    d = alpha.d
    # target is beta^-1 alpha, i.e. beta after target gives alpha
    checks["beta_after_target_is_alpha"] = bool(
        (_mul(beta.M, target.M, d) == np.asarray(alpha.M) % d).all())
    n = alpha.register.N
    checks["target_preserves_x_summand"] = not np.asarray(target.M)[1::2, 0::2].any() \
        if n else True
    return checks


def _transvection(u, c, q) -> np.ndarray:
    u = np.array([int(x) % q for x in u], dtype=object)
    Ju = _J(len(u)) @ u
    return (np.eye(len(u), dtype=object) + c * np.outer(u, Ju)) % q


def check_decomposition(obj: dict) -> dict:
    try:
        mat = ModMatrix.from_json(obj["matrix"])
        factors = obj["factors"]
        layout = obj.get("layout", "site_major")
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad decomposition certificate: {exc}") from None
    if layout != "site_major":
        raise SchemaError("decomposition certificates use the site_major layout")
    d = mat.d
    n = mat.rows
    expected = sorted(p ** k for p, k in factorize(d))
    checks = {"matrix_symplectic": preserves_form(mat.a, d),
              "factors_cover_modulus": sorted(int(q) for q in factors) == expected}
    for q_key, steps in sorted(factors.items(), key=lambda kv: int(kv[0])):
        q = int(q_key)
        out = np.eye(n, dtype=object)
        for st in steps:
            out = (out @ _transvection(st["u"], int(st["c"]), q)) % q
        checks[f"product_equals_matrix_mod_{q}"] = bool((out == np.asarray(mat.a) % q).all())
        checks[f"length_within_bound_mod_{q}"] = len(steps) <= 2 * n
    return checks


CHECKERS = {
    "triviality_certificate": check_triviality,
    "equivalence_certificate": check_equivalence,
    "transvection_decomposition": check_decomposition,
}


def check_certificate(obj: dict) -> dict:
    kind = obj.get("kind") if isinstance(obj, dict) else None
    if kind not in CHECKERS:
        raise SchemaError(f"unknown certificate kind {kind!r}; expected one of {sorted(CHECKERS)}")
    return CHECKERS[kind](obj)
