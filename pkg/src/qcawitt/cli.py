"""Command-line entry point: ``qca <subcommand> ...``.

Results are JSON on stdout (or in the ``-o`` file) with sorted keys, so
equal inputs and seed give byte-identical output.  Exit codes: 0 ok,
2 usage error, 3 malformed input, 4 a failed invariant or check, whose
name is printed on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import classify as K
from . import forms
from . import generators as G
from . import modring as mr
from . import pauli
from . import qca as Q
from . import selftest
from . import verify
from .errors import (QCAError, RegisterMismatch, SchemaError, ShapeMismatch, SpaceMismatch,
                     UnknownCell)
from .symplectic import SymplecticMap, decompose_transvections

EXIT_OK, EXIT_USAGE, EXIT_SCHEMA, EXIT_INVARIANT = 0, 2, 3, 4
SEED_ENV = "QCA_WITT_SEED"

_INPUT_ERRORS = (SchemaError, UnknownCell, SpaceMismatch, RegisterMismatch, ShapeMismatch)


class UsageError(Exception):
    pass


@dataclass
class CommandResult:
    status: str = "ok"
    code: int = EXIT_OK
    payload: object = None
    checks: list = field(default_factory=list)
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.code == EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- file helpers -----------------------------------------------------------------------


def _load(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from None


def _load_qca(path: str) -> Q.CliffordQCA:
    obj = _load(path)
    if not isinstance(obj, dict) or "matrix" not in obj or "space" not in obj:
        raise SchemaError(f"{path} is not a QCA document")
    return Q.CliffordQCA.from_json(obj)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


# -- subcommands ----------------------------------------------------------------------


def _kind_of(obj) -> str:
    if not isinstance(obj, dict):
        raise SchemaError("top-level JSON must be an object")
    if "kind" in obj:
        return obj["kind"]
    if "space" in obj and "matrix" in obj:
        return "qca"
    if "register" in obj and "matrix" in obj:
        return "symplectic_map"
    if "images" in obj:
        return "gate_table"
    if "form" in obj and "F" in obj:
        return "formation"
    raise SchemaError("unrecognised document: expected a QCA, symplectic map, "
                      "gate table or formation")


def cmd_verify(args) -> CommandResult:
    obj = _load(args.file)
    kind = _kind_of(obj)
    checks = []
    if kind == "qca":
        alpha = Q.CliffordQCA.from_json(obj, check=False)
        checks.append(("symplectic", verify.preserves_form(alpha.M, alpha.d)))
        checks.append(("within_declared_radius", Q.tight_radius(alpha) <= alpha.radius + 1e-9))
        payload = {"kind": "qca", "d": alpha.d, "cells": len(alpha.space), "qudits": alpha.register.N,
                   "radius": Q._num(alpha.radius), "tight_radius": Q._num(Q.tight_radius(alpha)),
                   "separated": Q.is_separated(alpha)}
    elif kind == "symplectic_map":
        smap_obj = dict(obj)
        m = SymplecticMap.from_json(smap_obj) if verify.preserves_form(
            _site_matrix(smap_obj), obj["register"]["d"]) else None
        checks.append(("symplectic", m is not None))
        payload = {"kind": "symplectic_map", "d": obj["register"]["d"]}
    elif kind == "gate_table":
        table = pauli.GateTable.from_json(obj)
        try:
            pauli.kappa_of(table)
            good = True
        except QCAError:
            good = False
        checks.append(("defines_clifford_automorphism", good))
        payload = {"kind": "gate_table", "d": table.d, "n": table.n}
    elif kind == "formation":
        fm = forms.Formation.from_json(obj)
        checks.append(("form_nonsingular", forms.is_nonsingular(fm.form)))
        checks.append(("F_lagrangian", forms.is_lagrangian(fm.F, fm.form)))
        checks.append(("G_lagrangian", forms.is_lagrangian(fm.G, fm.form)))
        payload = {"kind": "formation", "d": fm.form.d, "rank": fm.form.m,
                   "complementary": forms.are_complementary(fm.F, fm.G, fm.form)}
    else:
        raise SchemaError(f"'verify' does not handle {kind!r}; use verify-cert for certificates")
    payload["checks"] = {name: ok for name, ok in checks}
    return _finish(payload, checks)


def _site_matrix(obj) -> np.ndarray:
    from .symplectic import xz_to_site
    mat = mr.ModMatrix.from_json(obj["matrix"])
    layout = obj.get("layout")
    if layout == "site_major":
        return mat.a
    if layout == "xz_blocks":
        return xz_to_site(mat.a)
    raise SchemaError(f"symplectic map needs layout site_major or xz_blocks, got {layout!r}")


def _space_and_register(args, d: int):
    space = Q.parse_space(args.space)
    return space, Q.register_for(space, d, args.k)


def cmd_gen(args) -> CommandResult:
    rng = np.random.default_rng(_seed(args))
    if args.script is not None:
        obj = _load(args.script)
        d = args.d if args.d is not None else obj.get("d", 2) if isinstance(obj, dict) else 2
        space, reg = _space_and_register(args, int(d))
        alpha = Q.from_gates(Q.GateScript.from_json(obj), space, reg)
    elif args.random is not None:
        space, reg = _space_and_register(args, args.d or 2)
        if args.random == "shift":
            alpha = Q.shift(space, reg, args.displacement)
        elif args.random == "circuit":
            alpha = Q.from_gates(G.random_script(space, reg, rng, args.layers), space, reg)
        elif args.random == "separated":
            alpha = G.random_separated(space, reg, rng)
        else:
            alpha = G.random_trivial_qca(space, reg, rng, layers=args.layers)
    else:
        raise UsageError("gen needs a script file or --random KIND")
    return CommandResult(payload=alpha.to_json())


def cmd_compose(args) -> CommandResult:
    a, b = _load_qca(args.first), _load_qca(args.second)
    return CommandResult(payload=Q.compose(a, b).to_json())


def cmd_inverse(args) -> CommandResult:
    return CommandResult(payload=Q.inverse(_load_qca(args.file)).to_json())


def cmd_formation(args) -> CommandResult:
    return CommandResult(payload=K.formation_of(_load_qca(args.file)).to_json())


def cmd_index(args) -> CommandResult:
    alpha = _load_qca(args.file)
    idx = K.delooping_index(alpha, args.cut, args.width)
    return CommandResult(payload={"factors": {str(q): int(v) for q, v in sorted(idx.items())}})


def cmd_certify(args) -> CommandResult:
    cert = K.certify_trivial(_load_qca(args.file), args.prelayer)
    return CommandResult(payload=cert.to_json())


def cmd_equiv(args) -> CommandResult:
    alpha, beta = _load_qca(args.first), _load_qca(args.second)
    cert = K.same_formation_equivalence(alpha, beta)
    return CommandResult(payload={"kind": "equivalence_certificate", "alpha": alpha.to_json(),
                                  "beta": beta.to_json(), "certificate": cert.to_json()})


def cmd_decompose(args) -> CommandResult:
    obj = _load(args.file)
    kind = _kind_of(obj)
    if kind == "qca":
        alpha = Q.CliffordQCA.from_json(obj)
        M, d = alpha.M, alpha.d
    elif kind == "symplectic_map":
        smap = SymplecticMap.from_json(obj)
        M, d = smap.M, smap.d
    else:
        raise SchemaError("decompose needs a QCA or a symplectic map")
    factors = {}
    for q in mr.RingSpec.of(d).moduli:
        steps = decompose_transvections(M % q, q)
        factors[str(q)] = [{"u": [int(x) for x in u], "c": int(c)} for u, c in steps]
    return CommandResult(payload={"kind": "transvection_decomposition", "layout": "site_major",
                                  "matrix": mr.ModMatrix(d, M).to_json(), "factors": factors})


def cmd_verify_cert(args) -> CommandResult:
    checks = list(verify.check_certificate(_load(args.file)).items())
    payload = {"kind": "certificate_check", "checks": dict(checks),
               "valid": all(ok for _, ok in checks)}
    return _finish(payload, checks)


def cmd_selftest(args) -> CommandResult:
    names = args.only or None
    if names:
        unknown = [n for n in names if n not in selftest.CHECKS]
        if unknown:
            raise UsageError(f"unknown suite(s) {unknown}; choose from {list(selftest.CHECKS)}")
    results = selftest.run_all(seed=_seed(args), scale=args.scale, jobs=args.jobs, names=names)
    for r in results:
        print(r.line(), file=sys.stderr)
    checks = [(r.name, r.passed) for r in results]
    payload = {"seed": _seed(args), "scale": args.scale,
               "suites": {r.name: {"passed": r.passed, "instances": r.instances,
                                   "failures": r.failures[:5]} for r in results}}
    return _finish(payload, checks)


def _finish(payload, checks) -> CommandResult:
    failed = [name for name, ok in checks if not ok]
    if failed:
        return CommandResult("error", EXIT_INVARIANT, payload, checks,
                             f"check failed: {', '.join(failed)}")
    return CommandResult(payload=payload, checks=checks)


# -- parser ---------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help=f"random seed (default: ${SEED_ENV}, else 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for selftest suites")
    common.add_argument("-o", "--output", help="write JSON here instead of stdout")

    p = _Parser(prog="qca", description="Clifford QCAs over Z_d: invariants and certificates.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("verify", parents=[common], help="check a QCA, map, gate table or formation")
    s.add_argument("file")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("gen", parents=[common], help="build a QCA from a gate script or at random")
    s.add_argument("script", nargs="?")
    s.add_argument("--space", required=True, help="line:N, ring:N or grid:WxH")
    s.add_argument("--d", type=int, default=None, help="local dimension (default: script's 'd', else 2)")
    s.add_argument("--k", type=int, default=1, help="qudits per cell")
    s.add_argument("--random", choices=["trivial", "circuit", "separated", "shift"])
    s.add_argument("--layers", type=int, default=2)
    s.add_argument("--displacement", type=int, default=1)
    s.set_defaults(func=cmd_gen)

    for name, func, hlp in (("compose", cmd_compose, "FIRST then SECOND"),
                            ("equiv", cmd_equiv, "certificate for SECOND^-1 FIRST")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("first")
        s.add_argument("second")
        s.set_defaults(func=func)

    for name, func, hlp in (("inverse", cmd_inverse, "inverse QCA"),
                            ("formation", cmd_formation, "formation (H, L, alpha L)"),
                            ("decompose", cmd_decompose, "transvection decomposition per factor"),
                            ("verify-cert", cmd_verify_cert, "re-check a certificate from scratch")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("file")
        s.set_defaults(func=func)

    s = sub.add_parser("index", parents=[common], help="delooping index at a cut")
    s.add_argument("file")
    s.add_argument("--cut", type=int, required=True)
    s.add_argument("--width", type=int, default=None, help="band half-width (default 2r)")
    s.set_defaults(func=cmd_index)

    s = sub.add_parser("certify", parents=[common], help="triviality certificate")
    s.add_argument("file")
    s.add_argument("--prelayer", choices=K.STRATEGIES, default="auto")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("selftest", parents=[common], help="run the property suites")
    s.add_argument("--scale", type=float, default=1.0, help="multiply instance counts")
    s.add_argument("--only", nargs="*", help=f"subset of {list(selftest.CHECKS)}")
    s.set_defaults(func=cmd_selftest)
    return p


def run(argv) -> CommandResult:
    """Parse and execute; never raises for expected failures."""
    try:
        args = build_parser().parse_args(list(argv))
        if getattr(args, "func", None) is None:
            raise UsageError("missing subcommand")
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        result = args.func(args)
    except UsageError as exc:
        return CommandResult("error", EXIT_USAGE, None, [], f"usage: {exc}")
    except _INPUT_ERRORS as exc:
        return CommandResult("error", EXIT_SCHEMA, None, [], f"{type(exc).__name__}: {exc}")
    except QCAError as exc:
        name = type(exc).__name__
        return CommandResult("error", EXIT_INVARIANT, None, [(name, False)], f"{name}: {exc}")
    result.output = getattr(args, "output", None)
    return result


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if any(a in ("-h", "--help") for a in argv) or not argv:
        try:
            build_parser().parse_args(list(argv) or ["--help"])
        except SystemExit as exc:
            return int(exc.code or 0)
        except UsageError:
            pass
    result = run(argv)
    if result.payload is not None:
        text = dumps(result.payload)
        out = getattr(result, "output", None)
        if out:
            with open(out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    if not result.ok:
        print(f"error: {result.message}", file=sys.stderr)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
