"""Clifford quantum cellular automata over Z_d.

Submodules: ``modring`` (linear algebra over Z_d), ``pauli`` (phase-exact
Pauli operators and gate tables), ``symplectic``, ``forms`` (epsilon-forms,
Lagrangians, formations), ``qca``, ``classify`` (formations, certificates,
delooping index), ``verify`` (independent certificate checks) and ``cli``.
"""
from .errors import QCAError
from .qca import CliffordQCA, GateScript, Space, compose, from_gates, inverse
from .classify import certify_trivial, delooping_index, formation_of, same_formation_equivalence

__version__ = "0.1.0"

__all__ = ["QCAError", "CliffordQCA", "GateScript", "Space", "compose", "from_gates", "inverse",
           "certify_trivial", "delooping_index", "formation_of", "same_formation_equivalence"]
