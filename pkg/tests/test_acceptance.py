"""The nine acceptance criteria at full size and stated tolerances.

Each test prints one PASS/FAIL line (shown even under output capture).
The seed can be changed with QCA_WITT_SEED.
"""
import os

import pytest

from qcawitt import selftest

SEED = int(os.environ.get("QCA_WITT_SEED", "7"))

CRITERIA = [
    ("1 pauli engine vs dense oracle", selftest.check_dense_oracle),
    ("2 commutation law", selftest.check_commutation),
    ("3 transvection witness", selftest.check_transvections),
    ("4 symmetric to gates", selftest.check_symmetric_gates),
    ("5 factorization certificate", selftest.check_certify),
    ("6 delooping index", selftest.check_delooping),
    ("7 lagrangian machinery", selftest.check_lagrangians),
    ("8 formation well-definedness", selftest.check_equivalence),
    ("9 crt coherence", selftest.check_crt),
]


@pytest.mark.parametrize("label,check", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(label, check, capsys):
    result = check(seed=SEED, scale=1.0)
    with capsys.disabled():
        print(f"\n[criterion {label}] {result.line()}")
    assert result.passed, result.failures[:5]
