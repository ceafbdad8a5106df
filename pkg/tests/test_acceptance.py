"""Acceptance gate: every numbered criterion at its stated tolerance.

Each test prints one PASS line (visible with ``pytest -s`` or in the
captured output of failures); the same checks back ``fepkit selftest``.
"""

import pytest

from fepkit.selftest import CRITERIA


@pytest.mark.parametrize("crit", CRITERIA, ids=[f"criterion_{c.number}" for c in CRITERIA])
def test_acceptance(crit):
    detail = crit.check()
    print(f"PASS criterion {crit.number} ({crit.title}): {detail}")
