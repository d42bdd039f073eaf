import os
import sys

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from itl.formula import BOTTOM, And, Atom, Eventually, Henceforth, Implies, Next, Or  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def formulas(atoms=("p", "q"), box=True, temporal=True, max_leaves=8):
    leaves = st.sampled_from([Atom(a) for a in atoms] + [BOTTOM])
    unary = ([Next, Eventually] if temporal else []) + ([Henceforth] if box and temporal else [])

    def extend(children):
        options = [st.builds(op, children, children) for op in (And, Or, Implies)]
        options += [st.builds(op, children) for op in unary]
        return st.one_of(options)
    return st.recursive(leaves, extend, max_leaves=max_leaves)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record_criterion():
    def record(number: int, ok: bool, detail: str = ""):
        ACCEPTANCE[number] = (ok, detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
