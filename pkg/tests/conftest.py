from __future__ import annotations

from contextlib import contextmanager

import pytest

from slopewright import gallery as G
from slopewright.symbolic import TransitionMatrix

# criterion number -> list of (status, detail); printed once at the end of the run
CRITERIA: dict = {}


@contextmanager
def criterion(n: int, detail: str, expect_fail: bool = False):
    """Record a PASS or FAIL line for an acceptance criterion, then re-raise."""
    try:
        yield
    except BaseException as e:
        CRITERIA.setdefault(n, []).append(("FAIL", f"{detail}: {type(e).__name__}: {e}".splitlines()[0]))
        raise
    CRITERIA.setdefault(n, []).append(("PASS", detail))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        parts = CRITERIA[n]
        status = "PASS" if all(s == "PASS" for s, _ in parts) else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status}  " + " | ".join(f"[{s}] {d}" for s, d in parts))


@pytest.fixture(scope="session")
def instances():
    return G.gallery()


@pytest.fixture(scope="session")
def matrices(instances):
    return {name: TransitionMatrix(inst.map, inst.partition) for name, inst in instances.items()}
