import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# criterion id -> one-line measurement summary, filled in by test_acceptance.py
ACCEPTANCE_DETAILS: dict[str, str] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def record():
    def _record(cid: str, text: str):
        ACCEPTANCE_DETAILS[cid] = text
        print(f"[criterion {cid}] {text}")
    return _record


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" not in rep.nodeid:
                continue
            if outcome != "error" and rep.when != "call":
                continue
            name = rep.nodeid.split("::")[-1]
            cid = name.split("_")[2] if name.startswith("test_criterion_") else name
            rows.append((int(cid) if cid.isdigit() else 99, cid, outcome, name))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for _, cid, outcome, name in sorted(rows):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        detail = ACCEPTANCE_DETAILS.get(cid, "")
        terminalreporter.write_line(f"criterion {cid:>2}: {verdict}  {name}  {detail}")
