import pytest

# filled by tests/test_acceptance.py: criterion id -> (passed, detail)
ACCEPTANCE = {}


def record(cid, passed, detail):
    ACCEPTANCE[cid] = (bool(passed), detail)
    return passed


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: (int("".join(ch for ch in c if ch.isdigit())), c)):
        ok, detail = ACCEPTANCE[cid]
        tr.write_line(f"criterion {cid:>3}: {'PASS' if ok else 'FAIL'}  {detail}")
