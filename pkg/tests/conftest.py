import pytest

_RESULTS = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def criteria(request):
    """Shared record of acceptance outcomes: id -> (passed, detail)."""
    return request.config.stash.setdefault(_RESULTS, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(results, key=lambda c: int(c[1:])):
        ok, detail = results[cid]
        terminalreporter.write_line(f"{cid:>3} {'PASS' if ok else 'FAIL'}  {detail}")
