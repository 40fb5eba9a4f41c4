import pytest

_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.fixture
def record_criterion(request):
    """Store one pass/fail line per acceptance criterion for the terminal summary."""
    def record(ident, name, passed, note=""):
        request.config.stash[_CRITERIA][ident] = (name, bool(passed), note)
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = config.stash.get(_CRITERIA, {})
    if not rows:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for ident in sorted(rows):
        name, passed, note = rows[ident]
        terminalreporter.write_line(f"criterion {ident:2d}: {'PASS' if passed else 'FAIL'}  {name}  {note}".rstrip())
