import pytest

_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion; assert after recording."""
    name = request.node.name

    def check(ok: bool, detail: str):
        _RESULTS[name] = (bool(ok), detail)
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in sorted(_RESULTS.items()):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
