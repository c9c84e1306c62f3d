import pytest

_LINES: list[str] = []


@pytest.fixture
def record():
    """Append one acceptance line; printed in the terminal summary."""

    def add(n: int, ok: bool, what: str, detail: str) -> None:
        _LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {what}  [{detail}]")

    return add


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
