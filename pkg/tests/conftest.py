from __future__ import annotations

import pytest

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Recorder for one acceptance criterion: prints and keeps a PASS/FAIL line."""

    def record(number: int, title: str, checks: list, seconds: float, limit: float | None = None) -> None:
        parts = [f"{label}={value}" for label, value, _ in checks]
        ok = all(passed for _, _, passed in checks)
        if limit is not None:
            parts.append(f"runtime={seconds:.2f}s<{limit:g}s")
            ok = ok and seconds < limit
        else:
            parts.append(f"runtime={seconds:.2f}s")
        failed = [label for label, _, passed in checks if not passed]
        if limit is not None and seconds >= limit:
            failed.append("runtime")
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: " + ", ".join(parts)
        if failed:
            line += f"  [failing: {', '.join(failed)}]"
        ACCEPTANCE_LINES[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
