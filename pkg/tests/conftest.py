import pytest

_RESULTS = []


class AcceptanceRecorder:
    """Collects one pass/fail line per acceptance criterion."""

    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.checks = []

    def check(self, label, ok, detail=""):
        self.checks.append((label, bool(ok), detail))
        return bool(ok)

    @property
    def passed(self):
        return bool(self.checks) and all(ok for _, ok, _ in self.checks)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        failed = [f"{label} ({detail})" if detail else label for label, ok, detail in self.checks if not ok]
        tail = f" -- failed: {'; '.join(failed)}" if failed else ""
        return f"[{status}] criterion {self.number}: {self.title}{tail}"

    def assert_all(self):
        print(self.line())
        for label, ok, detail in self.checks:
            print(f"    {'ok  ' if ok else 'FAIL'} {label}: {detail}")
        assert self.passed, self.line()


@pytest.fixture
def criterion():
    def make(number, title):
        rec = AcceptanceRecorder(number, title)
        _RESULTS.append(rec)
        return rec

    return make


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for rec in sorted(_RESULTS, key=lambda r: r.number):
        terminalreporter.write_line(rec.line())
        for label, ok, detail in rec.checks:
            terminalreporter.write_line(f"    {'ok  ' if ok else 'FAIL'} {label}: {detail}")
