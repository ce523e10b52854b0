import time

import pytest

_ACCEPTANCE = []


class CriterionRecorder:
    """Collects one pass/fail line per acceptance criterion."""

    def __init__(self, number: int, title: str, budget: float):
        self.number = number
        self.title = title
        self.budget = budget
        self.details = []
        self.ok = True
        self.start = time.perf_counter()

    def expect(self, ok: bool, detail: str):
        self.details.append(("" if ok else "VIOLATION ") + detail)
        self.ok = self.ok and bool(ok)

    def finish(self) -> str:
        elapsed = time.perf_counter() - self.start
        in_budget = elapsed < self.budget
        verdict = "PASS" if self.ok and in_budget else "FAIL"
        timing = f"{elapsed:.2f}s / budget {self.budget:g}s" + ("" if in_budget else " EXCEEDED")
        line = f"criterion {self.number:2d} {verdict}: {self.title} [{timing}] " + "; ".join(self.details)
        _ACCEPTANCE.append((self.number, line))
        print(line)
        return verdict

    def conclude(self):
        assert self.finish() == "PASS", self.details


@pytest.fixture
def criterion():
    return CriterionRecorder


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
