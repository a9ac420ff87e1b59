from __future__ import annotations

import pytest

from semirps import checks

LEVEL = "full"
SEED = 0


class AcceptanceReport:
    def __init__(self) -> None:
        self.results: dict[int, checks.CheckResult] = {}

    def get(self, cid: int) -> checks.CheckResult:
        if cid not in self.results:
            self.results[cid] = checks.run_check(cid, LEVEL, SEED)
        return self.results[cid]


_REPORT = AcceptanceReport()


@pytest.fixture(scope="session")
def acceptance() -> AcceptanceReport:
    return _REPORT


def pytest_terminal_summary(terminalreporter):
    if not _REPORT.results:
        return
    tr = terminalreporter
    tr.write_sep("=", f"acceptance criteria (level={LEVEL}, seed={SEED})")
    for cid in sorted(_REPORT.results):
        res = _REPORT.results[cid]
        tr.write_line(res.line())
        for c in res.checks:
            mark = "ok  " if c.passed else "FAIL"
            value = "" if c.value is None else f"{c.value:.6g}"
            tr.write_line(f"        {mark} {c.name}: {value}  (target {c.target})")
