"""Shared test plumbing: the acceptance suite records one line per criterion
and this hook prints them after the run, so the scoreboard is visible even
when pytest captures stdout."""

ACCEPTANCE_RESULTS = []


def record_acceptance(cid: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.append((cid, ok, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{cid}] {status}: {detail}")
