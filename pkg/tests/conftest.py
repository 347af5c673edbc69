import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one PASS/FAIL line per acceptance criterion at the end of a run."""
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" not in report.nodeid:
                continue
            when = getattr(report, "when", "call")
            if when == "call" or (when == "setup" and report.outcome != "passed"):
                name = report.nodeid.split("::")[-1]
                lines[name] = "PASS" if report.outcome == "passed" else "FAIL"
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name in sorted(lines):
            terminalreporter.write_line(f"{lines[name]}  {name}")
