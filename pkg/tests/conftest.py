import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    from test_acceptance import TITLES

    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in sorted(_acceptance.items(), key=lambda kv: int(kv[0].rsplit("_", 1)[1][:-1])):
        k = int(nodeid.rsplit("_", 1)[1][:-1])
        terminalreporter.write_line(f"criterion {k:2d} [{'PASS' if outcome == 'passed' else 'FAIL'}] {TITLES[k]}")
