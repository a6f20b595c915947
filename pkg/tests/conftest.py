"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import re

_RESULTS = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = int(m.group(1))
    failed = report.failed
    if report.when == "call" or failed:
        prev = _RESULTS.get(key)
        detail = dict(report.user_properties).get("detail", "")
        status = "FAIL" if failed or (prev and prev[0] == "FAIL") else "PASS"
        _RESULTS[key] = (status, m.group(2).replace("_", " "), detail or (prev[2] if prev else ""))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_RESULTS):
        status, name, detail = _RESULTS[key]
        line = f"{status} criterion {key}: {name}"
        terminalreporter.write_line(f"{line} [{detail}]" if detail else line)
