import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_CRITERIA = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    key = props["criterion"]
    if report.when == "call" or report.failed:
        prev = _CRITERIA.get(key)
        if prev is None or prev[0] != "FAIL":
            _CRITERIA[key] = ("PASS" if report.passed else "FAIL", props)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        outcome, props = _CRITERIA[key]
        elapsed = props.get("elapsed")
        t = "" if elapsed is None else f"  {elapsed:6.1f}s / {props['budget']:g}s"
        terminalreporter.write_line(f"criterion {key:>2}: {outcome}{t}  {props['title']}")
