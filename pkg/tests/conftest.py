"""Collects one summary line per acceptance criterion.

Acceptance tests record ``criterion`` and ``detail`` through ``record_property``
before asserting, so a failing criterion still reports what it measured.
"""

from __future__ import annotations

_RESULTS: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        outcome = "PASS" if report.passed else "FAIL"
        _RESULTS[int(props["criterion"])] = (outcome, str(props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        outcome, detail = _RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {outcome}  {detail}")
