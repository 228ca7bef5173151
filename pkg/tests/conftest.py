"""Shared pytest plumbing.

Collects the outcome of every acceptance-criterion test and prints one
pass/fail line per criterion at the end of the run, so the whole
contract is readable at a glance even under output capture.
"""
from __future__ import annotations

import re

import pytest

_acceptance: dict[int, tuple[str, float, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    out = yield
    report = out.get_result()
    if report.when != "call":
        return
    m = re.match(r"test_criterion_(\d+)", item.name)
    if not m or not item.nodeid.startswith("tests/test_acceptance.py"):
        return
    if report.passed:
        outcome = "PASS"
    elif report.skipped:
        outcome = "SKIP"
    else:
        outcome = "FAIL"
    doc = item.function.__doc__ or item.name
    title = doc.strip().splitlines()[0].rstrip(".")
    _acceptance[int(m.group(1))] = (outcome, report.duration, title)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_acceptance):
        outcome, duration, title = _acceptance[num]
        terminalreporter.write_line(
            f"criterion {num:2d}: {outcome}  ({duration:7.1f}s)  {title}"
        )
