"""Collects per-criterion outcomes from tests marked ``criterion(k)`` and prints one line each."""

import pytest

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    k = marker.args[0]
    entry = _results.setdefault(k, {"ok": True, "parts": []})
    details = [v for name, v in item.user_properties if name == "detail"]
    ok = report.passed
    entry["ok"] &= ok
    msg = "; ".join(details)
    if not ok and report.longrepr is not None:
        last = str(report.longrepr).strip().splitlines()[-1]
        msg = f"{msg}; {last}" if msg else last
    entry["parts"].append((item.name, ok, msg))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_results):
        entry = _results[k]
        status = "PASS" if entry["ok"] else "FAIL"
        for name, ok, msg in entry["parts"]:
            tr.write_line(f"criterion {k:>2}: {status}  [{name}: {'ok' if ok else 'failed'}] {msg}")
