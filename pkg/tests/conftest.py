import re

_CRITERIA = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion\[criterion_(\d+)\]", report.nodeid)
    if not m:
        return
    number = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        if report.failed:
            detail = str(report.longrepr.reprcrash.message) if hasattr(report.longrepr, "reprcrash") else "failed"
        _CRITERIA[number] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        verdict, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {verdict}  {detail.splitlines()[0] if detail else ''}")
