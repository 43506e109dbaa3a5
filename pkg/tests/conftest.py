"""Collects acceptance outcomes and prints one line per criterion at the end."""

_OUTCOMES = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or report.outcome == "failed":
        key = props["criterion"]
        ok = report.outcome == "passed"
        prev = _OUTCOMES.get(key)
        if prev is None or prev[0]:
            _OUTCOMES[key] = (ok, props.get("title", ""), props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_OUTCOMES):
        ok, title, detail = _OUTCOMES[key]
        line = f"{'PASS' if ok else 'FAIL'} criterion {key}: {title}"
        if detail:
            line += f" | {detail}"
        terminalreporter.write_line(line)
