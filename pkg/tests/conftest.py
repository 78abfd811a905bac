import pytest

_verdicts: dict[int, tuple[bool, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and not rep.failed):
        return
    number = marker.args[0]
    detail = next((v for k, v in item.user_properties if k == "detail"), "")
    if rep.failed:
        msg = str(call.excinfo.value).splitlines()[0] if call.excinfo else rep.when
        detail = f"{detail} | {msg}" if detail else msg
    ok = rep.passed and _verdicts.get(number, (True, ""))[0]
    _verdicts[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_verdicts):
        ok, detail = _verdicts[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
