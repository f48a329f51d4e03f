from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_CRITERIA = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    detail = dict(item.user_properties).get("detail", "")
    _CRITERIA[mark.args[0]] = (mark.args[1], call.excinfo is None, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        name, ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n} {name}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip())
