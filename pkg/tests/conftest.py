import os
from collections import OrderedDict

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# acceptance bookkeeping: criterion number -> list of (test id, passed, details)
_CRITERIA = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        details = "; ".join(f"{k}={v}" for k, v in rep.user_properties)
        _CRITERIA.setdefault(mark.args[0], []).append((item.name, rep.passed, details))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        rows = _CRITERIA[n]
        ok = all(passed for _, passed, _ in rows)
        failed = [name for name, passed, _ in rows if not passed]
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({len(rows) - len(failed)}/{len(rows)} checks)"
        if failed:
            line += " failing: " + ", ".join(failed)
        tr.write_line(line)
        for name, _, details in rows:
            if details:
                tr.write_line(f"    {name}: {details}")
