import pytest

from gdpkit import _backend

BACKENDS = [_backend.python] + ([_backend.compiled] if _backend.compiled is not None else [])


@pytest.fixture(params=BACKENDS, ids=lambda k: k.NAME)
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    monkeypatch.setattr(_backend, "kernels", request.param)
    return request.param


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, text): acceptance criterion number")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    num, text = marker.args
    results = item.config._criteria.setdefault(num, [text, True, []])
    results[1] = results[1] and rep.passed
    results[2].extend(v for k, v in item.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not config._criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(config._criteria):
        text, ok, details = config._criteria[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {text}")
        for d in details:
            terminalreporter.write_line(f"    {d}")
