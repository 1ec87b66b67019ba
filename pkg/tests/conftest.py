import json
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from causalprobe import _accel  # noqa: E402
from causalprobe.gateway import Gateway, ResponseCache, mock_provider  # noqa: E402


@pytest.fixture(params=_accel.available_backends())
def backend(request):
    return _accel.get_backend(request.param)


@pytest.fixture
def make_gateway():
    def make(script=None, strict=True, cache=None, **kw):
        cache = cache if cache is not None else ResponseCache()
        return Gateway(mock_provider(script, strict=strict, **kw), cache)
    return make


@pytest.fixture
def provider_file(tmp_path):
    def write(rules, name="testmock", **extra):
        doc = {"name": name, "kind": "mock", "model": name + "-1", "strict": True,
               "rules": rules, **extra}
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        return str(path)
    return write


# acceptance criteria: one PASS/FAIL line each in the terminal summary

_criteria: dict[int, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (report.when != "call" and report.passed):
        return
    number, title = mark.args
    status = "PASS" if report.passed else "FAIL"
    prev = _criteria.get(number)
    if prev is None or prev[1] == "PASS":
        _criteria[number] = (title, status, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status, seconds = _criteria[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status}  ({seconds:.2f}s)  {title}")
