import json
from importlib import resources

import pytest

from planarsym.maps import MapSpec, map_from_json_dict

BUNDLED = ("figure1", "linear_d2", "repellor_d2", "so2_radial", "z3_rotscale")

_criteria: dict = {}
criterion_seconds: dict = {}


def bundled(name: str) -> MapSpec:
    text = resources.files("planarsym").joinpath("data", f"{name}.json").read_text("utf-8")
    return map_from_json_dict(json.loads(text))


def extra_maps() -> list:
    """Small hand-picked maps covering the remaining table rows and local classes."""
    return [
        MapSpec.cpoly({(1, 0): 0.5, (0, 2): 0.1}, "d3_quadratic"),
        MapSpec.expr("x/2", "2*y", name="saddle_d2"),
        MapSpec.expr("x^3", "y/2", name="cubic_axis"),
        MapSpec.expr("x/2 + x^3/10", "-y/2 - y*x^2/10", name="d2_soft"),
        MapSpec.cpoly({(1, 0): 0.4, (2, 1): -0.1}, "o2_cubic"),
        MapSpec.cpoly({(1, 0): 0.2 + 0.6j, (1, 4): 0.05}, "z4_rotscale"),
    ]


@pytest.fixture(scope="session")
def corpus() -> list:
    return [bundled(n) for n in BUNDLED] + extra_maps()


@pytest.fixture(scope="session")
def figure1() -> MapSpec:
    return bundled("figure1")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    criterion_seconds[n] = criterion_seconds.get(n, 0.0) + rep.duration
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _criteria[n] = (title, rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, outcome = _criteria[n]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}  {title}")
    total = sum(criterion_seconds.values())
    terminalreporter.write_line(f"acceptance criteria wall time: {total:.1f} s")
