import numpy as np
import pytest

from darboux.surfaces import catalog, get_pair


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def paraboloid():
    return get_pair("paraboloid")


@pytest.fixture(scope="session")
def pairs():
    return {p.name: p for p in catalog()}


ACCEPTANCE: dict = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion; the outcome line is printed after the run."""
    state = {"detail": ""}

    def note(text):
        state["detail"] = text

    yield note
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    ACCEPTANCE[request.node.name] = (ok, state["detail"])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
