import pytest

from ksineq.rayset import load_rayset, rayset_summary

CORPUS = ["kcbs-5", "yu-oh-13", "cabello-18"]


@pytest.fixture(scope="session")
def corpus_sets():
    out = {}
    for name in CORPUS:
        rs = load_rayset(name)
        graph, bases = rayset_summary(rs)
        out[name] = (rs, graph, bases)
    return out


@pytest.fixture(scope="session")
def kcbs(corpus_sets):
    return corpus_sets["kcbs-5"]


@pytest.fixture(scope="session")
def yu_oh(corpus_sets):
    return corpus_sets["yu-oh-13"]


@pytest.fixture(scope="session")
def cabello(corpus_sets):
    return corpus_sets["cabello-18"]


ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's outcome; printed in the terminal summary."""
    number, title = request.node.get_closest_marker("criterion").args
    ACCEPTANCE_RESULTS[number] = (False, title)
    yield
    ACCEPTANCE_RESULTS[number] = (request.node.rep_call.passed, title)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, title = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}")
