import pytest

from linreduce.automata import regex_to_nfa, seq, star
from linreduce.memory import call, check_trace, ret


@pytest.fixture(scope="session")
def spec_ab():
    """(M_A M_B)*"""
    return regex_to_nfa(star(seq("M_A", "M_B")))


@pytest.fixture(scope="session")
def fig1():
    return check_trace(
        [call(1, "M_A"), call(2, "M_A"), ret(1), call(1, "M_B"), ret(2), call(2, "M_B"), ret(1), ret(2)]
    )


@pytest.fixture(scope="session")
def fig2():
    return check_trace(
        [
            call(1, "M_A"), call(2, "M_A"), call(3, "M_A"), ret(1), call(1, "M_B"), ret(2),
            call(2, "M_B"), ret(3), ret(1), call(3, "M_B"), ret(2), ret(3),
        ]
    )


@pytest.fixture(scope="session")
def fig3():
    return check_trace([call(1, "M_A"), call(2, "M_A"), ret(1), ret(2), call(1, "M_B"), call(2, "M_B"), ret(1), ret(2)])


_acceptance_outcomes = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" in report.nodeid and report.when == "call":
        _acceptance_outcomes[report.nodeid.rsplit("::", 1)[1]] = report


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    import test_acceptance

    recorded = {line.split(" ")[1]: line for line in test_acceptance.RESULTS}
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_outcomes):
        number = name.split("_")[2]
        rep = _acceptance_outcomes[name]
        line = recorded.get(number)
        if line is None:
            # the test raised before it could record a verdict
            line = f"criterion {number} [FAIL] {name}: {rep.longrepr.reprcrash.message if rep.failed else rep.outcome}"
        terminalreporter.write_line(line)
