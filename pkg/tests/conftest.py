import sys
from pathlib import Path

import pytest

from ptbp.textio import parse_machine, parse_protocol, parse_trace

HERE = Path(__file__).parent
FIXTURES = Path(__file__).parents[1] / "src" / "ptbp" / "fixtures"
sys.path.insert(0, str(HERE))

_criteria = {}


def load_protocol(name):
    return parse_protocol((FIXTURES / name).read_text(), name)


def load_machine(name):
    return parse_machine((FIXTURES / "machines" / name).read_text(), name)


@pytest.fixture
def factory():
    return load_protocol("factory.ptbp")


@pytest.fixture
def example2():
    return parse_trace((FIXTURES / "example2.trace").read_text())


def pytest_runtest_logreport(report):
    marker = "test_criterion_"
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith(marker):
        return
    number = int(name[len(marker):].split("_", 1)[0])
    if report.when == "call" or report.outcome != "passed":
        if _criteria.get(number) != "FAIL":
            _criteria[number] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        terminalreporter.write_line(f"criterion {number:2d}: {_criteria[number]}")
