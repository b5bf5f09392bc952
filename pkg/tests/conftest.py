from importlib import resources

import pytest

from sbstdp.minilang import parse_program

ABS = "fn abs(x:int){ if (x<0) { return -x; } return x; }"

# abs variant whose branch writes an output, so the < / <= mutant is observable at x = 0
ABS_OUT = """
fn abs(x: int) {
    if (x < 0) {
        output 1;
        return -x;
    }
    return x;
}
"""


def nested_source() -> str:
    return resources.files("sbstdp").joinpath("data/nested.mlp").read_text()


@pytest.fixture
def nested():
    return parse_program(nested_source(), "nested.mlp")


@pytest.fixture
def abs_program():
    return parse_program(ABS, "abs.mlp")


# Published two-way ANOVA sums of squares: effect -> (SS, df)
PUBLISHED_EFFECTS = {"recall": (51341.0, 5), "precision": (273.0, 1), "recall:precision": (190.0, 5)}
PUBLISHED_RESIDUAL = (5945.0, 288)


# One line per acceptance criterion, printed after the run.
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
