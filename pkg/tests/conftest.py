import pytest

from sllresub.netlist import parse_blif
from sllresub.partition import DieAssignment

DEMO_BLIF = """\
.model twodie_xor
.inputs a b c d
.outputs Y F
.names a b X
10 1
01 1
.names X c Y
10 1
01 1
.names a d F
10 1
01 1
.end
"""

CARE_BLIF = """\
.model twodie_xor_care
.inputs b c
.outputs care
.names b c care
00 1
11 1
.end
"""

# Pivot truth table rows in (a, b, c, d) order: X, Y, original F, rebuilt
# F' = Y xor d, and the care flag (b == c). The reference grid every
# demo-circuit test checks against.
TABLE2 = [
    # a  b  c  d   X  Y  F  F' care
    (0, 0, 0, 0,   0, 0, 0, 0, 1),
    (0, 0, 0, 1,   0, 0, 1, 1, 1),
    (0, 0, 1, 0,   0, 1, 0, 1, 0),
    (0, 0, 1, 1,   0, 1, 1, 0, 0),
    (0, 1, 0, 0,   1, 1, 0, 1, 0),
    (0, 1, 0, 1,   1, 1, 1, 0, 0),
    (0, 1, 1, 0,   1, 0, 0, 0, 1),
    (0, 1, 1, 1,   1, 0, 1, 1, 1),
    (1, 0, 0, 0,   1, 1, 1, 1, 1),
    (1, 0, 0, 1,   1, 1, 0, 0, 1),
    (1, 0, 1, 0,   1, 0, 1, 0, 0),
    (1, 0, 1, 1,   1, 0, 0, 1, 0),
    (1, 1, 0, 0,   0, 0, 1, 0, 0),
    (1, 1, 0, 1,   0, 0, 0, 1, 0),
    (1, 1, 1, 0,   0, 1, 1, 1, 1),
    (1, 1, 1, 1,   0, 1, 0, 0, 1),
]


@pytest.fixture
def demo_netlist():
    return parse_blif(DEMO_BLIF)


@pytest.fixture
def demo_assignment():
    return DieAssignment(
        2,
        {"a": 0, "b": 0, "c": 1, "d": 1, "X": 0, "Y": 1, "F": 1},
        {"a": 0, "b": 0, "c": 0, "d": 0, "X": 1, "Y": 1, "F": 1},
    )


@pytest.fixture
def demo_care():
    return parse_blif(CARE_BLIF)
