from __future__ import annotations

import pytest

from faultloc import FaultStudy, bundled_case, parse_case


@pytest.fixture(scope="session")
def fourbus():
    return bundled_case("fourbus")


@pytest.fixture(scope="session")
def ieee14():
    return bundled_case("ieee14")


@pytest.fixture(scope="session")
def fourbus_study(fourbus):
    return FaultStudy(fourbus)


@pytest.fixture(scope="session")
def ieee14_study(ieee14):
    return FaultStudy(ieee14)


TWO_BUS = """
base 100 230 50
bus 1
bus 2
line L 1 2 1.0 0.02 0.2 0.06 0.6
source 1 0.01 0.1
"""

# Two identical lines P1/P2 in parallel between buses 1-2, a third line T
# onward to bus 3, sources at both ends so fault current crosses the pair.
PARALLEL_PAIR = """
base 100 230 50
bus 1
bus 2
bus 3
line P1 1 2 1.0 0.02 0.2 0.06 0.6
line P2 1 2 1.0 0.02 0.2 0.06 0.6
line T  2 3 1.0 0.03 0.3 0.09 0.9
source 1 0.005 0.05
source 3 0.005 0.05
"""

# Triangle 1-2-3 with the fault line A between 1 and 2; buses 4 and 5 hang
# off bus 3 behind the single bridge D, so no simple path between 4 and 5
# can reach the fault.
BRIDGE_FIVE = """
base 100 230 50
bus 1
bus 2
bus 3
bus 4
bus 5
line A 1 2 1.0 0.02 0.2 0.06 0.6
line B 2 3 1.0 0.02 0.2 0.06 0.6
line C 3 1 1.0 0.02 0.2 0.06 0.6
line D 3 4 1.0 0.03 0.3 0.09 0.9
line E 4 5 1.0 0.03 0.3 0.09 0.9
source 1 0.005 0.05
source 2 0.006 0.06
"""

# Mirror-symmetric diamond around the fault line F; buses 3 and 4 see the
# fault identically, so the cross branch W between them never reacts.
DIAMOND = """
base 100 230 50
bus 1
bus 2
bus 3
bus 4
line F  1 2 1.0 0.02 0.2 0.06 0.6
line U1 1 3 1.0 0.03 0.3 0.09 0.9
line U2 3 2 1.0 0.03 0.3 0.09 0.9
line V1 1 4 1.0 0.03 0.3 0.09 0.9
line V2 4 2 1.0 0.03 0.3 0.09 0.9
line W  3 4 1.0 0.01 0.1 0.03 0.3
source 3 0.004 0.04
source 4 0.004 0.04
"""


@pytest.fixture()
def two_bus():
    return parse_case(TWO_BUS)


@pytest.fixture()
def parallel_pair():
    return parse_case(PARALLEL_PAIR)


@pytest.fixture()
def bridge_five():
    return parse_case(BRIDGE_FIVE)


@pytest.fixture()
def diamond():
    return parse_case(DIAMOND)
