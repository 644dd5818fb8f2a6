import math
import sys

import pytest

from isl_fso.beam_optics import BeamParams
from isl_fso.link_budget import OpticalTerminal, TransceiverParams

REF_BEAM = BeamParams(waist_radius_m=1.25e-2, wavelength_m=1550e-9)
APERTURE_M = 0.2
JITTER_RAD = 8e-6


@pytest.fixture
def terminal():
    return OpticalTerminal(REF_BEAM, APERTURE_M, JITTER_RAD)


@pytest.fixture
def transceiver():
    return TransceiverParams()


def rel_err(a, b):
    return abs(a - b) / abs(b) if b else abs(a)


def assert_close(actual, expected, rtol):
    assert math.isclose(actual, expected, rel_tol=rtol), (actual, expected)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(acceptance.RESULTS, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
        terminalreporter.write_line(line)
