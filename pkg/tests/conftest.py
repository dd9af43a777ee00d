import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from decoysat import launcher
from decoysat.config import (GroundConfiguration, GroundStation,
                             SatellitePersonality, default_tle,
                             lookup_location)


@pytest.fixture(scope="session")
def tle():
    return default_tle()


@pytest.fixture()
def personality(tle):
    return SatellitePersonality(name="ACS3", tle=tle)


@pytest.fixture()
def berlin_station():
    return lookup_location("Berlin")


@pytest.fixture()
def ground_cfg(berlin_station):
    return GroundConfiguration(ground_station=berlin_station)


@pytest.fixture(scope="session")
def berlin_mission():
    """Bootstrap output shared across tests (deterministic, read-only)."""
    return launcher.bootstrap("csp", "ACS3", "Berlin")


@pytest.fixture()
def stack(berlin_mission):
    personality, cfg = berlin_mission
    st = launcher.build_stack(personality, cfg, virtual=True)
    yield st
    st.close()


def make_station(lat, lon, alt_m=0.0, name="test"):
    return GroundStation(name, lat, lon, alt_m)


# Acceptance tests carry a human-readable criterion label; echo one verdict
# line per criterion after the run so the result is visible without -v.
def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call":
                continue
            item_id = getattr(rep, "nodeid", "")
            if "test_acceptance" not in item_id:
                continue
            label = rep.nodeid.rsplit("::", 1)[-1]
            verdict = "PASS" if outcome == "passed" else "FAIL"
            lines.append((label, verdict))
    if lines:
        tw = terminalreporter
        tw.write_sep("-", "acceptance criteria")
        for label, verdict in lines:
            tw.write_line(f"{verdict}  {label}")
