"""Orbit propagation against an independent RK4 two-body oracle."""

import math
from datetime import datetime, timezone

import numpy as np
import pytest

from decoysat.physics import orbit
from decoysat.tle import compose_tle

import oracles


EPOCH = datetime(2024, 4, 28, 12, 0, 0, tzinfo=timezone.utc)


def make_tle(incl=51.64, ecc=0.0007, mm=15.5, raan=208.9, argp=69.9, ma=290.3):
    return compose_tle("TESTSAT", 25544, EPOCH, incl, raan, ecc, argp, ma, mm)


def test_internal_period_matches_mean_motion():
    t = make_tle(mm=15.5)
    a = orbit.semi_major_axis_km(t)
    kepler_period = 2.0 * math.pi * math.sqrt(a ** 3 / orbit.MU_EARTH_KM3_S2)
    assert kepler_period == pytest.approx(86400.0 / 15.5, rel=1e-9)


def test_equatorial_orbit_stays_on_equator():
    t = make_tle(incl=0.0, ecc=0.0)
    t0 = t.epoch.timestamp()
    for dt in (0.0, 600.0, 2000.0, 5000.0, 86000.0):
        state = orbit.propagate_orbit(t, t0 + dt)
        assert abs(state.latitude_deg) < 0.01


def test_position_repeats_after_one_period():
    t = make_tle()
    t0 = t.epoch.timestamp()
    p0, _ = orbit.eci_state(t, t0)
    p1, _ = orbit.eci_state(t, t0 + t.period_s)
    drift = np.linalg.norm(p1 - p0)
    assert drift < 0.01 * np.linalg.norm(p0)


def test_propagation_matches_two_body_rk4_over_one_period():
    t = make_tle()
    t0 = t.epoch.timestamp()
    p0, v0 = orbit.eci_state(t, t0)
    steps = int(round(t.period_s))
    r_ref, _ = oracles.rk4_two_body(p0, v0, t.period_s / steps, steps)
    p1, _ = orbit.eci_state(t, t0 + t.period_s)
    assert np.linalg.norm(p1 - r_ref) < 0.01 * np.linalg.norm(p0)


def test_latitude_bounded_by_inclination():
    t = make_tle(incl=51.64)
    t0 = t.epoch.timestamp()
    ts = t0 + np.arange(0.0, 2.0 * t.period_s, 10.0)
    pos, _ = orbit.eci_state(t, ts)
    lat, _, alt = orbit.subpoint(pos, ts)
    assert float(np.max(np.abs(lat))) <= 51.64 + 0.5
    assert float(np.min(alt)) > 0.0


def test_elevation_at_zenith_and_antipode():
    t = make_tle()
    at = t.epoch.timestamp() + 1234.0
    state = orbit.propagate_orbit(t, at)
    el = orbit.elevation_deg(t, state.latitude_deg, state.longitude_deg, 0.0, at)
    assert float(el) == pytest.approx(90.0, abs=0.1)
    anti_lon = state.longitude_deg - 180.0
    if anti_lon < -180.0:
        anti_lon += 360.0
    el = orbit.elevation_deg(t, -state.latitude_deg, anti_lon, 0.0, at)
    assert float(el) < 0.0


def test_elevation_zero_at_dense_sampled_pass_boundary(tle, berlin_station):
    t0 = tle.epoch.timestamp()
    windows = oracles.dense_pass_boundaries(tle, berlin_station, t0, 86400.0)
    assert windows
    for aos, los in windows[:3]:
        for edge in (aos, los):
            el = orbit.elevation_deg(
                tle, berlin_station.latitude_deg, berlin_station.longitude_deg,
                berlin_station.altitude_m, edge)
            assert abs(float(el)) < 0.2


def test_ground_track_regression_tracks_earth_rotation(tle):
    # longitude shift between successive ascending-node crossings
    t0 = tle.epoch.timestamp()
    ts = t0 + np.arange(0.0, 2.5 * tle.period_s, 1.0)
    pos, _ = orbit.eci_state(tle, ts)
    lat, lon, _ = orbit.subpoint(pos, ts)
    asc = np.where((lat[:-1] < 0.0) & (lat[1:] >= 0.0))[0]
    assert len(asc) >= 2
    i, j = asc[0], asc[1]
    dlon = (lon[j] - lon[i] + 180.0) % 360.0 - 180.0
    node_period = ts[j] - ts[i]
    expected = -360.0 * node_period / 86164.0
    assert dlon == pytest.approx(expected, rel=0.05)


def test_time_before_epoch_rejected():
    t = make_tle()
    with pytest.raises(orbit.PropagationError):
        orbit.eci_state(t, t.epoch.timestamp() - 2 * 86400.0)


def test_decayed_orbit_rejected():
    t = make_tle(mm=17.5, ecc=0.0)   # semi-major axis below Earth radius
    with pytest.raises(orbit.PropagationError):
        orbit.eci_state(t, t.epoch.timestamp())


def test_shadow_test_geometry():
    sun = np.array([1.0, 0.0, 0.0])
    assert bool(orbit.is_sunlit(np.array([7000.0, 0.0, 0.0]), sun))
    assert not bool(orbit.is_sunlit(np.array([-7000.0, 0.0, 0.0]), sun))
    assert bool(orbit.is_sunlit(np.array([0.0, 7000.0, 0.0]), sun))


def test_sun_vector_is_unit_and_seasonal():
    t_mar = datetime(2024, 3, 20, 12, tzinfo=timezone.utc).timestamp()
    t_jun = datetime(2024, 6, 20, 12, tzinfo=timezone.utc).timestamp()
    for t in (t_mar, t_jun):
        s = orbit.sun_vector_eci(t)
        assert np.linalg.norm(s) == pytest.approx(1.0, abs=1e-9)
    # equinox: sun near equatorial plane; solstice: well north
    assert abs(orbit.sun_vector_eci(t_mar)[2]) < 0.02
    assert orbit.sun_vector_eci(t_jun)[2] > 0.35


def test_vectorized_elevation_matches_scalar(tle, berlin_station):
    t0 = tle.epoch.timestamp()
    ts = t0 + np.arange(0.0, 600.0, 60.0)
    vec = orbit.elevation_deg(tle, berlin_station.latitude_deg,
                              berlin_station.longitude_deg,
                              berlin_station.altitude_m, ts)
    for i, t in enumerate(ts):
        scalar = orbit.elevation_deg(tle, berlin_station.latitude_deg,
                                     berlin_station.longitude_deg,
                                     berlin_station.altitude_m, float(t))
        assert float(scalar) == pytest.approx(float(vec[i]), abs=1e-9)


def test_propagate_orbit_snapshot_fields(tle):
    state = orbit.propagate_orbit(tle, tle.epoch.timestamp() + 100.0)
    d = state.to_dict()
    assert set(d) == {"t", "position_eci_km", "velocity_eci_km_s",
                      "latitude_deg", "longitude_deg", "altitude_km", "sunlit"}
    assert state.altitude_km > 100.0
    assert -180.0 <= state.longitude_deg <= 180.0
