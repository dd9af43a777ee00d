"""Mean-element orbit propagation.

Keplerian two-body motion from TLE mean elements plus secular J2 drift of
RAAN, argument of perigee and mean anomaly. Deliberately not a full SGP4:
short-horizon LEO ground-track and pass geometry for a deception mission do
not need periodic perturbation terms, and the closed form keeps the module
swappable for a real SGP4 backend behind the same signatures.

Positions are treated as inertial ECI (no TEME<->J2000 distinction at this
fidelity). Earth is modelled as a sphere of equatorial radius; latitudes are
geocentric. All internal angles in radians, public fields in degrees/km.

Functions accept a scalar time or a numpy array of times (seconds since the
Unix epoch) and broadcast accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..tle import TleSet

MU_EARTH_KM3_S2 = 398600.4418
R_EARTH_KM = 6378.137
J2 = 1.08262668e-3
SOLAR_FLUX_W_M2 = 1361.0
SPEED_OF_LIGHT_KM_S = 299792.458

J2000_EPOCH_S = 946728000.0     # 2000-01-01 12:00:00 UTC as Unix seconds


class PropagationError(Exception):
    pass


@dataclass
class OrbitalState:
    t: float                      # Unix seconds
    position_eci_km: tuple
    velocity_eci_km_s: tuple
    latitude_deg: float
    longitude_deg: float
    altitude_km: float
    sunlit: bool
    sun_vector_eci: tuple         # unit vector, satellite-independent

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "position_eci_km": list(self.position_eci_km),
            "velocity_eci_km_s": list(self.velocity_eci_km_s),
            "latitude_deg": self.latitude_deg,
            "longitude_deg": self.longitude_deg,
            "altitude_km": self.altitude_km,
            "sunlit": self.sunlit,
        }


def semi_major_axis_km(tle: TleSet) -> float:
    n_rad = tle.mean_motion_rev_day * 2.0 * math.pi / 86400.0
    return (MU_EARTH_KM3_S2 / (n_rad * n_rad)) ** (1.0 / 3.0)


def _kepler_solve(M, e):
    """Eccentric anomaly from mean anomaly, Newton iteration (vectorized)."""
    E = M + e * np.sin(M)
    for _ in range(12):
        f = E - e * np.sin(E) - M
        E = E - f / (1.0 - e * np.cos(E))
    return E


def eci_state(tle: TleSet, t):
    """Position and velocity (km, km/s) at Unix time(s) t. Shapes (...,3)."""
    t = np.asarray(t, dtype=float)
    epoch_s = tle.epoch.timestamp()
    dt = t - epoch_s
    if np.any(dt < -86400.0):
        raise PropagationError("time precedes TLE epoch by more than one day")

    n_rad = tle.mean_motion_rev_day * 2.0 * math.pi / 86400.0
    a = semi_major_axis_km(tle)
    e = tle.eccentricity
    inc = math.radians(tle.inclination_deg)
    p = a * (1.0 - e * e)

    # Secular J2 rates.
    k = 1.5 * J2 * (R_EARTH_KM / p) ** 2 * n_rad
    raan_dot = -k * math.cos(inc)
    argp_dot = k * (2.0 - 2.5 * math.sin(inc) ** 2)
    mm_dot = k * math.sqrt(1.0 - e * e) * (1.0 - 1.5 * math.sin(inc) ** 2)

    raan = math.radians(tle.raan_deg) + raan_dot * dt
    argp = math.radians(tle.arg_perigee_deg) + argp_dot * dt
    M = math.radians(tle.mean_anomaly_deg) + (n_rad + mm_dot) * dt

    E = _kepler_solve(np.mod(M, 2.0 * math.pi), e)
    cosE, sinE = np.cos(E), np.sin(E)
    r_mag = a * (1.0 - e * cosE)
    if np.any(r_mag <= R_EARTH_KM):
        raise PropagationError("orbit intersects Earth surface")

    # Perifocal coordinates and rates.
    xp = a * (cosE - e)
    yp = a * math.sqrt(1.0 - e * e) * sinE
    E_dot = n_rad / (1.0 - e * cosE)
    vxp = -a * sinE * E_dot
    vyp = a * math.sqrt(1.0 - e * e) * cosE * E_dot

    cO, sO = np.cos(raan), np.sin(raan)
    cw, sw = np.cos(argp), np.sin(argp)
    ci, si = math.cos(inc), math.sin(inc)
    # Column vectors of R3(-raan) R1(-inc) R3(-argp).
    Px = cO * cw - sO * sw * ci
    Py = sO * cw + cO * sw * ci
    Pz = sw * si
    Qx = -cO * sw - sO * cw * ci
    Qy = -sO * sw + cO * cw * ci
    Qz = cw * si

    pos = np.stack([xp * Px + yp * Qx, xp * Py + yp * Qy, xp * Pz + yp * Qz], axis=-1)
    vel = np.stack([vxp * Px + vyp * Qx, vxp * Py + vyp * Qy, vxp * Pz + vyp * Qz], axis=-1)
    return pos, vel


def gmst_rad(t):
    d = (np.asarray(t, dtype=float) - J2000_EPOCH_S) / 86400.0
    gmst_deg = 280.46061837 + 360.98564736629 * d
    return np.radians(np.mod(gmst_deg, 360.0))


def sun_vector_eci(t):
    """Low-precision analytic solar direction (unit vector), good to ~0.01 deg."""
    d = (np.asarray(t, dtype=float) - J2000_EPOCH_S) / 86400.0
    L = np.radians(np.mod(280.460 + 0.9856474 * d, 360.0))
    g = np.radians(np.mod(357.528 + 0.9856003 * d, 360.0))
    lam = L + np.radians(1.915) * np.sin(g) + np.radians(0.020) * np.sin(2.0 * g)
    eps = np.radians(23.439 - 0.0000004 * d)
    return np.stack([np.cos(lam),
                     np.cos(eps) * np.sin(lam),
                     np.sin(eps) * np.sin(lam)], axis=-1)


def is_sunlit(pos_eci_km, sun_hat):
    """Cylindrical Earth-shadow test (vectorized)."""
    pos = np.asarray(pos_eci_km, dtype=float)
    sun = np.asarray(sun_hat, dtype=float)
    along = np.sum(pos * sun, axis=-1)
    perp = pos - along[..., None] * sun
    perp_dist = np.linalg.norm(perp, axis=-1)
    return (along >= 0.0) | (perp_dist >= R_EARTH_KM)


def subpoint(pos_eci_km, t):
    """Geocentric latitude, east longitude (deg) and altitude (km)."""
    pos = np.asarray(pos_eci_km, dtype=float)
    r = np.linalg.norm(pos, axis=-1)
    lat = np.degrees(np.arcsin(pos[..., 2] / r))
    lon = np.degrees(np.arctan2(pos[..., 1], pos[..., 0]) - gmst_rad(t))
    lon = np.mod(lon + 180.0, 360.0) - 180.0
    return lat, lon, r - R_EARTH_KM


def station_eci(latitude_deg, longitude_deg, altitude_m, t):
    """Ground point ECI position (spherical Earth), shape (...,3)."""
    t = np.asarray(t, dtype=float)
    lat = math.radians(latitude_deg)
    lon = np.radians(longitude_deg) + gmst_rad(t)
    rho = R_EARTH_KM + altitude_m / 1000.0
    clat = math.cos(lat)
    return np.stack([rho * clat * np.cos(lon),
                     rho * clat * np.sin(lon),
                     np.full_like(t, rho * math.sin(lat))], axis=-1)


def elevation_deg(tle: TleSet, latitude_deg: float, longitude_deg: float,
                  altitude_m: float, t):
    """Elevation of the satellite above the station's local horizon (deg)."""
    sat, _ = eci_state(tle, t)
    gs = station_eci(latitude_deg, longitude_deg, altitude_m, t)
    rng = sat - gs
    rng_mag = np.linalg.norm(rng, axis=-1)
    up = gs / np.linalg.norm(gs, axis=-1)[..., None]
    sin_el = np.sum(rng * up, axis=-1) / rng_mag
    return np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))


def slant_range_km(tle: TleSet, latitude_deg: float, longitude_deg: float,
                   altitude_m: float, t):
    sat, _ = eci_state(tle, t)
    gs = station_eci(latitude_deg, longitude_deg, altitude_m, t)
    return np.linalg.norm(sat - gs, axis=-1)


def propagate_orbit(tle: TleSet, t: float) -> OrbitalState:
    """Full scalar state at Unix time t."""
    pos, vel = eci_state(tle, float(t))
    lat, lon, alt = subpoint(pos, float(t))
    sun = sun_vector_eci(float(t))
    lit = bool(is_sunlit(pos, sun))
    return OrbitalState(
        t=float(t),
        position_eci_km=tuple(float(v) for v in pos),
        velocity_eci_km_s=tuple(float(v) for v in vel),
        latitude_deg=float(lat),
        longitude_deg=float(lon),
        altitude_km=float(alt),
        sunlit=lit,
        sun_vector_eci=tuple(float(v) for v in sun),
    )
