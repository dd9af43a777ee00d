"""Geomagnetic field: tilted centered dipole.

B(r) = B0 (Re/r)^3 (3(m.r)r - m) with the dipole axis tilted 11.5 deg from
the rotation axis and co-rotating with Earth. Good enough to feed a believable
magnetometer; swap for IGRF if higher fidelity is ever needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .attitude import rotate_vector_inverse
from .orbit import R_EARTH_KM, gmst_rad

B0_NT = 31200.0              # field at the magnetic equator, Earth surface
DIPOLE_TILT_DEG = 11.5
DIPOLE_LON_DEG = -71.6       # geographic east longitude of the north dipole pole


@dataclass
class MagneticState:
    b_eci_nT: tuple
    b_body_nT: tuple

    @property
    def magnitude_nT(self) -> float:
        x, y, z = self.b_eci_nT
        return math.sqrt(x * x + y * y + z * z)

    def to_dict(self) -> dict:
        return {"b_eci_nT": list(self.b_eci_nT), "b_body_nT": list(self.b_body_nT)}


def dipole_axis_eci(t: float) -> tuple:
    """Unit vector toward the north geomagnetic pole at Unix time t."""
    tilt = math.radians(DIPOLE_TILT_DEG)
    lon = math.radians(DIPOLE_LON_DEG) + float(gmst_rad(t))
    return (math.sin(tilt) * math.cos(lon),
            math.sin(tilt) * math.sin(lon),
            math.cos(tilt))


def field_eci_nT(position_eci_km, t: float) -> tuple:
    px, py, pz = position_eci_km
    r = math.sqrt(px * px + py * py + pz * pz)
    rx, ry, rz = px / r, py / r, pz / r
    mx, my, mz = dipole_axis_eci(t)
    mdotr = mx * rx + my * ry + mz * rz
    scale = B0_NT * (R_EARTH_KM / r) ** 3
    return (scale * (3.0 * mdotr * rx - mx),
            scale * (3.0 * mdotr * ry - my),
            scale * (3.0 * mdotr * rz - mz))


def sample_field(position_eci_km, q_body_to_eci, t: float) -> MagneticState:
    b_eci = field_eci_nT(position_eci_km, t)
    b_body = rotate_vector_inverse(q_body_to_eci, b_eci)
    return MagneticState(b_eci_nT=b_eci, b_body_nT=b_body)
