"""Whole-spacecraft state and the fixed-order tick.

Update order per tick: orbital -> attitude -> magnetic -> power -> thermal.
Later stages read the outputs the earlier stages produced in the same tick
(power sees this tick's eclipse flag and panel attitude, thermal sees this
tick's heater load).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from ..config import SatellitePersonality
from . import attitude as att
from . import magnetic as mag
from . import orbit
from . import power as pwr
from . import thermal as thm
from .camera import CameraState

MAX_TICK_DT_S = 10.0


@dataclass
class SatelliteState:
    t: float
    orbital: orbit.OrbitalState
    attitude: att.AttitudeState
    magnetic: mag.MagneticState
    power: pwr.PowerState
    thermal: thm.ThermalState
    camera: CameraState

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "orbital": self.orbital.to_dict(),
            "attitude": self.attitude.to_dict(),
            "magnetic": self.magnetic.to_dict(),
            "power": self.power.to_dict(),
            "thermal": self.thermal.to_dict(),
            "camera": self.camera.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


class SpacecraftSimulation:
    """Owns the satellite state and advances it on demand."""

    def __init__(self, personality: SatellitePersonality, start_epoch_s: float):
        self.personality = personality
        self.t = float(start_epoch_s)
        self.torque_body_Nm = (0.0, 0.0, 0.0)

        orbital = orbit.propagate_orbit(personality.tle, self.t)
        attitude = att.AttitudeState(
            q=att.quat_normalize(personality.initial_attitude_quat),
            omega_rad_s=tuple(personality.initial_omega_rad_s))
        soc0 = (personality.battery_nominal_mV - pwr.V_EMPTY_MV) / (
            pwr.V_FULL_MV - pwr.V_EMPTY_MV)
        soc0 = min(max(soc0, 0.0), 1.0)
        power = pwr.PowerState(
            charge_mAh=soc0 * personality.battery_capacity_mAh,
            capacity_mAh=personality.battery_capacity_mAh,
            load_mW=personality.base_load_mW,
            heater_on=False)
        thermal = thm.ThermalState(temperature_K=thm.equilibrium_K(
            personality.absorbed_solar_mW, 0.0,
            personality.emissivity, personality.radiating_area_m2))
        magnetic = mag.sample_field(orbital.position_eci_km, attitude.q, self.t)
        self.state = SatelliteState(
            t=self.t, orbital=orbital, attitude=attitude, magnetic=magnetic,
            power=power, thermal=thermal,
            camera=CameraState(width_px=1024, height_px=1024))

    def panel_incidence(self, orbital: orbit.OrbitalState,
                        attitude: att.AttitudeState) -> float:
        """max(0, cos theta) between the body +Z panel normal and the Sun."""
        normal = att.rotate_vector(attitude.q, (0.0, 0.0, 1.0))
        sx, sy, sz = orbital.sun_vector_eci
        dot = normal[0] * sx + normal[1] * sy + normal[2] * sz
        return max(0.0, dot)

    def tick(self, dt_s: float) -> SatelliteState:
        if not (0.0 < dt_s <= MAX_TICK_DT_S):
            raise ValueError(f"tick dt must be in (0, {MAX_TICK_DT_S}], got {dt_s}")
        p = self.personality
        self.t += dt_s

        orbital = orbit.propagate_orbit(p.tle, self.t)
        attitude = att.step_attitude(self.state.attitude, self.torque_body_Nm,
                                     p.inertia_diag_kgm2, dt_s)
        magnetic = mag.sample_field(orbital.position_eci_km, attitude.q, self.t)

        heater_mW = p.heater_load_mW if self.state.power.heater_on else 0.0
        prev_power = self.state.power
        prev_power.load_mW = p.base_load_mW + heater_mW
        power = pwr.step_power(
            prev_power, orbital, dt_s,
            p.solar_panel_area_m2, p.solar_panel_efficiency,
            incidence_factor=self.panel_incidence(orbital, attitude))

        thermal = thm.step_thermal(
            self.state.thermal, p.absorbed_solar_mW, heater_mW,
            p.emissivity, p.radiating_area_m2, p.heat_capacity_J_per_K, dt_s)
        if not (100.0 < thermal.temperature_K < 400.0):
            raise RuntimeError(
                f"thermal state left sanity band: {thermal.temperature_K:.1f} K")

        self.state = SatelliteState(
            t=self.t, orbital=orbital, attitude=attitude, magnetic=magnetic,
            power=power, thermal=thermal, camera=self.state.camera)
        return self.state

    def set_heater(self, on: bool) -> None:
        self.state.power.heater_on = bool(on)

    def set_torque(self, torque_body_Nm) -> None:
        self.torque_body_Nm = tuple(float(v) for v in torque_body_Nm)
