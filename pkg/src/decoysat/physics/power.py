"""Electrical power subsystem model.

Single battery with a linear open-circuit voltage curve, solar generation
gated by eclipse state and panel incidence, explicit-Euler charge bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

from .orbit import OrbitalState, SOLAR_FLUX_W_M2

V_EMPTY_MV = 7400.0
V_FULL_MV = 8600.0     # V(soc) = 7400 + 1200 * soc


@dataclass
class PowerState:
    charge_mAh: float
    capacity_mAh: float
    load_mW: float
    generation_mW: float = 0.0
    heater_on: bool = False

    @property
    def soc(self) -> float:
        return self.charge_mAh / self.capacity_mAh

    @property
    def battery_voltage_mV(self) -> int:
        return int(round(V_EMPTY_MV + (V_FULL_MV - V_EMPTY_MV) * self.soc))

    @property
    def current_mA(self) -> float:
        return self.load_mW / (self.battery_voltage_mV / 1000.0)

    def to_dict(self) -> dict:
        return {
            "charge_mAh": self.charge_mAh,
            "capacity_mAh": self.capacity_mAh,
            "load_mW": self.load_mW,
            "generation_mW": self.generation_mW,
            "heater_on": self.heater_on,
            "battery_voltage_mV": self.battery_voltage_mV,
            "current_mA": self.current_mA,
        }


def generation_mW(orbital: OrbitalState, panel_area_m2: float,
                  panel_efficiency: float, incidence_factor: float = 1.0) -> float:
    """Array output. incidence_factor = max(0, cos theta) between panel normal
    and the Sun, supplied by the caller from attitude state."""
    if not orbital.sunlit:
        return 0.0
    return (panel_area_m2 * panel_efficiency * SOLAR_FLUX_W_M2 * 1000.0
            * max(0.0, incidence_factor))


def step_power(state: PowerState, orbital: OrbitalState, dt_s: float,
               panel_area_m2: float, panel_efficiency: float,
               incidence_factor: float = 1.0) -> PowerState:
    if dt_s <= 0:
        raise ValueError("dt must be positive")
    gen = generation_mW(orbital, panel_area_m2, panel_efficiency, incidence_factor)
    voltage_v = state.battery_voltage_mV / 1000.0
    delta_mAh = (gen - state.load_mW) / voltage_v * dt_s / 3600.0
    charge = min(max(state.charge_mAh + delta_mAh, 0.0), state.capacity_mAh)
    return PowerState(
        charge_mAh=charge,
        capacity_mAh=state.capacity_mAh,
        load_mW=state.load_mW,
        generation_mW=gen,
        heater_on=state.heater_on,
    )
