"""Lumped single-node thermal model.

dT/dt = (P_absorbed + P_heater - eps * sigma * A * T^4) / C, explicit Euler.
The absorbed flux is a personality constant folding solar, albedo and internal
dissipation into one number, tuned so the equilibrium sits where the mission
telemetry should read.
"""

from __future__ import annotations

from dataclasses import dataclass

STEFAN_BOLTZMANN = 5.670374419e-8   # W m^-2 K^-4


@dataclass
class ThermalState:
    temperature_K: float

    @property
    def temperature_C(self) -> float:
        return self.temperature_K - 273.15

    def to_dict(self) -> dict:
        return {"temperature_K": self.temperature_K}


def equilibrium_K(absorbed_mW: float, heater_mW: float,
                  emissivity: float, area_m2: float) -> float:
    p_in = (absorbed_mW + heater_mW) / 1000.0
    return (p_in / (emissivity * STEFAN_BOLTZMANN * area_m2)) ** 0.25


def step_thermal(state: ThermalState, absorbed_mW: float, heater_mW: float,
                 emissivity: float, area_m2: float, heat_capacity_J_K: float,
                 dt_s: float) -> ThermalState:
    if dt_s <= 0:
        raise ValueError("dt must be positive")
    t = state.temperature_K
    radiated_W = emissivity * STEFAN_BOLTZMANN * area_m2 * t ** 4
    p_net_W = (absorbed_mW + heater_mW) / 1000.0 - radiated_W
    return ThermalState(temperature_K=t + dt_s * p_net_W / heat_capacity_J_K)
