"""Request/reply boundary between flight software and the physics world.

Flight software never touches simulation state directly; it asks the gateway
for a (subsystem, target, op) and gets values back. One registry entry per
sensor. Optional per-target gaussian noise comes from personality extension
keys (noise_sigma_<target>), seeded so runs stay reproducible.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .config import SatellitePersonality
from .physics import camera as cam_mod
from .physics.world import SpacecraftSimulation


class UnknownTarget(Exception):
    pass


class BadParams(Exception):
    pass


@dataclass
class SimRequest:
    subsystem: str
    target: str
    op: str                  # "get" | "set"
    params: dict = field(default_factory=dict)


@dataclass
class SimReply:
    status: str              # "ok" | "error"
    values: dict = field(default_factory=dict)
    message: str = ""


class SimGateway:
    def __init__(self, world: SpacecraftSimulation,
                 tile_library: Optional[cam_mod.TileLibrary] = None,
                 image_store: Optional[Callable] = None,
                 uptime_fn: Optional[Callable] = None):
        self.world = world
        self.tiles = tile_library
        self.image_store = image_store          # fn(bytes) -> stored path
        self.uptime_fn = uptime_fn or (lambda: 0.0)
        seed = world.personality.extra.get("noise_seed", "0")
        self._noise_rng: dict = {}
        self._noise_seed = seed
        self._registry = {
            ("eps", "battery"): self._eps_battery,
            ("eps", "voltage"): self._eps_voltage,
            ("eps", "temperature"): self._eps_temperature,
            ("eps", "heater"): self._eps_heater,
            ("adcs", "gyroscope"): self._adcs_gyro,
            ("adcs", "accelerometer"): self._adcs_accel,
            ("adcs", "sun_sensor"): self._adcs_sun,
            ("adcs", "magnetometer"): self._adcs_mag,
            ("adcs", "gps"): self._adcs_gps,
            ("adcs", "torque"): self._adcs_torque,
            ("payload", "camera"): self._payload_camera,
        }

    @property
    def registry_keys(self) -> list:
        return sorted(self._registry.keys())

    def handle(self, request: SimRequest) -> SimReply:
        key = (request.subsystem, request.target)
        handler = self._registry.get(key)
        if handler is None:
            raise UnknownTarget(f"no registry entry for {key}")
        if request.op not in ("get", "set"):
            raise BadParams(f"op must be get or set, not {request.op!r}")
        values = handler(request.op, request.params or {})
        values = self._apply_noise(request.target, values)
        return SimReply(status="ok", values=values)

    # -------------------------------------------------------------- handlers

    def _require_get(self, op):
        if op != "get":
            raise BadParams("target is read-only")

    def _eps_battery(self, op, params):
        self._require_get(op)
        p = self.world.state.power
        t = self.world.state.thermal
        return {
            "vbatt_mV": p.battery_voltage_mV,
            "temp_bat_C": round(t.temperature_C, 2),
            "current_mA": round(p.current_mA, 1),
            "charge_mAh": round(p.charge_mAh, 1),
            "generation_mW": round(p.generation_mW, 1),
        }

    def _eps_voltage(self, op, params):
        self._require_get(op)
        return {"vbatt_mV": self.world.state.power.battery_voltage_mV}

    def _eps_temperature(self, op, params):
        self._require_get(op)
        return {"temp_eps_C": round(self.world.state.thermal.temperature_C, 2)}

    def _eps_heater(self, op, params):
        if op == "get":
            return {"on": int(self.world.state.power.heater_on)}
        if "on" not in params:
            raise BadParams("heater set needs {'on': 0|1}")
        self.world.set_heater(bool(int(params["on"])))
        return {"on": int(self.world.state.power.heater_on)}

    def _adcs_gyro(self, op, params):
        self._require_get(op)
        wx, wy, wz = self.world.state.attitude.omega_rad_s
        return {"wx_rad_s": wx, "wy_rad_s": wy, "wz_rad_s": wz}

    def _adcs_accel(self, op, params):
        self._require_get(op)
        # Free fall: residual accelerations are below this model's floor.
        return {"ax_m_s2": 0.0, "ay_m_s2": 0.0, "az_m_s2": 0.0}

    def _adcs_sun(self, op, params):
        self._require_get(op)
        from .physics.attitude import rotate_vector_inverse
        st = self.world.state
        sx, sy, sz = rotate_vector_inverse(st.attitude.q, st.orbital.sun_vector_eci)
        return {"sun_x": round(sx, 6), "sun_y": round(sy, 6),
                "sun_z": round(sz, 6), "sunlit": int(st.orbital.sunlit)}

    def _adcs_mag(self, op, params):
        self._require_get(op)
        bx, by, bz = self.world.state.magnetic.b_body_nT
        return {"bx_nT": round(bx, 1), "by_nT": round(by, 1), "bz_nT": round(bz, 1)}

    def _adcs_gps(self, op, params):
        self._require_get(op)
        o = self.world.state.orbital
        return {"lat_deg": round(o.latitude_deg, 4),
                "lon_deg": round(o.longitude_deg, 4),
                "alt_km": round(o.altitude_km, 2)}

    def _adcs_torque(self, op, params):
        if op == "get":
            x, y, z = self.world.torque_body_Nm
            return {"tx_Nm": x, "ty_Nm": y, "tz_Nm": z}
        try:
            torque = (float(params["x"]), float(params["y"]), float(params["z"]))
        except (KeyError, ValueError) as exc:
            raise BadParams("torque set needs numeric x, y, z") from exc
        self.world.set_torque(torque)
        return {"tx_Nm": torque[0], "ty_Nm": torque[1], "tz_Nm": torque[2]}

    def _payload_camera(self, op, params):
        cam = self.world.state.camera
        if op == "get":
            return cam.to_dict()
        if "width" in params or "height" in params:
            try:
                w = int(params.get("width", cam.width_px))
                h = int(params.get("height", cam.height_px))
            except ValueError as exc:
                raise BadParams("camera size must be integer pixels") from exc
            limit = self.world.personality.camera_max_px
            if not (0 < w <= limit and 0 < h <= limit):
                raise BadParams(f"camera size outside (0, {limit}]")
            self.world.state.camera = replace(cam, width_px=w, height_px=h)
            return {"width_px": w, "height_px": h}
        if params.get("capture"):
            if self.tiles is None:
                raise BadParams("no image library attached")
            new_cam, png = cam_mod.capture_image(cam, self.world.state.orbital, self.tiles)
            path = ""
            if self.image_store is not None:
                path = self.image_store(png)
                new_cam = cam_mod.with_path(new_cam, path)
            self.world.state.camera = new_cam
            return {"path": path, "size": len(png),
                    "width_px": new_cam.width_px, "height_px": new_cam.height_px}
        raise BadParams("camera set needs width/height or capture")

    # ---------------------------------------------------------------- beacon

    def get_beacon(self) -> dict:
        st = self.world.state
        beacon = {
            "vbatt_mV": st.power.battery_voltage_mV,
            "temp_C": round(st.thermal.temperature_C, 2),
            "lat_deg": round(st.orbital.latitude_deg, 4),
            "lon_deg": round(st.orbital.longitude_deg, 4),
            "alt_km": round(st.orbital.altitude_km, 2),
            "sunlit": bool(st.orbital.sunlit),
            "uptime_s": int(self.uptime_fn()),
        }
        if st.orbital.sunlit:
            beacon["generation_mW"] = round(st.power.generation_mW, 1)
        return beacon

    # ----------------------------------------------------------------- noise

    def _apply_noise(self, target: str, values: dict) -> dict:
        sigma = float(self.world.personality.extra.get(f"noise_sigma_{target}", 0.0))
        if sigma <= 0.0:
            return values
        rng = self._noise_rng.get(target)
        if rng is None:
            rng = random.Random(f"{self._noise_seed}:{target}")
            self._noise_rng[target] = rng
        out = {}
        for k, v in values.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                out[k] = v
            else:
                out[k] = v + rng.gauss(0.0, sigma)
        return out
