"""Mission configuration: satellite personality and ground segment.

A deployment is two human-editable key/value files (INI syntax): satellite.cfg
describing the spacecraft being impersonated, ground.cfg describing the ground
segment. Both round-trip exactly through load/save.
"""

from __future__ import annotations

import configparser
import io
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources

from .tle import TleSet, parse_tle

STEFAN_BOLTZMANN = 5.670374419e-8   # W m^-2 K^-4

SATELLITE_FILENAME = "satellite.cfg"
GROUND_FILENAME = "ground.cfg"


class ConfigError(ValueError):
    pass


class ValidationError(ConfigError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


class UnknownLocation(ConfigError):
    pass


@dataclass
class SatellitePersonality:
    name: str
    tle: TleSet
    node_obc: int = 1
    node_eps: int = 2
    node_payload: int = 3
    node_mcs: int = 10
    mass_kg: float = 4.0
    inertia_diag_kgm2: tuple = (0.034, 0.042, 0.036)
    battery_capacity_mAh: float = 5000.0
    battery_nominal_mV: int = 8000
    solar_panel_area_m2: float = 0.03
    solar_panel_efficiency: float = 0.30
    base_load_mW: float = 592.0
    heater_load_mW: float = 2000.0
    heat_capacity_J_per_K: float = 900.0
    emissivity: float = 0.9
    radiating_area_m2: float = 0.06
    absorbed_solar_mW: float = -1.0    # <0: derive so equilibrium sits at 303 K
    initial_attitude_quat: tuple = (1.0, 0.0, 0.0, 0.0)
    initial_omega_rad_s: tuple = (0.0, 0.05, 0.0)
    camera_max_px: int = 2048
    beacon_period_s: float = 30.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.absorbed_solar_mW < 0:
            # Tune the absorbed flux so the radiative equilibrium temperature
            # lands at 303 K with the heater off.
            self.absorbed_solar_mW = (
                self.emissivity * STEFAN_BOLTZMANN * self.radiating_area_m2
                * 303.0 ** 4 * 1000.0)

    @property
    def node_map(self) -> dict:
        return {"obc": self.node_obc, "eps": self.node_eps,
                "payload": self.node_payload, "mcs": self.node_mcs}


@dataclass
class GroundStation:
    name: str
    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0


@dataclass
class GroundConfiguration:
    mission_display_name: str = "Mission Control"
    logo_text: str = "MCS"
    ground_station: GroundStation = field(
        default_factory=lambda: GroundStation("default", 0.0, 0.0, 0.0))
    telnet_port: int = 23
    http_port: int = 80
    hub_port: int = 6000
    activation_keyword: str = "activate"
    link_delay_ms: int = 800
    horizon_mask_deg: float = 0.0
    p_max_drop: float = 0.9
    el_ref_deg: float = 30.0
    seed: int = 1337
    sim_start_utc: str = "epoch"     # "epoch", "now", or ISO-8601
    startup_window_s: int = 360
    lure_username: str = "admin"
    lure_password: str = "admin"
    static_dir: str = ""
    via_name: str = "ZMQHUB"
    # Telnet greeting; {mission} and {keyword} are substituted. Empty picks
    # the built-in default.
    banner_template: str = ""


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _fmt_tuple(t) -> str:
    return ", ".join(_fmt_float(v) for v in t)


def _parse_tuple(s: str, n: int, field_name: str) -> tuple:
    parts = [p for p in s.replace(",", " ").split() if p]
    if len(parts) != n:
        raise ValidationError(field_name, f"expected {n} numbers, got {len(parts)}")
    return tuple(float(p) for p in parts)


def _normalized_quat(q: tuple) -> tuple:
    # Files may carry an unnormalized rotation; scale is not information.
    n = math.sqrt(sum(c * c for c in q))
    if n <= 0.0 or not math.isfinite(n):
        raise ValidationError("initial_attitude_quat", f"unnormalizable: {q}")
    return tuple(c / n for c in q)


def validate_personality(p: SatellitePersonality) -> None:
    def positive(name, value):
        if not (value > 0):
            raise ValidationError(name, f"must be positive, got {value}")

    if not p.name or any(c in p.name for c in "\r\n"):
        raise ValidationError("name", "must be a non-empty single-line string")
    positive("mass_kg", p.mass_kg)
    for axis, v in zip("xyz", p.inertia_diag_kgm2):
        positive(f"inertia_diag_kgm2.{axis}", v)
    positive("battery_capacity_mAh", p.battery_capacity_mAh)
    positive("battery_nominal_mV", p.battery_nominal_mV)
    positive("solar_panel_area_m2", p.solar_panel_area_m2)
    if not (0.0 < p.solar_panel_efficiency <= 1.0):
        raise ValidationError("solar_panel_efficiency", "must be in (0, 1]")
    if p.base_load_mW < 0 or p.heater_load_mW < 0:
        raise ValidationError("base_load_mW", "loads must be non-negative")
    positive("heat_capacity_J_per_K", p.heat_capacity_J_per_K)
    if not (0.0 < p.emissivity <= 1.0):
        raise ValidationError("emissivity", "must be in (0, 1]")
    positive("radiating_area_m2", p.radiating_area_m2)
    positive("absorbed_solar_mW", p.absorbed_solar_mW)
    qn = math.sqrt(sum(c * c for c in p.initial_attitude_quat))
    if abs(qn - 1.0) > 1e-9:
        raise ValidationError("initial_attitude_quat",
                              f"norm must be 1 within 1e-9, got {qn!r}")
    if not (0.0 <= p.tle.eccentricity < 1.0):
        raise ValidationError("eccentricity",
                              f"must be in [0, 1), got {p.tle.eccentricity}")
    if not (0 < p.camera_max_px <= 8192):
        raise ValidationError("camera_max_px", "must be in (0, 8192]")
    positive("beacon_period_s", p.beacon_period_s)
    nodes = [p.node_obc, p.node_eps, p.node_payload, p.node_mcs]
    if len(set(nodes)) != len(nodes):
        raise ValidationError("nodes", f"node ids must be distinct: {nodes}")
    for n in nodes:
        if not (0 <= n <= 31):
            raise ValidationError("nodes", f"node id {n} outside [0, 31]")
    for k, v in p.extra.items():
        if not isinstance(k, str) or not isinstance(v, str):
            raise ValidationError("extra", "extension map must be string -> string")


def validate_ground(g: GroundConfiguration) -> None:
    gs = g.ground_station
    if not (-90.0 <= gs.latitude_deg <= 90.0):
        raise ValidationError("ground_station.latitude_deg", "outside [-90, 90]")
    if not (-180.0 <= gs.longitude_deg <= 180.0):
        raise ValidationError("ground_station.longitude_deg", "outside [-180, 180]")
    for name, port in (("telnet_port", g.telnet_port),
                       ("http_port", g.http_port), ("hub_port", g.hub_port)):
        if not (0 < port < 65536):
            raise ValidationError(name, f"bad TCP port {port}")
    if not g.activation_keyword or " " in g.activation_keyword:
        raise ValidationError("activation_keyword", "must be a single word")
    if g.link_delay_ms < 0:
        raise ValidationError("link_delay_ms", "must be non-negative")
    if not (0.0 <= g.p_max_drop <= 1.0):
        raise ValidationError("p_max_drop", "must be in [0, 1]")
    if g.el_ref_deg <= 0:
        raise ValidationError("el_ref_deg", "must be positive")
    if not (0.0 <= g.horizon_mask_deg < 90.0):
        raise ValidationError("horizon_mask_deg", "outside [0, 90)")
    if g.sim_start_utc not in ("epoch", "now"):
        try:
            parse_sim_start(g, epoch=datetime.now(timezone.utc))
        except ValueError:
            raise ValidationError("sim_start_utc",
                                  f"not 'epoch', 'now' or ISO-8601: {g.sim_start_utc!r}")


def parse_sim_start(g: GroundConfiguration, epoch: datetime) -> datetime:
    """Resolve the configured simulation start to an absolute UTC time."""
    if g.sim_start_utc == "epoch":
        return epoch
    if g.sim_start_utc == "now":
        return datetime.now(timezone.utc)
    dt = datetime.fromisoformat(g.sim_start_utc.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


# ---------------------------------------------------------------- file format

def personality_to_text(p: SatellitePersonality) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["satellite"] = {
        "name": p.name,
        "mass_kg": _fmt_float(p.mass_kg),
        "inertia_diag_kgm2": _fmt_tuple(p.inertia_diag_kgm2),
        "battery_capacity_mAh": _fmt_float(p.battery_capacity_mAh),
        "battery_nominal_mV": str(p.battery_nominal_mV),
        "solar_panel_area_m2": _fmt_float(p.solar_panel_area_m2),
        "solar_panel_efficiency": _fmt_float(p.solar_panel_efficiency),
        "base_load_mW": _fmt_float(p.base_load_mW),
        "heater_load_mW": _fmt_float(p.heater_load_mW),
        "heat_capacity_J_per_K": _fmt_float(p.heat_capacity_J_per_K),
        "emissivity": _fmt_float(p.emissivity),
        "radiating_area_m2": _fmt_float(p.radiating_area_m2),
        "absorbed_solar_mW": _fmt_float(p.absorbed_solar_mW),
        "initial_attitude_quat": _fmt_tuple(p.initial_attitude_quat),
        "initial_omega_rad_s": _fmt_tuple(p.initial_omega_rad_s),
        "camera_max_px": str(p.camera_max_px),
        "beacon_period_s": _fmt_float(p.beacon_period_s),
    }
    cp["nodes"] = {
        "obc": str(p.node_obc),
        "eps": str(p.node_eps),
        "payload": str(p.node_payload),
        "mcs": str(p.node_mcs),
    }
    cp["tle"] = {"name": p.tle.name, "line1": p.tle.line1, "line2": p.tle.line2}
    if p.extra:
        cp["extra"] = dict(p.extra)
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def personality_from_text(text: str) -> SatellitePersonality:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable satellite config: {exc}") from exc
    if "satellite" not in cp or "tle" not in cp:
        raise ConfigError("satellite config needs [satellite] and [tle] sections")
    s = cp["satellite"]
    t = cp["tle"]
    nodes = cp["nodes"] if "nodes" in cp else {}
    try:
        tle = parse_tle(t.get("name", s.get("name", "SAT")), t["line1"], t["line2"])
        p = SatellitePersonality(
            name=s["name"],
            tle=tle,
            node_obc=int(nodes.get("obc", 1)),
            node_eps=int(nodes.get("eps", 2)),
            node_payload=int(nodes.get("payload", 3)),
            node_mcs=int(nodes.get("mcs", 10)),
            mass_kg=float(s.get("mass_kg", 4.0)),
            inertia_diag_kgm2=_parse_tuple(
                s.get("inertia_diag_kgm2", "0.034, 0.042, 0.036"), 3, "inertia_diag_kgm2"),
            battery_capacity_mAh=float(s.get("battery_capacity_mAh", 5000.0)),
            battery_nominal_mV=int(s.get("battery_nominal_mV", 8000)),
            solar_panel_area_m2=float(s.get("solar_panel_area_m2", 0.03)),
            solar_panel_efficiency=float(s.get("solar_panel_efficiency", 0.30)),
            base_load_mW=float(s.get("base_load_mW", 592.0)),
            heater_load_mW=float(s.get("heater_load_mW", 2000.0)),
            heat_capacity_J_per_K=float(s.get("heat_capacity_J_per_K", 900.0)),
            emissivity=float(s.get("emissivity", 0.9)),
            radiating_area_m2=float(s.get("radiating_area_m2", 0.06)),
            absorbed_solar_mW=float(s.get("absorbed_solar_mW", -1.0)),
            initial_attitude_quat=_normalized_quat(_parse_tuple(
                s.get("initial_attitude_quat", "1, 0, 0, 0"), 4, "initial_attitude_quat")),
            initial_omega_rad_s=_parse_tuple(
                s.get("initial_omega_rad_s", "0, 0.05, 0"), 3, "initial_omega_rad_s"),
            camera_max_px=int(s.get("camera_max_px", 2048)),
            beacon_period_s=float(s.get("beacon_period_s", 30.0)),
            extra=dict(cp["extra"]) if "extra" in cp else {},
        )
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad satellite config field: {exc}") from exc
    validate_personality(p)
    return p


def ground_to_text(g: GroundConfiguration) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["ground"] = {
        "mission_display_name": g.mission_display_name,
        "logo_text": g.logo_text,
        "telnet_port": str(g.telnet_port),
        "http_port": str(g.http_port),
        "hub_port": str(g.hub_port),
        "activation_keyword": g.activation_keyword,
        "link_delay_ms": str(g.link_delay_ms),
        "horizon_mask_deg": _fmt_float(g.horizon_mask_deg),
        "p_max_drop": _fmt_float(g.p_max_drop),
        "el_ref_deg": _fmt_float(g.el_ref_deg),
        "seed": str(g.seed),
        "sim_start_utc": g.sim_start_utc,
        "startup_window_s": str(g.startup_window_s),
        "lure_username": g.lure_username,
        "lure_password": g.lure_password,
        "static_dir": g.static_dir,
        "via_name": g.via_name,
        "banner_template": g.banner_template,
    }
    cp["ground_station"] = {
        "name": g.ground_station.name,
        "latitude_deg": _fmt_float(g.ground_station.latitude_deg),
        "longitude_deg": _fmt_float(g.ground_station.longitude_deg),
        "altitude_m": _fmt_float(g.ground_station.altitude_m),
    }
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def ground_from_text(text: str) -> GroundConfiguration:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable ground config: {exc}") from exc
    if "ground" not in cp:
        raise ConfigError("ground config needs a [ground] section")
    gsec = cp["ground"]
    st = cp["ground_station"] if "ground_station" in cp else {}
    try:
        g = GroundConfiguration(
            mission_display_name=gsec.get("mission_display_name", "Mission Control"),
            logo_text=gsec.get("logo_text", "MCS"),
            ground_station=GroundStation(
                name=st.get("name", "default"),
                latitude_deg=float(st.get("latitude_deg", 0.0)),
                longitude_deg=float(st.get("longitude_deg", 0.0)),
                altitude_m=float(st.get("altitude_m", 0.0)),
            ),
            telnet_port=int(gsec.get("telnet_port", 23)),
            http_port=int(gsec.get("http_port", 80)),
            hub_port=int(gsec.get("hub_port", 6000)),
            activation_keyword=gsec.get("activation_keyword", "activate"),
            link_delay_ms=int(gsec.get("link_delay_ms", 800)),
            horizon_mask_deg=float(gsec.get("horizon_mask_deg", 0.0)),
            p_max_drop=float(gsec.get("p_max_drop", 0.9)),
            el_ref_deg=float(gsec.get("el_ref_deg", 30.0)),
            seed=int(gsec.get("seed", 1337)),
            sim_start_utc=gsec.get("sim_start_utc", "epoch"),
            startup_window_s=int(gsec.get("startup_window_s", 360)),
            lure_username=gsec.get("lure_username", "admin"),
            lure_password=gsec.get("lure_password", "admin"),
            static_dir=gsec.get("static_dir", ""),
            via_name=gsec.get("via_name", "ZMQHUB"),
            banner_template=gsec.get("banner_template", ""),
        )
    except ValueError as exc:
        raise ConfigError(f"bad ground config field: {exc}") from exc
    validate_ground(g)
    return g


def load_personality(path: str) -> SatellitePersonality:
    with open(path, encoding="utf-8") as fh:
        return personality_from_text(fh.read())


def save_personality(p: SatellitePersonality, path: str) -> None:
    validate_personality(p)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(personality_to_text(p))


def load_ground(path: str) -> GroundConfiguration:
    with open(path, encoding="utf-8") as fh:
        return ground_from_text(fh.read())


def save_ground(g: GroundConfiguration, path: str) -> None:
    validate_ground(g)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(ground_to_text(g))


def load_mission(config_dir: str):
    p = load_personality(os.path.join(config_dir, SATELLITE_FILENAME))
    g = load_ground(os.path.join(config_dir, GROUND_FILENAME))
    return p, g


# ------------------------------------------------------------------ gazetteer

_GAZETTEER_CACHE: dict = {}


def _load_gazetteer() -> dict:
    if not _GAZETTEER_CACHE:
        text = resources.files("decoysat.data").joinpath("gazetteer.txt").read_text()
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, lat, lon, alt = line.split()
            _GAZETTEER_CACHE[name.lower()] = (
                name.replace("_", " "), float(lat), float(lon), float(alt))
    return _GAZETTEER_CACHE


def lookup_location(name: str) -> GroundStation:
    """Resolve a city name to a GroundStation. Raises UnknownLocation."""
    table = _load_gazetteer()
    key = name.strip().lower().replace(" ", "_")
    if key not in table:
        raise UnknownLocation(f"no gazetteer entry for {name!r}")
    display, lat, lon, alt = table[key]
    return GroundStation(name=display, latitude_deg=lat,
                         longitude_deg=lon, altitude_m=alt)


def gazetteer_size() -> int:
    return len(_load_gazetteer())


def default_tle() -> TleSet:
    text = resources.files("decoysat.data").joinpath("default.tle").read_text()
    lines = [l for l in text.splitlines() if l.strip()]
    return parse_tle(lines[0], lines[1], lines[2])
