"""Service orchestration.

Three jobs live here: composing the full stack (simulation, hub, flight
software, ground endpoint) against either clock; generating a ready-to-run
mission configuration with the ground station placed so a pass happens
shortly after startup; and replaying scripted operator sessions through a
headless console for tests and incident reproduction.
"""

from __future__ import annotations

import os
import signal
import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional

from . import webapi
from .clock import AnchoredClock, VirtualClock, to_datetime
from .config import (ConfigError, GroundConfiguration, GroundStation,
                     SatellitePersonality, SATELLITE_FILENAME,
                     GROUND_FILENAME, load_mission, lookup_location,
                     parse_sim_start, save_ground, save_personality,
                     default_tle)
from .eventlog import EventLog, JsonlSink, MemorySink
from .flightsw import FsNode
from .hub import RadioHub, predict_passes
from .mcs import McsSession, GroundEndpoint, TelnetServer
from .physics.camera import TileLibrary
from .physics.world import SpacecraftSimulation
from .runtime import RealDriver, VirtualDriver


class AlreadyRunning(Exception):
    pass


class PortInUse(Exception):
    def __init__(self, port: int, what: str):
        super().__init__(f"port {port} already in use ({what})")
        self.port = port
        self.what = what


PID_FILENAME = "decoysat.pid"
EVENTS_FILENAME = "events.jsonl"
AOS_TARGET_OFFSET_S = 150.0


def _tiles_dir() -> str:
    return os.path.join(os.path.dirname(__file__), "data", "tiles")


@dataclass
class Stack:
    """Everything wired together; the same shape in both clock modes."""
    personality: SatellitePersonality
    cfg: GroundConfiguration
    clock: object
    sink: object
    log: EventLog
    world: SpacecraftSimulation
    hub: RadioHub
    driver: object
    fsnode: FsNode
    endpoint: GroundEndpoint
    session_factory: Callable

    def close(self) -> None:
        self.endpoint.close()
        self.fsnode.close()
        self.log.flush()
        self.log.close()


def build_stack(personality: SatellitePersonality, cfg: GroundConfiguration,
                virtual: bool = True, log_path: Optional[str] = None) -> Stack:
    tle = personality.tle
    start = parse_sim_start(cfg, tle.epoch).timestamp()
    # Real mode runs at wall rate but on the mission timeline, so the
    # world an intruder observes is consistent with the configured epoch.
    clock = VirtualClock(start) if virtual else AnchoredClock(start)
    sink = JsonlSink(log_path) if log_path else MemorySink()
    log = EventLog(sink, clock)
    world = SpacecraftSimulation(personality, clock.timestamp())
    hub = RadioHub(tle, cfg, clock, log,
                   ground_nodes={personality.node_mcs})
    driver = VirtualDriver(clock, hub) if virtual else RealDriver(clock, hub)
    tiles = TileLibrary(_tiles_dir())
    fsnode = FsNode(personality, cfg, world, hub, clock, log, driver,
                    tile_library=tiles)
    endpoint = GroundEndpoint(personality, cfg, hub, clock, driver, log)

    def world_tick():
        # Keep the physics aligned with the shared clock: in virtual mode
        # this is one exact 1 s step; in real mode it catches up after
        # scheduler stalls in bounded chunks.
        while clock.timestamp() - world.state.t >= 1.0:
            world.tick(min(10.0, clock.timestamp() - world.state.t, 1.0))

    driver.register_periodic(1.0, world_tick, allow_nested=True)

    last_in_pass = [hub.in_pass(clock.timestamp())]

    def pass_watch():
        now = clock.timestamp()
        in_pass = hub.in_pass(now)
        if in_pass != last_in_pass[0]:
            last_in_pass[0] = in_pass
            log.append("sim", {"event": "aos" if in_pass else "los",
                               "elevation_deg": round(hub.elevation_now(now), 2)})

    driver.register_periodic(1.0, pass_watch, allow_nested=True)

    def session_factory(peer: str = "local", output_cb=None) -> McsSession:
        return McsSession(endpoint, fsnode.table, log, clock, driver,
                          peer=peer, output_cb=output_cb)

    return Stack(personality=personality, cfg=cfg, clock=clock, sink=sink,
                 log=log, world=world, hub=hub, driver=driver, fsnode=fsnode,
                 endpoint=endpoint, session_factory=session_factory)


# ------------------------------------------------------------------ bootstrap

GOOD_PASS_MIN_EL_DEG = 25.0
PASS_SEARCH_DAYS = 3.0


def pick_start_instant(tle, station: GroundStation,
                       requested_start_s: float) -> tuple:
    """Choose the mission start so a usable pass rises shortly after it.

    The ground station sits at the city's real coordinates; the pass
    schedule over it is fixed by the orbit, so the free variable is where
    on the timeline the mission begins. Picks the first pass at or after
    the requested start that culminates high enough for a mostly clean
    link, and backs the start up so acquisition happens AOS_TARGET_OFFSET_S
    in. Returns (start_epoch_s, first_pass).
    """
    search_from = requested_start_s + AOS_TARGET_OFFSET_S + 10.0
    passes = predict_passes(tle, station, search_from,
                            PASS_SEARCH_DAYS * 86400.0)
    if not passes:
        raise ConfigError(
            f"no pass over {station.name!r} within {PASS_SEARCH_DAYS:g} days "
            "of the requested start; check the TLE inclination against the "
            "station latitude")
    chosen = next((p for p in passes
                   if p.max_elevation_deg >= GOOD_PASS_MIN_EL_DEG),
                  max(passes, key=lambda p: p.max_elevation_deg))
    return chosen.aos - AOS_TARGET_OFFSET_S, chosen


SUPPORTED_ECOSYSTEMS = ("csp",)


def bootstrap(ecosystem: str, satellite_name: str, location_name: str,
              out_dir: Optional[str] = None,
              start_time: str = "epoch",
              startup_window_s: Optional[int] = None,
              tle=None):
    """Generate a mission configuration anchored at a city.

    The ground station inherits the city's latitude; its longitude is chosen
    from the orbit so the satellite rises over it within the startup window
    (a demo operator should see a pass a couple of minutes after start, not
    half a day later). Returns (personality, ground_cfg); also writes
    satellite.cfg / ground.cfg when out_dir is given.
    """
    if ecosystem not in SUPPORTED_ECOSYSTEMS:
        raise ConfigError(f"unsupported ecosystem {ecosystem!r}; "
                          f"supported: {', '.join(SUPPORTED_ECOSYSTEMS)}")
    tle = tle or default_tle()
    city = lookup_location(location_name)
    personality = SatellitePersonality(name=satellite_name, tle=tle)
    cfg = GroundConfiguration(
        mission_display_name=f"{satellite_name} Mission Operations",
        logo_text=satellite_name[:12].upper(),
        sim_start_utc=start_time,
        ground_station=city,
    )
    if startup_window_s is not None:
        cfg.startup_window_s = int(startup_window_s)
    requested = parse_sim_start(cfg, tle.epoch).timestamp()
    start_s, _first = pick_start_instant(tle, city, requested)
    cfg.sim_start_utc = (to_datetime(start_s)
                         .strftime("%Y-%m-%dT%H:%M:%SZ"))
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        save_personality(personality,
                         os.path.join(out_dir, SATELLITE_FILENAME))
        save_ground(cfg, os.path.join(out_dir, GROUND_FILENAME))
    return personality, cfg


# -------------------------------------------------------------------- replay

DIRECTIVE_TIME = "@t+"
DIRECTIVE_PASS = "@pass"


def run_replay(personality: SatellitePersonality, cfg: GroundConfiguration,
               script_text: str, log_path: Optional[str] = None):
    """Feed a script of operator lines through a headless virtual session.

    Script grammar: '#' comments and blank lines are skipped; '@t+Ns'
    advances the virtual clock N seconds; '@pass' jumps to 30 s after the
    next acquisition of signal; anything else is typed into the console.
    Returns (transcript_text, stack); the caller owns stack.close().
    """
    stack = build_stack(personality, cfg, virtual=True, log_path=log_path)
    transcript: list = []
    session = stack.session_factory(peer="replay",
                                    output_cb=transcript.append)
    stack.endpoint.add_watcher(transcript.append)
    try:
        for raw in script_text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            transcript.append(f"> {line}")
            if line.startswith(DIRECTIVE_TIME):
                spec = line[len(DIRECTIVE_TIME):].rstrip("sS")
                try:
                    seconds = float(spec)
                except ValueError:
                    transcript.append(f"[ERROR] bad time directive: {line}")
                    continue
                stack.driver.advance(max(0.0, seconds))
            elif line == DIRECTIVE_PASS:
                now = stack.clock.timestamp()
                horizon = 3.0 * personality.tle.period_s
                upcoming = [p for p in stack.hub.predict_passes(now, horizon)
                            if p.aos > now]
                if not upcoming:
                    transcript.append("[ERROR] no upcoming pass in horizon")
                    continue
                jump = upcoming[0].aos + 30.0 - now
                stack.driver.advance(jump)
                ts = int(stack.clock.timestamp())
                transcript.append(
                    f"[INFO ][{ts}][Sim] Advanced {int(round(jump))}s to "
                    "next pass")
            else:
                session.feed_line(raw)
        session.close()
        stack.log.flush()
        return "\n".join(transcript) + "\n", stack
    except Exception:
        stack.close()
        raise


# ------------------------------------------------------------------ real mode

class Launcher:
    """Foreground supervisor for a deployed honeypot."""

    def __init__(self, config_dir: str, host: str = "0.0.0.0"):
        self.config_dir = os.path.abspath(config_dir)
        self.host = host
        self.stack: Optional[Stack] = None
        self.telnet: Optional[TelnetServer] = None
        self.http: Optional[webapi.GatewayServer] = None
        self._hub_stop = threading.Event()
        self._hub_socket = None
        self._pump_thread: Optional[threading.Thread] = None
        self.ready_lines: list = []

    @property
    def pidfile(self) -> str:
        return os.path.join(self.config_dir, PID_FILENAME)

    def _check_not_running(self) -> None:
        if not os.path.exists(self.pidfile):
            return
        try:
            with open(self.pidfile, encoding="utf-8") as fh:
                pid = int(fh.read().strip())
            os.kill(pid, 0)
        except (ValueError, ProcessLookupError, PermissionError):
            os.unlink(self.pidfile)
            return
        raise AlreadyRunning(f"pid {pid} holds {self.pidfile}")

    def start(self, telnet_port: Optional[int] = None,
              http_port: Optional[int] = None,
              hub_port: Optional[int] = None) -> dict:
        self._check_not_running()
        personality, cfg = load_mission(self.config_dir)
        log_path = os.path.join(self.config_dir, EVENTS_FILENAME)
        stack = build_stack(personality, cfg, virtual=False,
                            log_path=log_path)
        self.stack = stack
        stack.log.append("system", {"event": "startup",
                                    "config_dir": self.config_dir})

        ports = {}
        try:
            self.http = webapi.GatewayServer(
                self.host,
                http_port if http_port is not None else cfg.http_port,
                webapi.ApiContext(cfg, stack.log, stack.clock, hub=stack.hub,
                                  beacon_fn=stack.fsnode.gateway.get_beacon,
                                  static_dir=cfg.static_dir))
        except OSError as exc:
            stack.close()
            self.stack = None
            raise PortInUse(http_port if http_port is not None
                            else cfg.http_port, "http") from exc
        ports["http"] = self.http.start()
        self._ready(f"gateway-api listening on :{ports['http']}")

        self.telnet = TelnetServer(
            self.host,
            telnet_port if telnet_port is not None else cfg.telnet_port,
            stack.session_factory, stack.clock, stack.log)
        try:
            ports["telnet"] = self.telnet.start()
        except OSError as exc:
            self.stop()
            raise PortInUse(telnet_port if telnet_port is not None
                            else cfg.telnet_port, "telnet") from exc
        self._ready(f"mcs telnet listening on :{ports['telnet']}")

        try:
            self._hub_socket = stack.hub.serve_tcp(
                hub_port if hub_port is not None else cfg.hub_port,
                self._hub_stop)
        except OSError as exc:
            self.stop()
            raise PortInUse(hub_port if hub_port is not None
                            else cfg.hub_port, "hub") from exc
        ports["hub"] = self._hub_socket.getsockname()[1]
        self._ready(f"radio hub listening on :{ports['hub']}")

        self._pump_thread = threading.Thread(
            target=stack.hub.run_pump_loop, args=(self._hub_stop,),
            daemon=True, name="hub-pump")
        self._pump_thread.start()
        stack.driver.start()
        self._ready("simulation running")

        with open(self.pidfile, "w", encoding="utf-8") as fh:
            fh.write(str(os.getpid()))
        return ports

    def _ready(self, text: str) -> None:
        self.ready_lines.append(f"[ready] {text}")

    def stop(self) -> None:
        self._hub_stop.set()
        if self.telnet is not None:
            self.telnet.stop()
            self.telnet = None
        if self.http is not None:
            self.http.stop()
            self.http = None
        if self._hub_socket is not None:
            try:
                self._hub_socket.close()
            except OSError:
                pass
            self._hub_socket = None
        if self.stack is not None:
            if hasattr(self.stack.driver, "stop"):
                self.stack.driver.stop()
            self.stack.log.append("system", {"event": "shutdown"})
            self.stack.close()
            self.stack = None
        if os.path.exists(self.pidfile):
            try:
                with open(self.pidfile, encoding="utf-8") as fh:
                    if int(fh.read().strip()) == os.getpid():
                        os.unlink(self.pidfile)
            except (ValueError, OSError):
                pass

    def run_until_interrupt(self) -> None:
        stop = threading.Event()

        def _handler(signum, frame):
            stop.set()

        signal.signal(signal.SIGINT, _handler)
        signal.signal(signal.SIGTERM, _handler)
        while not stop.is_set():
            time.sleep(0.5)
        self.stop()


def signal_running(config_dir: str) -> bool:
    """Ask a foreground launcher in another process to shut down."""
    pidfile = os.path.join(os.path.abspath(config_dir), PID_FILENAME)
    if not os.path.exists(pidfile):
        return False
    try:
        with open(pidfile, encoding="utf-8") as fh:
            pid = int(fh.read().strip())
        os.kill(pid, signal.SIGTERM)
        return True
    except (ValueError, ProcessLookupError, PermissionError):
        return False
