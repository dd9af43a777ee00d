"""Radio hub: the only path between ground and space nodes.

Social contract of the deception: packets crossing the ground/space boundary
only flow while the satellite is above the ground station's horizon mask, are
randomly lost at low elevation, and arrive late by the configured link delay
plus light time. Ground-to-ground traffic always flows. The hub never tells
senders what happened; outcomes land in the event log.

A small TCP adapter exposes the router to external processes: connect, send
one hello byte (your node id), then exchange 4-byte length-prefixed packets.
"""

from __future__ import annotations

import heapq
import logging
import math
import random
import socket
import struct
import threading
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import csp
from .config import GroundConfiguration, GroundStation
from .physics import orbit
from .tle import TleSet

logger = logging.getLogger(__name__)

OUTCOME_DELIVERED = "delivered"
OUTCOME_GATED = "gated-no-pass"
OUTCOME_DROPPED = "dropped-loss"
OUTCOME_UNKNOWN = "unknown-destination"

BISECT_TOLERANCE_S = 0.5
COARSE_STEP_S = 30.0


class UnknownDestinationNode(Exception):
    pass


@dataclass
class PassWindow:
    aos: float                  # Unix seconds
    los: float
    max_elevation_deg: float
    t_max: float

    @property
    def duration_s(self) -> float:
        return self.los - self.aos

    def contains(self, t: float) -> bool:
        return self.aos <= t <= self.los


def drop_probability(elevation_deg: float, p_max_drop: float, el_ref_deg: float) -> float:
    """Loss probability rises linearly as elevation falls below el_ref."""
    x = 1.0 - elevation_deg / el_ref_deg
    return p_max_drop * min(1.0, max(0.0, x))


def predict_passes(tle: TleSet, station: GroundStation, start: float,
                   duration_s: float, horizon_mask_deg: float = 0.0,
                   coarse_step_s: float = COARSE_STEP_S) -> list[PassWindow]:
    """Pass windows over [start, start+duration]. Boundaries refined by
    bisection to within BISECT_TOLERANCE_S."""
    lat, lon, alt = (station.latitude_deg, station.longitude_deg, station.altitude_m)

    def el(t):
        return float(orbit.elevation_deg(tle, lat, lon, alt, t)) - horizon_mask_deg

    times = np.arange(start, start + duration_s + coarse_step_s, coarse_step_s)
    elevations = orbit.elevation_deg(tle, lat, lon, alt, times) - horizon_mask_deg

    def bisect(lo, hi):
        f_lo = el(lo)
        while hi - lo > BISECT_TOLERANCE_S:
            mid = 0.5 * (lo + hi)
            if (el(mid) > 0.0) == (f_lo > 0.0):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    windows = []
    above = elevations[0] > 0.0
    aos = start if above else None
    for i in range(1, len(times)):
        now_above = elevations[i] > 0.0
        if now_above and not above:
            aos = bisect(times[i - 1], times[i])
        elif above and not now_above:
            los = bisect(times[i - 1], times[i])
            windows.append((aos, los))
            aos = None
        above = now_above
    end = start + duration_s
    if aos is not None:
        windows.append((aos, min(end, times[-1])))

    out = []
    for aos, los in windows:
        if los <= start or aos >= end:
            continue
        aos_c, los_c = max(aos, start), min(los, end)
        # Peak elevation by golden-section search inside the window.
        t_max, el_max = _peak(el, aos_c, los_c)
        out.append(PassWindow(aos=aos_c, los=los_c,
                              max_elevation_deg=el_max + horizon_mask_deg,
                              t_max=t_max))
    return out


def _peak(f, lo: float, hi: float) -> tuple:
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > 1.0:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    t = 0.5 * (a + b)
    return t, f(t)


@dataclass
class _Pending:
    due: float
    seq: int
    packet: csp.CspPacket
    dst: int

    def __lt__(self, other):
        return (self.due, self.seq) < (other.due, other.seq)


class RadioHub:
    """Router core. Mode-agnostic: submit() schedules, pump() delivers due
    packets by invoking destination callbacks. A real-time deployment wraps
    pump() in a thread; replays call it from the virtual-time driver."""

    MAX_PENDING = 10_000

    def __init__(self, tle: TleSet, ground_cfg: GroundConfiguration, clock,
                 log, ground_nodes: set):
        self.tle = tle
        self.cfg = ground_cfg
        self.station = ground_cfg.ground_station
        self.clock = clock
        self.log = log
        self.ground_nodes = set(ground_nodes)
        self.rng = random.Random(ground_cfg.seed)
        self._nodes: dict[int, Callable] = {}
        self._pending: list[_Pending] = []
        self._seq = 0
        self._lock = threading.Lock()
        self._wakeup = threading.Condition(self._lock)
        self.stats: dict[int, dict] = {}

    # ------------------------------------------------------------- geometry

    def elevation_now(self, t: Optional[float] = None) -> float:
        t = self.clock.timestamp() if t is None else t
        return float(orbit.elevation_deg(
            self.tle, self.station.latitude_deg, self.station.longitude_deg,
            self.station.altitude_m, t))

    def in_pass(self, t: Optional[float] = None) -> bool:
        return self.elevation_now(t) > self.cfg.horizon_mask_deg

    def slant_range_km(self, t: Optional[float] = None) -> float:
        t = self.clock.timestamp() if t is None else t
        return float(orbit.slant_range_km(
            self.tle, self.station.latitude_deg, self.station.longitude_deg,
            self.station.altitude_m, t))

    def predict_passes(self, start: float, duration_s: float) -> list[PassWindow]:
        return predict_passes(self.tle, self.station, start, duration_s,
                              self.cfg.horizon_mask_deg)

    def reload_tle(self, tle: TleSet) -> None:
        """Atomic element-set swap. The orbit jumps; a pass in progress may
        end immediately. Queued packets keep their scheduled delivery."""
        with self._lock:
            self.tle = tle
        self.log.append("system", {"event": "tle-reload", "name": tle.name,
                                   "epoch": tle.epoch.isoformat()})

    # -------------------------------------------------------------- routing

    def register(self, node_id: int, callback: Callable) -> None:
        with self._lock:
            self._nodes[node_id] = callback
            self.stats.setdefault(node_id, {"tx": 0, "rx": 0})

    def unregister(self, node_id: int) -> None:
        with self._lock:
            self._nodes.pop(node_id, None)

    def _one_way_delay_s(self, crosses_link: bool, t: float) -> float:
        if not crosses_link:
            return 0.0
        light_ms = self.slant_range_km(t) / orbit.SPEED_OF_LIGHT_KM_S * 1000.0
        return (self.cfg.link_delay_ms + round(light_ms)) / 1000.0

    def submit(self, packet: csp.CspPacket, strict: bool = False) -> str:
        """Route one packet. Returns the outcome string (callers other than
        tests should not peek: the network does not report loss).

        strict=True raises UnknownDestinationNode instead of swallowing an
        unroutable destination; attacker-facing callers keep the default so
        probes at nonexistent nodes look like ordinary timeouts."""
        now = self.clock.timestamp()
        src_ground = packet.src in self.ground_nodes
        dst_ground = packet.dst in self.ground_nodes
        crosses = src_ground != dst_ground
        direction = "OUT" if src_ground else "INP"
        event = {
            "line": csp.format_log_line(direction, packet, self.cfg.via_name),
            "src": packet.src, "dst": packet.dst,
            "dport": packet.dport, "sport": packet.sport,
            "size": len(packet.payload),
        }

        with self._lock:
            known = packet.dst in self._nodes
            if known:
                self.stats.setdefault(packet.src, {"tx": 0, "rx": 0})
                self.stats[packet.src]["tx"] += 1

        if not known:
            event["outcome"] = OUTCOME_UNKNOWN
            self.log.append("route", event)
            if strict:
                raise UnknownDestinationNode(f"node {packet.dst} not attached")
            return OUTCOME_UNKNOWN

        if crosses:
            elevation = self.elevation_now(now)
            event["elevation_deg"] = round(elevation, 2)
            if elevation <= self.cfg.horizon_mask_deg:
                event["outcome"] = OUTCOME_GATED
                self.log.append("route", event)
                return OUTCOME_GATED
            p = drop_probability(elevation, self.cfg.p_max_drop, self.cfg.el_ref_deg)
            if self.rng.random() < p:
                event["outcome"] = OUTCOME_DROPPED
                event["p_drop"] = round(p, 4)
                self.log.append("route", event)
                return OUTCOME_DROPPED

        delay = self._one_way_delay_s(crosses, now)
        event["outcome"] = OUTCOME_DELIVERED
        event["delay_ms"] = int(delay * 1000)
        self.log.append("route", event)
        with self._lock:
            if len(self._pending) >= self.MAX_PENDING:
                self.log.append("system", {"event": "hub-queue-overflow",
                                           "dropped_dst": packet.dst})
                return OUTCOME_DROPPED
            self._seq += 1
            heapq.heappush(self._pending,
                           _Pending(now + delay, self._seq, packet, packet.dst))
            self._wakeup.notify_all()
        return OUTCOME_DELIVERED

    def next_due(self) -> Optional[float]:
        with self._lock:
            return self._pending[0].due if self._pending else None

    def pump(self) -> int:
        """Deliver everything due at the current clock time."""
        delivered = 0
        while True:
            now = self.clock.timestamp()
            with self._lock:
                if not self._pending or self._pending[0].due > now + 1e-9:
                    return delivered
                item = heapq.heappop(self._pending)
                callback = self._nodes.get(item.dst)
                if callback is not None:
                    self.stats.setdefault(item.dst, {"tx": 0, "rx": 0})
                    self.stats[item.dst]["rx"] += 1
            if callback is not None:
                try:
                    callback(item.packet)
                except Exception:
                    logger.exception("delivery callback failed for node %d", item.dst)
            delivered += 1

    # ------------------------------------------------------- real-time wrap

    def run_pump_loop(self, stop_event: threading.Event) -> None:
        while not stop_event.is_set():
            self.pump()
            with self._lock:
                due = self._pending[0].due if self._pending else None
            now = self.clock.timestamp()
            timeout = 0.2 if due is None else min(0.2, max(0.0, due - now))
            with self._wakeup:
                self._wakeup.wait(timeout=timeout)

    def serve_tcp(self, port: int, stop_event: threading.Event):
        """Raw packet access for external tooling. Returns the bound socket."""
        server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        server.bind(("0.0.0.0", port))
        server.listen(8)
        server.settimeout(0.5)

        def accept_loop():
            while not stop_event.is_set():
                try:
                    conn, addr = server.accept()
                except socket.timeout:
                    continue
                except OSError:
                    break
                threading.Thread(target=self._serve_client,
                                 args=(conn, addr, stop_event), daemon=True).start()
            server.close()

        threading.Thread(target=accept_loop, daemon=True).start()
        return server

    def _serve_client(self, conn, addr, stop_event):
        peer = f"{addr[0]}:{addr[1]}"
        node_id = None
        write_lock = threading.Lock()
        try:
            hello = conn.recv(1)
            if len(hello) != 1:
                return
            node_id = hello[0] & 0x1F

            def deliver(packet):
                with write_lock:
                    conn.sendall(csp.frame(packet))

            self.register(node_id, deliver)
            self.log.append("system", {"event": "hub-node-attached",
                                       "node": node_id}, peer=peer)
            while not stop_event.is_set():
                packet = csp.read_frame(conn)
                if packet is None:
                    break
                self.submit(packet)
        except (csp.TruncatedPacket, csp.MalformedHeader) as exc:
            self.log.append("system", {"event": "hub-bad-frame",
                                       "error": str(exc)}, peer=peer)
        except OSError:
            pass
        finally:
            if node_id is not None:
                self.unregister(node_id)
                self.log.append("system", {"event": "hub-node-detached",
                                           "node": node_id}, peer=peer)
            try:
                conn.close()
            except OSError:
                pass
