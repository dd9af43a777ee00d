"""Flight software node.

Owns the satellite side of the packet network: answers pings for the OBC,
EPS and payload addresses, dispatches telecommands arriving on the OBC
command port, assembles file uploads, runs the on-board flight plan, and
broadcasts the beacon. All state lives in this process; the only way in or
out is the radio hub.

Telecommand wire format: UTF-8 "name arg1 arg2 ..." to the OBC command
port. Replies are text on the sender's source port, split into parts when
long; reply header flags carry the status bits (bit0 error, bit1 more
parts follow) since the text itself is free-form.
"""

from __future__ import annotations

import json
import logging
from typing import Optional

from .. import csp
from ..runtime import SerialExecutor
from ..simgateway import SimGateway
from .flightplan import FlightPlan
from .services import CommandTable, DEFAULT_PAYLOAD_VARS, DEFAULT_STATUS_VARS
from .shell import ShellContext
from .telemetry import TelemetryFrame, TelemetryStore
from .vfs import FsCapExceeded, VirtualFs, seed_default

logger = logging.getLogger(__name__)

REPLY_FLAG_ERROR = 0x01
REPLY_FLAG_MORE = 0x02
REPLY_PART_BYTES = 900
FILE_CHUNK_BYTES = 512
PING_TIMEOUT_S = 3.0
RECV_DIR = "/recv_files"


class FsNode:
    """The simulated spacecraft's software stack, hub-facing."""

    def __init__(self, personality, ground_cfg, world, hub, clock, log,
                 driver, tile_library=None):
        self.personality = personality
        self.cfg = ground_cfg
        self.world = world
        self.hub = hub
        self.clock = clock
        self.log = log
        self.driver = driver

        self.node_id = personality.node_obc
        self.eps_node = personality.node_eps
        self.payload_node = personality.node_payload
        self.mcs_node = personality.node_mcs

        self.vfs = VirtualFs()
        seed_default(self.vfs, personality.name)
        self.boot_time = clock.timestamp()
        self.tm_store = TelemetryStore()
        self.plan = FlightPlan()
        self.status_vars = dict(DEFAULT_STATUS_VARS)
        self.payload_vars = dict(DEFAULT_PAYLOAD_VARS)
        self.gateway = SimGateway(world, tile_library=tile_library,
                                  image_store=self._store_image,
                                  uptime_fn=self.uptime_s)
        self.shell_ctx = ShellContext(self.vfs, personality.name,
                                      clock, self.uptime_s,
                                      load_spike_fn=self._load_spike)
        self.table = CommandTable(self)
        self.last_raw_args = ""

        self._eph = csp.EphemeralPorts()
        self._waiters: dict = {}        # sport -> list of (packet, arrival_ts)
        self._rx_files: dict = {}       # (src, name) -> {total, parts{seq: bytes}}
        self._img_count = 0
        self._load_spiked_until = 0.0
        self._executor = SerialExecutor(driver, name="fs-executor")

        hub.register(self.node_id, self._on_packet_obc)
        hub.register(self.eps_node, self._on_packet_subsystem)
        hub.register(self.payload_node, self._on_packet_subsystem)

        self._beacon_handle = driver.register_periodic(
            float(personality.beacon_period_s), self._send_beacon,
            allow_nested=True)
        self._plan_handle = driver.register_periodic(
            1.0, self._plan_tick, allow_nested=True)

    # --------------------------------------------------------------- basics

    def uptime_s(self) -> float:
        return max(0.0, self.clock.timestamp() - self.boot_time)

    def reset(self) -> None:
        """Soft reset: volatile stores go, flight plan and files survive."""
        self.boot_time = self.clock.timestamp()
        self.tm_store.clear()
        self.status_vars.clear()
        self.status_vars.update(DEFAULT_STATUS_VARS)
        self.status_vars["obc_last_reset_cause"] = 1
        self.log.append("system", {"event": "obc-reset",
                                   "node": self.node_id})

    def close(self) -> None:
        self.driver.unregister_periodic(self._beacon_handle)
        self.driver.unregister_periodic(self._plan_handle)
        self._executor.close()
        for node in (self.node_id, self.eps_node, self.payload_node):
            self.hub.unregister(node)

    def subsystem_for_node(self, node: int) -> Optional[str]:
        return {self.node_id: "obc", self.eps_node: "eps",
                self.payload_node: "payload"}.get(node)

    def _load_spike(self) -> None:
        self._load_spiked_until = self.clock.timestamp() + 60.0

    def _store_image(self, png: bytes) -> str:
        self._img_count += 1
        path = f"/pictures/img_{self._img_count:03d}.png"
        self.vfs.write(path, png)
        return path

    # ------------------------------------------------------------- delivery

    def _on_packet_obc(self, packet: csp.CspPacket) -> None:
        if packet.dport == csp.PORT_PING:
            self._echo(packet)
        elif packet.dport in self._waiters:
            self._waiters[packet.dport].append((packet, self.clock.timestamp()))
        elif packet.dport == csp.PORT_TELECOMMAND:
            self._executor.submit(lambda p=packet: self._dispatch_tc(p))
        elif packet.dport == csp.PORT_FILE:
            self._receive_file_chunk(packet)
        # Anything else is silently dropped, as a CSP node with no service
        # bound on that port would do.

    def _on_packet_subsystem(self, packet: csp.CspPacket) -> None:
        # EPS and payload are bare CSP endpoints: they answer pings, nothing
        # more. Their data is reached through OBC commands.
        if packet.dport == csp.PORT_PING:
            self._echo(packet)

    def _echo(self, packet: csp.CspPacket) -> None:
        self.hub.submit(packet.reply_skeleton(payload=packet.payload))

    # --------------------------------------------------------------- ping

    def ping(self, node: int, timeout_s: float = PING_TIMEOUT_S):
        """Send an echo probe. Returns (log_lines, elapsed_ms); -1 = timeout."""
        sport = self._eph.take()
        waiter: list = []
        self._waiters[sport] = waiter
        try:
            probe = csp.CspPacket(src=self.node_id, dst=node,
                                  dport=csp.PORT_PING, sport=sport,
                                  payload=bytes(range(10)))
            lines = [csp.format_log_line("OUT", probe, self.cfg.via_name)]
            t0 = self.clock.timestamp()
            self.hub.submit(probe)
            self.driver.wait_for(lambda: len(waiter) > 0, timeout_s)
            if waiter:
                reply, arrived = waiter[0]
                lines.append(csp.format_log_line("INP", reply, self.cfg.via_name))
                return lines, max(0, int(round((arrived - t0) * 1000.0)))
            return lines, -1
        finally:
            del self._waiters[sport]

    def debug_text(self) -> str:
        stats = self.hub.stats.get(self.node_id, {"tx": 0, "rx": 0})
        via = self.cfg.via_name
        lines = [
            f"CSP node: {self.node_id}",
            "Interfaces:",
            f"  LOOP   addr: {self.node_id:<5} netmask: 5  mtu: 1024",
            "         tx: 00000 rx: 00000 txe: 00000 rxe: 00000",
            f"  {via:<6} addr: {self.node_id:<5} netmask: 5  mtu: 1024",
            f"         tx: {stats['tx']:05d} rx: {stats['rx']:05d} "
            "txe: 00000 rxe: 00000",
            "Routes:",
            f"  {self.node_id}/5 LOOP",
            f"  0/0 {via}",
        ]
        return "\n".join(lines)

    # ----------------------------------------------------------- telecommand

    def _dispatch_tc(self, packet: csp.CspPacket) -> None:
        text = packet.payload.decode("utf-8", errors="replace").strip()
        if not text:
            return
        name, _, remainder = text.partition(" ")
        remainder = remainder.strip()
        self.last_raw_args = remainder
        args = remainder.split() if remainder else []
        ok, reply_text = self.table.dispatch(name, args)
        self.log.append("tc", {
            "name": name, "args": remainder, "origin_node": packet.src,
            "ok": bool(ok), "reply_chars": len(reply_text),
        })
        self._send_reply(packet, ok, reply_text)

    def _send_reply(self, request: csp.CspPacket, ok: bool, text: str) -> None:
        data = text.encode("utf-8")
        parts = [data[i:i + REPLY_PART_BYTES]
                 for i in range(0, len(data), REPLY_PART_BYTES)] or [b""]
        for i, part in enumerate(parts):
            flags = 0 if ok else REPLY_FLAG_ERROR
            if i < len(parts) - 1:
                flags |= REPLY_FLAG_MORE
            reply = csp.CspPacket(
                src=self.node_id, dst=request.src,
                dport=request.sport, sport=request.dport,
                priority=request.priority, flags=flags, payload=part)
            self.hub.submit(reply)

    def enqueue_local(self, command: str, args: list) -> None:
        """Flight-plan executions run through the same serial executor as
        ground telecommands; the plan ticker itself must never block."""
        line = " ".join([command] + [str(a) for a in args])
        self._executor.submit(lambda: self._run_local(line))

    def _run_local(self, line: str) -> None:
        name, _, remainder = line.partition(" ")
        remainder = remainder.strip()
        self.last_raw_args = remainder
        args = remainder.split() if remainder else []
        ok, reply_text = self.table.dispatch(name, args)
        self.log.append("tc", {
            "name": name, "args": remainder, "origin_node": self.node_id,
            "ok": bool(ok), "reply_chars": len(reply_text),
            "source": "flightplan",
        })

    def _plan_tick(self) -> None:
        self.plan.tick(self.clock.timestamp(), execute=self.enqueue_local,
                       emit=self._emit_plan_entry)

    def _emit_plan_entry(self, entry) -> None:
        self.log.append("system", {
            "event": "flightplan-exec", "node": self.node_id,
            "command": entry.command,
            "arguments": " ".join(str(a) for a in entry.args),
            "executions": entry.executions_remaining,
            "period": int(entry.period_s),
        })

    # -------------------------------------------------------------- files

    def send_file(self, name: str, data: bytes, dest: int) -> int:
        total = max(1, (len(data) + FILE_CHUNK_BYTES - 1) // FILE_CHUNK_BYTES)
        for seq in range(total):
            chunk = data[seq * FILE_CHUNK_BYTES:(seq + 1) * FILE_CHUNK_BYTES]
            header = f"F {name} {seq} {total} {len(chunk)}\n".encode()
            packet = csp.CspPacket(
                src=self.node_id, dst=dest,
                dport=csp.PORT_FILE, sport=csp.PORT_FILE,
                payload=header + chunk)
            self.hub.submit(packet)
        return total

    def _receive_file_chunk(self, packet: csp.CspPacket) -> None:
        parsed = parse_file_chunk(packet.payload)
        if parsed is None:
            return
        name, seq, total, chunk = parsed
        key = (packet.src, name)
        entry = self._rx_files.setdefault(key, {"total": total, "parts": {}})
        entry["total"] = total
        entry["parts"][seq] = chunk
        if len(entry["parts"]) >= entry["total"]:
            data = b"".join(entry["parts"][i]
                            for i in sorted(entry["parts"]))
            del self._rx_files[key]
            safe = name.rsplit("/", 1)[-1] or "upload.bin"
            path = f"{RECV_DIR}/{safe}"
            try:
                if self.vfs.exists(path):
                    self.vfs.remove(path, recursive=True)
                self.vfs.write(path, data)
            except FsCapExceeded:
                self.log.append("system", {"event": "upload-rejected",
                                           "name": safe, "bytes": len(data)})
                return
            self.log.append("tc", {
                "name": "file-upload", "args": safe,
                "origin_node": packet.src, "ok": True,
                "path": path, "bytes": len(data),
            })

    # -------------------------------------------------------------- frames

    def send_tm_frame(self, frame: TelemetryFrame, dest: int) -> None:
        packet = csp.CspPacket(
            src=self.node_id, dst=dest,
            dport=csp.PORT_TELEMETRY, sport=csp.PORT_TELEMETRY,
            payload=frame.to_wire())
        self.hub.submit(packet)
        self.status_vars["obc_count_tm"] = (
            int(self.status_vars.get("obc_count_tm", 0)) + 1)

    def _send_beacon(self) -> None:
        beacon = self.gateway.get_beacon()
        payload = json.dumps({"beacon": beacon}, separators=(",", ":")).encode()
        packet = csp.CspPacket(
            src=self.node_id, dst=self.mcs_node,
            dport=csp.PORT_TELEMETRY, sport=csp.PORT_TELEMETRY,
            payload=payload)
        self.hub.submit(packet)
        self.log.append("tm", {"beacon": beacon, "node": self.node_id})


def parse_file_chunk(payload: bytes):
    """Decode 'F {name} {seq} {total} {len}\\n' + bytes; None if malformed."""
    newline = payload.find(b"\n")
    if newline < 0:
        return None
    try:
        fields = payload[:newline].decode("utf-8").split()
    except UnicodeDecodeError:
        return None
    if len(fields) != 5 or fields[0] != "F":
        return None
    name = fields[1]
    try:
        seq, total, length = int(fields[2]), int(fields[3]), int(fields[4])
    except ValueError:
        return None
    if seq < 0 or total <= 0 or seq >= total or length < 0:
        return None
    chunk = payload[newline + 1:]
    if len(chunk) != length:
        return None
    return name, seq, total, chunk
