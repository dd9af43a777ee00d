"""Mission control shell.

Exposed over telnet, this is the operator console an intruder lands in.
Sessions are gated behind an activation keyword: until it is typed, every
line is recorded but nothing is executed. After activation, lines with an
"N:" prefix are wrapped as telecommands and routed to that node through the
radio hub; bare lines run locally (ping, flight-plan scheduling, telemetry
display, file transfer).

Console rendering follows the classic flight-software log style:

    [INFO ][1714319368][Executer] Running the command: com_ping...
    OUT: S 10, D 1, Dp 1, Sp 41, Pr 2, Fl 0x00, Sz 10 VIA: ZMQHUB
    INP: S 1, D 10, Dp 41, Sp 1, Pr 2, Fl 0x00, Sz 10 VIA: ZMQHUB
    [RES  ][1714319369][cmdCOM] Ping to 1 took 1600
    [INFO ][1714319369][Executer] Command result: 1
"""

from __future__ import annotations

import json
import logging
import socket
import threading
from dataclasses import dataclass
from typing import Callable, Optional

from . import csp
from .flightsw.flightplan import FlightPlan
from .flightsw.node import parse_file_chunk
from .flightsw.telemetry import TelemetryFrame
from .runtime import SerialExecutor

logger = logging.getLogger(__name__)

TC_TIMEOUT_S = 10.0
PING_TIMEOUT_S = 3.0
MAX_LINE_CHARS = 8192
LEGAL_NOTICE = "This computer system is for authorized use only."

DEFAULT_BANNER = (
    "{mission}\n"
    "Mission Control Software - operator console\n"
    "{notice}\n"
    "Type '{keyword}' to begin.\n"
)


class BadNodePrefix(Exception):
    pass


def render(level: str, ts: int, module: str, text: str) -> str:
    return f"[{level:<5}][{ts}][{module}] {text}"


@dataclass
class McsCommandLine:
    target_node: Optional[int]
    name: str
    args: list
    raw_args: str


def parse_line(raw: str) -> Optional[McsCommandLine]:
    """Split an operator line into optional node prefix, name and args.

    Returns None for an empty line. The node prefix is digits glued to a
    colon in the first token ("1: com_ping 1"); anything else before a
    colon there is a BadNodePrefix.
    """
    if len(raw) > MAX_LINE_CHARS:
        raw = raw[:MAX_LINE_CHARS]
    line = raw.strip()
    if not line:
        return None
    target = None
    first = line.split(None, 1)[0]
    if ":" in first:
        prefix = first.split(":", 1)[0]
        if not prefix.isdigit():
            raise BadNodePrefix(f"bad node prefix: {prefix!r}")
        target = int(prefix)
        if not 0 <= target <= 31:
            raise BadNodePrefix(f"node {target} out of range")
        line = line.split(":", 1)[1].strip()
        if not line:
            return None
    parts = line.split()
    name, args = parts[0], parts[1:]
    raw_args = line.partition(" ")[2].strip()
    return McsCommandLine(target, name, args, raw_args)


class GroundEndpoint:
    """The MCS's node on the packet network, shared by all sessions.

    Owns the waiter table for outstanding requests, the last-received
    telemetry (beacons and frames), and the downlinked-file assembler.
    """

    def __init__(self, personality, ground_cfg, hub, clock, driver, log):
        self.personality = personality
        self.cfg = ground_cfg
        self.hub = hub
        self.clock = clock
        self.driver = driver
        self.log = log
        self.node_id = personality.node_mcs
        self._eph = csp.EphemeralPorts()
        self._waiters: dict = {}         # sport -> list of (packet, arrival_ts)
        self._rx_files: dict = {}
        self.downloads: dict = {}        # filename -> bytes
        self.beacon_last: Optional[dict] = None
        self.beacon_last_ts: Optional[float] = None
        self.tm_last: dict = {}          # subsystem -> TelemetryFrame
        self._watchers: list = []        # async console line callbacks
        self._session_counter = 0
        self._session_lock = threading.Lock()
        hub.register(self.node_id, self._on_packet)

    def next_session_index(self) -> int:
        # Per-endpoint so fresh replays number sessions identically.
        with self._session_lock:
            self._session_counter += 1
            return self._session_counter

    def close(self) -> None:
        self.hub.unregister(self.node_id)

    def add_watcher(self, fn: Callable[[str], None]) -> None:
        self._watchers.append(fn)

    def remove_watcher(self, fn) -> None:
        if fn in self._watchers:
            self._watchers.remove(fn)

    def _notify(self, line: str) -> None:
        for fn in list(self._watchers):
            try:
                fn(line)
            except Exception:
                logger.exception("console watcher failed")

    # ------------------------------------------------------------- delivery

    def _on_packet(self, packet: csp.CspPacket) -> None:
        if packet.dport == csp.PORT_PING:
            self.hub.submit(packet.reply_skeleton(payload=packet.payload))
        elif packet.dport in self._waiters:
            self._waiters[packet.dport].append(
                (packet, self.clock.timestamp()))
        elif packet.dport == csp.PORT_TELEMETRY:
            self._on_telemetry(packet)
        elif packet.dport == csp.PORT_FILE:
            self._on_file_chunk(packet)

    def _on_telemetry(self, packet: csp.CspPacket) -> None:
        try:
            obj = json.loads(packet.payload.decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            return
        if isinstance(obj, dict) and "beacon" in obj:
            self.beacon_last = obj["beacon"]
            self.beacon_last_ts = self.clock.timestamp()
        elif isinstance(obj, dict) and "subsystem" in obj:
            try:
                frame = TelemetryFrame.from_wire(packet.payload)
            except (ValueError, KeyError):
                return
            self.tm_last[frame.subsystem] = frame
            self.log.append("tm", {"event": "frame-received",
                                   "subsystem": frame.subsystem,
                                   "timestamp": frame.timestamp})

    def _on_file_chunk(self, packet: csp.CspPacket) -> None:
        parsed = parse_file_chunk(packet.payload)
        if parsed is None:
            return
        name, seq, total, chunk = parsed
        key = (packet.src, name)
        entry = self._rx_files.setdefault(key, {"total": total, "parts": {}})
        entry["total"] = total
        entry["parts"][seq] = chunk
        if len(entry["parts"]) >= entry["total"]:
            data = b"".join(entry["parts"][i] for i in sorted(entry["parts"]))
            del self._rx_files[key]
            safe = name.rsplit("/", 1)[-1] or "download.bin"
            self.downloads[safe] = data
            self.log.append("tm", {"event": "file-received", "name": safe,
                                   "bytes": len(data), "from_node": packet.src})
            ts = int(self.clock.timestamp())
            self._notify(render("INFO", ts, "FileTransfer",
                                f"Received file {safe} ({len(data)} bytes) "
                                f"from node {packet.src}"))

    # -------------------------------------------------------------- senders

    def ping(self, node: int, timeout_s: float = PING_TIMEOUT_S):
        """Returns (out_line, inp_line_or_None, elapsed_ms)."""
        sport = self._eph.take()
        waiter: list = []
        self._waiters[sport] = waiter
        try:
            probe = csp.CspPacket(src=self.node_id, dst=node,
                                  dport=csp.PORT_PING, sport=sport,
                                  payload=bytes(range(10)))
            out_line = csp.format_log_line("OUT", probe, self.cfg.via_name)
            t0 = self.clock.timestamp()
            self.hub.submit(probe)
            self.driver.wait_for(lambda: len(waiter) > 0, timeout_s)
            if waiter:
                reply, arrived = waiter[0]
                inp = csp.format_log_line("INP", reply, self.cfg.via_name)
                return out_line, inp, max(0, int(round((arrived - t0) * 1000.0)))
            return out_line, None, -1
        finally:
            del self._waiters[sport]

    def send_tc(self, target: int, line: str, timeout_s: float = TC_TIMEOUT_S):
        """Send a telecommand and gather its (possibly multi-part) reply.

        Returns (ok, reply_text_or_None, out_line, inp_lines).
        """
        from .flightsw.node import REPLY_FLAG_ERROR, REPLY_FLAG_MORE

        sport = self._eph.take()
        waiter: list = []
        self._waiters[sport] = waiter
        try:
            packet = csp.CspPacket(src=self.node_id, dst=target,
                                   dport=csp.PORT_TELECOMMAND, sport=sport,
                                   payload=line.encode("utf-8"))
            out_line = csp.format_log_line("OUT", packet, self.cfg.via_name)
            self.hub.submit(packet)

            def complete() -> bool:
                return any(not (p.flags & REPLY_FLAG_MORE)
                           for p, _ in waiter)

            self.driver.wait_for(complete, timeout_s)
            if not complete():
                return False, None, out_line, []
            inp_lines = [csp.format_log_line("INP", p, self.cfg.via_name)
                         for p, _ in waiter]
            final = next(p for p, _ in waiter
                         if not (p.flags & REPLY_FLAG_MORE))
            text = b"".join(p.payload for p, _ in waiter).decode(
                "utf-8", errors="replace")
            return not (final.flags & REPLY_FLAG_ERROR), text, out_line, inp_lines
        finally:
            del self._waiters[sport]

    def debug_text(self) -> str:
        stats = self.hub.stats.get(self.node_id, {"tx": 0, "rx": 0})
        via = self.cfg.via_name
        return "\n".join([
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
        ])


# The local (ground-side) command table. Everything else is assumed to be a
# flight-software command and, with an "N:" prefix, goes to that node.
LOCAL_USAGE = [
    ("help", "", "list available commands"),
    ("com_ping <node>", "", "ping a node over the radio link"),
    ("com_debug", "", "show the ground CSP configuration"),
    ("tm_get_last <subsys-node>", "", "print the last received TM frame"),
    ("tm_send_file <path> <node>", "", "upload a ground file to a node"),
    ("fp_set_cmd_dt <dt> <execs> <period> <cmd> [args...]", "",
     "schedule a command on the ground flight plan"),
    ("fp_show", "", "list the ground flight plan"),
    ("exit", "", "close the session"),
]


class McsSession:
    """One operator console: activation gate, grammar, rendering, plan."""

    def __init__(self, endpoint: GroundEndpoint, fs_command_table,
                 log, clock, driver, peer: str = "local",
                 output_cb: Optional[Callable[[str], None]] = None):
        self.session_id = f"mcs-{endpoint.next_session_index():03d}"
        self.peer = peer
        self.endpoint = endpoint
        self.fs_table = fs_command_table    # names/usages for help only
        self.log = log
        self.clock = clock
        self.driver = driver
        self.output_cb = output_cb or (lambda line: None)
        self.activated = False
        self.history: list = []
        self.plan = FlightPlan()
        self.local_files: dict = {}
        self._executor = SerialExecutor(driver, name=f"{self.session_id}-exec")
        self._plan_handle = driver.register_periodic(
            1.0, self._plan_tick, allow_nested=True)
        self._closed = False
        self.log.append("telnet", {"event": "session-open"},
                        session_id=self.session_id, peer=self.peer)

    # ------------------------------------------------------------ lifecycle

    def banner(self) -> str:
        template = self.endpoint.cfg.banner_template or DEFAULT_BANNER
        return template.format(
            mission=self.endpoint.cfg.mission_display_name,
            keyword=self.endpoint.cfg.activation_keyword,
            notice=LEGAL_NOTICE)

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        self.driver.unregister_periodic(self._plan_handle)
        self._executor.close()
        self.log.append("telnet", {"event": "session-close",
                                   "lines": len(self.history)},
                        session_id=self.session_id, peer=self.peer)

    # ------------------------------------------------------------ main path

    def feed_line(self, raw: str) -> str:
        """Process one operator line; returns the rendered output block."""
        raw = raw[:MAX_LINE_CHARS]
        if not raw.strip():
            return ""
        self.history.append(raw)
        buf: list = []
        executed = False
        if not self.activated:
            if raw.strip() == self.endpoint.cfg.activation_keyword:
                self.activated = True
                self._emit(buf, "Session activated.")
            else:
                self._emit(buf, f"Type '{self.endpoint.cfg.activation_keyword}'"
                                " to begin.")
        else:
            executed = True
            try:
                parsed = parse_line(raw)
            except BadNodePrefix as exc:
                ts = int(self.clock.timestamp())
                self._emit(buf, render("ERROR", ts, "Executer", str(exc)))
                parsed = None
            if parsed is not None:
                self._run_parsed(parsed, buf)
        output = "\n".join(buf)
        self.log.append("telnet", {"input": raw, "output": output,
                                   "executed": executed,
                                   "activated": self.activated},
                        session_id=self.session_id, peer=self.peer)
        return output

    def _emit(self, buf: list, line: str) -> None:
        buf.append(line)
        self.output_cb(line)

    def _emit_result(self, buf: list, ok: bool) -> None:
        ts = int(self.clock.timestamp())
        self._emit(buf, render("INFO", ts, "Executer",
                               f"Command result: {1 if ok else 0}"))

    # ------------------------------------------------------------- dispatch

    def _run_parsed(self, cmd: McsCommandLine, buf: list) -> None:
        ts = int(self.clock.timestamp())
        self._emit(buf, render("INFO", ts, "Executer",
                               f"Running the command: {cmd.name}..."))
        if cmd.target_node is not None:
            self._run_remote(cmd, buf)
        else:
            self._run_local(cmd, buf)

    def _run_remote(self, cmd: McsCommandLine, buf: list) -> None:
        line = cmd.name if not cmd.raw_args else f"{cmd.name} {cmd.raw_args}"
        ok, text, out_line, inp_lines = self.endpoint.send_tc(
            cmd.target_node, line)
        self._emit(buf, out_line)
        for inp in inp_lines:
            self._emit(buf, inp)
        if text:
            for out in text.splitlines():
                self._emit(buf, out)
        self._emit_result(buf, ok)

    def _run_local(self, cmd: McsCommandLine, buf: list) -> None:
        handler = {
            "help": self._cmd_help,
            "activate": self._cmd_noop,
            "exit": self._cmd_noop,
            "com_ping": self._cmd_com_ping,
            "com_debug": self._cmd_com_debug,
            "tm_get_last": self._cmd_tm_get_last,
            "tm_send_file": self._cmd_tm_send_file,
            "fp_set_cmd_dt": self._cmd_fp_set,
            "fp_show": self._cmd_fp_show,
        }.get(cmd.name)
        if handler is None:
            ts = int(self.clock.timestamp())
            self._emit(buf, render("ERROR", ts, "Executer",
                                   f"Command not found: {cmd.name}"))
            self._emit_result(buf, False)
            return
        ok = handler(cmd, buf)
        self._emit_result(buf, ok)

    # --------------------------------------------------------------- locals

    def _cmd_noop(self, cmd, buf) -> bool:
        return True

    def _cmd_help(self, cmd, buf) -> bool:
        self._emit(buf, "Ground commands:")
        for usage, _, doc in LOCAL_USAGE:
            self._emit(buf, f"  {usage:<52} {doc}")
        self._emit(buf, "Flight software commands (prefix with 'N:' to "
                        "route to node N):")
        for name, usage, doc in self.fs_table.describe():
            shown = f"{name} {usage}".strip()
            self._emit(buf, f"  {shown:<52} {doc}")
        return True

    def _cmd_com_ping(self, cmd, buf) -> bool:
        if not cmd.args or not cmd.args[0].lstrip("-").isdigit():
            self._emit(buf, "Usage: com_ping <node>")
            return False
        node = int(cmd.args[0])
        out_line, inp_line, ms = self.endpoint.ping(node)
        self._emit(buf, out_line)
        if inp_line is not None:
            self._emit(buf, inp_line)
        ts = int(self.clock.timestamp())
        self._emit(buf, render("RES", ts, "cmdCOM", f"Ping to {node} took {ms}"))
        return ms >= 0

    def _cmd_com_debug(self, cmd, buf) -> bool:
        for line in self.endpoint.debug_text().splitlines():
            self._emit(buf, line)
        return True

    def _cmd_tm_get_last(self, cmd, buf) -> bool:
        if not cmd.args or not cmd.args[0].lstrip("-").isdigit():
            self._emit(buf, "Usage: tm_get_last <subsys-node>")
            return False
        node = int(cmd.args[0])
        node_map = self.endpoint.personality.node_map
        subsystem = {v: k for k, v in node_map.items()}.get(node)
        if subsystem is None:
            self._emit(buf, f"No subsystem at node {node}")
            return False
        frame = self.endpoint.tm_last.get(subsystem)
        if frame is None:
            self._emit(buf, f"No TM received from node {node}")
            return False
        for line in frame.render().splitlines():
            self._emit(buf, line)
        return True

    def _cmd_tm_send_file(self, cmd, buf) -> bool:
        if len(cmd.args) < 2:
            self._emit(buf, "Usage: tm_send_file <path> <node>")
            return False
        a, b = cmd.args[0], cmd.args[1]
        if a.lstrip("-").isdigit():
            dest, path = int(a), b
        elif b.lstrip("-").isdigit():
            dest, path = int(b), a
        else:
            self._emit(buf, "Destination node must be an integer")
            return False
        name = path.rsplit("/", 1)[-1]
        data = self.local_files.get(name)
        if data is None:
            # No real ground archive exists; synthesize believable content
            # so an upload "succeeds" and lands on the spacecraft.
            data = (f"# {name}\n# uplinked via {self.session_id}\n").encode()
            self.local_files[name] = data
        total = max(1, (len(data) + 512 - 1) // 512)
        for seq in range(total):
            chunk = data[seq * 512:(seq + 1) * 512]
            header = f"F {name} {seq} {total} {len(chunk)}\n".encode()
            packet = csp.CspPacket(
                src=self.endpoint.node_id, dst=dest,
                dport=csp.PORT_FILE, sport=csp.PORT_FILE,
                payload=header + chunk)
            self.endpoint.hub.submit(packet)
        ts = int(self.clock.timestamp())
        self._emit(buf, render("INFO", ts, "FileTransfer",
                               f"Sent {name} ({len(data)} bytes) to node "
                               f"{dest} in {total} chunks"))
        return True

    def _cmd_fp_set(self, cmd, buf) -> bool:
        if len(cmd.args) < 4:
            self._emit(buf, "Usage: fp_set_cmd_dt <dt> <executions> <period>"
                            " <command> [args...]")
            return False
        try:
            dt, executions, period = (float(cmd.args[0]), int(cmd.args[1]),
                                      float(cmd.args[2]))
            self.plan.add(self.clock.timestamp(), dt, executions, period,
                          cmd.args[3], cmd.args[4:])
        except ValueError as exc:
            self._emit(buf, str(exc))
            return False
        return True

    def _cmd_fp_show(self, cmd, buf) -> bool:
        for line in self.plan.render().splitlines():
            self._emit(buf, line)
        return True

    # ----------------------------------------------------------- flight plan

    def _plan_tick(self) -> None:
        if self._closed:
            return
        self.plan.tick(self.clock.timestamp(),
                       execute=self._plan_enqueue, emit=self._plan_emit)

    def _plan_emit(self, entry) -> None:
        ts = int(self.clock.timestamp())
        buf: list = []
        for line in entry.render().splitlines():
            self._emit(buf, render("INFO", ts, "FlightPlan", line))
        self.log.append("telnet", {"async": "flightplan",
                                   "output": "\n".join(buf)},
                        session_id=self.session_id, peer=self.peer)

    def _plan_enqueue(self, command: str, args: list) -> None:
        line = " ".join([command] + [str(a) for a in args])
        self._executor.submit(lambda: self._plan_execute(line))

    def _plan_execute(self, line: str) -> None:
        if self._closed:
            return
        buf: list = []
        try:
            parsed = parse_line(line)
        except BadNodePrefix as exc:
            ts = int(self.clock.timestamp())
            self._emit(buf, render("ERROR", ts, "Executer", str(exc)))
            parsed = None
        if parsed is not None:
            self._run_parsed(parsed, buf)
        self.log.append("telnet", {"async": "executer", "input": line,
                                   "output": "\n".join(buf)},
                        session_id=self.session_id, peer=self.peer)


class TelnetServer:
    """Plain line-mode telnet front door for MCS sessions."""

    IAC = 255
    DONT, DO, WONT, WILL = 254, 253, 252, 251
    SB, SE = 250, 240

    def __init__(self, host: str, port: int, session_factory,
                 clock, log):
        self.host = host
        self.port = port
        self.session_factory = session_factory
        self.clock = clock
        self.log = log
        self._server: Optional[socket.socket] = None
        self._stop = threading.Event()
        self._threads: list = []

    def start(self) -> int:
        server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        server.bind((self.host, self.port))
        server.listen(16)
        server.settimeout(0.5)
        self._server = server
        t = threading.Thread(target=self._accept_loop, daemon=True,
                             name="telnet-accept")
        t.start()
        self._threads.append(t)
        return server.getsockname()[1]

    def stop(self) -> None:
        self._stop.set()
        if self._server is not None:
            try:
                self._server.close()
            except OSError:
                pass
        # Connection threads notice the stop flag within one recv timeout;
        # wait them out so their session-close events precede shutdown.
        for t in self._threads:
            if t.is_alive():
                t.join(timeout=2.0)
        self._threads.clear()

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, addr = self._server.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            t = threading.Thread(target=self._serve, args=(conn, addr),
                                 daemon=True, name=f"telnet-{addr[1]}")
            t.start()
            self._threads.append(t)

    def _serve(self, conn: socket.socket, addr) -> None:
        peer = f"{addr[0]}:{addr[1]}"
        write_lock = threading.Lock()

        def send_line(line: str) -> None:
            try:
                with write_lock:
                    conn.sendall(line.encode("utf-8", errors="replace")
                                 + b"\r\n")
            except OSError:
                pass

        session = self.session_factory(peer=peer, output_cb=send_line)
        session.endpoint.add_watcher(send_line)
        try:
            for line in session.banner().splitlines():
                send_line(line)
            self._prompt(conn, write_lock)
            raw_buf = b""
            text_buf = b""
            conn.settimeout(0.5)
            while not self._stop.is_set():
                try:
                    data = conn.recv(1024)
                except socket.timeout:
                    continue
                except OSError:
                    break
                if not data:
                    break
                raw_buf += data
                stripped, raw_buf = self._strip_telnet(conn, write_lock, raw_buf)
                text_buf += stripped
                text_buf = text_buf.replace(b"\r\n", b"\n").replace(b"\r", b"\n")
                quit_session = False
                while b"\n" in text_buf:
                    one, text_buf = text_buf.split(b"\n", 1)
                    raw = one.decode("utf-8", errors="replace")
                    if raw.strip() == "exit":
                        quit_session = True
                        break
                    session.feed_line(raw)
                    self._prompt(conn, write_lock)
                if quit_session:
                    break
                if len(text_buf) > MAX_LINE_CHARS * 2:
                    text_buf = text_buf[-MAX_LINE_CHARS:]
        finally:
            session.endpoint.remove_watcher(send_line)
            session.close()
            try:
                conn.close()
            except OSError:
                pass

    def _prompt(self, conn, write_lock) -> None:
        try:
            with write_lock:
                conn.sendall(b"> ")
        except OSError:
            pass

    def _strip_telnet(self, conn, write_lock, buf: bytes):
        """Remove IAC negotiation (answering WONT/DONT), return (text, tail).

        tail holds an incomplete trailing IAC sequence for the next recv.
        """
        out = b""
        i = 0
        replies = b""
        while i < len(buf):
            b0 = buf[i]
            if b0 == self.IAC:
                if i + 1 >= len(buf):
                    break
                verb = buf[i + 1]
                if verb == self.IAC:
                    out += b"\xff"
                    i += 2
                elif verb in (self.DO, self.WILL, self.DONT, self.WONT):
                    if i + 2 >= len(buf):
                        break
                    opt = buf[i + 2]
                    if verb == self.DO:
                        replies += bytes([self.IAC, self.WONT, opt])
                    elif verb == self.WILL:
                        replies += bytes([self.IAC, self.DONT, opt])
                    i += 3
                elif verb == self.SB:
                    end = buf.find(bytes([self.IAC, self.SE]), i)
                    if end < 0:
                        break
                    i = end + 2
                else:
                    i += 2
            else:
                out += bytes([b0])
                i += 1
        if replies:
            try:
                with write_lock:
                    conn.sendall(replies)
            except OSError:
                pass
        return out, buf[i:]
