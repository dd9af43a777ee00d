"""On-board command services.

Each service is a named handler taking parsed string args and returning
(ok, text). Handlers run against the sim gateway, the virtual filesystem and
the data repository; nothing here touches the host system. Unknown names and
arity mistakes come back as failed results, never exceptions, because every
byte an intruder sends deserves a believable answer.
"""

from __future__ import annotations

from ..simgateway import BadParams, SimRequest, UnknownTarget
from .shell import shell_exec
from .telemetry import TelemetryFrame
from .vfs import FsCapExceeded

SENSOR_SUBSYSTEM = {
    "accelerometer": "adcs",
    "gyroscope": "adcs",
    "sun_sensor": "adcs",
    "gps": "adcs",
    "magnetometer": "adcs",
    "voltage": "eps",
    "temperature": "eps",
    "camera": "payload",
}

DEFAULT_STATUS_VARS = {
    "obc_opmode": 1,
    "obc_count_tc": 0,
    "obc_count_tm": 0,
    "obc_fault": 0,
    "obc_last_reset_cause": 0,
    "log_level": 3,
    "log_node": 1,
    "log_dest": 1,
    "drp_ack_ads": 0,
    "fw_version": "1.4.2",
}

DEFAULT_PAYLOAD_VARS = {
    "mem_payload": 0,
    "tm_payload_count": 0,
    "cam_frames": 0,
}


class CommandTable:
    """Registry + dispatcher. The owning node wires in its context."""

    def __init__(self, node):
        self.node = node          # FsNode
        self._table: dict[str, tuple] = {}
        self._register_all()

    def names(self) -> list:
        return sorted(self._table.keys())

    def describe(self) -> list:
        return [(name, usage, doc) for name, (fn, usage, doc)
                in sorted(self._table.items())]

    def dispatch(self, name: str, args: list) -> tuple:
        entry = self._table.get(name)
        self.node.status_vars["obc_count_tc"] = (
            int(self.node.status_vars.get("obc_count_tc", 0)) + 1)
        if entry is None:
            return False, f"Unknown command: {name}"
        fn, usage, _ = entry
        try:
            return fn(args)
        except _Arity:
            return False, f"Usage: {name} {usage}".rstrip()

    def _register_all(self):
        reg = self._reg
        reg("com_ping", "<node>", "ping a CSP node and report the round trip",
            self._com_ping)
        reg("com_debug", "", "print CSP node, interfaces and routing table",
            self._com_debug)
        reg("sen_get_eps", "", "sample the EPS and store a telemetry frame",
            self._sen_get_eps)
        reg("tm_send_last", "<subsys-node> <dest-node>",
            "downlink the newest stored frame for a subsystem", self._tm_send_last)
        reg("tm_dump", "<hex-region>", "dump a telemetry region to a file",
            self._tm_dump)
        reg("tm_send_file", "<dest-node> <path>", "downlink a file in chunks",
            self._tm_send_file)
        reg("tm_parse_beacon", "", "print the current beacon fields",
            self._tm_parse_beacon)
        reg("obc_system", "<shell line>", "run a shell command on the OBC",
            self._obc_system)
        reg("obc_rm", "[-r] <path>", "remove a path", self._obc_rm)
        reg("obc_mkdir", "<path>", "create a directory", self._obc_mkdir)
        reg("obc_mv", "<src> <dst>", "move or rename a path", self._obc_mv)
        reg("obc_reset", "", "software reset of the OBC", self._obc_reset)
        reg("obc_ebf", "<key>", "enter bootloader flash mode", self._obc_ebf)
        reg("obc_get_sensor", "<name>", "print one sensor's current values",
            self._obc_get_sensor)
        reg("obc_update_status", "<var> <value>", "set a status variable",
            self._obc_update_status)
        reg("drp_set_var_name", "<var> <value>", "set a data repository variable",
            self._drp_set_var_name)
        reg("drp_reset_payload", "[magic...]", "zero the payload repository",
            self._drp_reset_payload)
        reg("drp_reset_status", "[magic...]", "reset status variables to defaults",
            self._drp_reset_status)
        reg("log_set", "<level> <node> <dest>", "redirect on-board logging",
            self._log_set)
        reg("fp_set_cmd_dt", "<dt> <executions> <period> <command> [args...]",
            "schedule a command on the flight plan", self._fp_set_cmd_dt)
        reg("fp_show", "", "list the flight plan", self._fp_show)
        reg("cam_set_size", "<width> <height>", "configure the payload camera",
            self._cam_set_size)
        reg("cam_take_img", "<dest-node>", "capture an image to storage",
            self._cam_take_img)

    def _reg(self, name, usage, doc, fn):
        self._table[name] = (fn, usage, doc)

    # ------------------------------------------------------------- commands

    def _com_ping(self, args):
        node = _int_arg(args, 0)
        lines, ms = self.node.ping(node)
        ok = ms >= 0
        lines.append(f"Ping to {node} took {ms}")
        return ok, "\n".join(lines)

    def _com_debug(self, args):
        return True, self.node.debug_text()

    def _sen_get_eps(self, args):
        gw = self.node.gateway
        batt = gw.handle(SimRequest("eps", "battery", "get")).values
        temp = gw.handle(SimRequest("eps", "temperature", "get")).values
        frame = TelemetryFrame(
            sat_index=0,
            timestamp=int(self.node.clock.timestamp()),
            subsystem="eps",
            fields={
                "vbatt": int(round(batt["vbatt_mV"])),
                "temp_eps": int(round(temp["temp_eps_C"])),
                "temp_bat": int(round(batt["temp_bat_C"])),
                "current": int(round(batt["current_mA"])),
            })
        self.node.tm_store.append(frame)
        return True, "EPS sample stored"

    def _tm_send_last(self, args):
        subsys_node = _int_arg(args, 0)
        dest = _int_arg(args, 1)
        subsystem = self.node.subsystem_for_node(subsys_node)
        if subsystem is None:
            return False, f"No subsystem at node {subsys_node}"
        frame = self.node.tm_store.last(subsystem)
        if frame is None:
            return False, f"No stored frames for {subsystem}"
        self.node.send_tm_frame(frame, dest)
        return True, f"Sent last {subsystem} frame to node {dest}"

    def _tm_dump(self, args):
        if not args:
            raise _Arity()
        try:
            region = int(args[0], 16)
        except ValueError:
            return False, f"Bad region address: {args[0]}"
        if region == 0x0000:
            title, frames = "status", self.node.tm_store.all("eps") + \
                self.node.tm_store.all("obc")
            variables = self.node.status_vars
        elif region == 0x1000:
            title, frames = "payload", self.node.tm_store.all("payload")
            variables = self.node.payload_vars
        else:
            return False, f"No telemetry region at 0x{region:04X}"
        lines = [f"# telemetry region 0x{region:04X} ({title})"]
        lines += [f"{k} = {v}" for k, v in variables.items()]
        for fr in frames:
            lines.append("")
            lines.append(fr.render())
        path = f"/var/log/tm_dump_{region:04x}.log"
        self.node.vfs.write(path, ("\n".join(lines) + "\n").encode())
        return True, f"Dumped {title} telemetry to {path}"

    def _tm_send_file(self, args):
        if len(args) < 2:
            raise _Arity()
        # Accept both argument orders; the integer is the destination node.
        a, b = args[0], args[1]
        if a.lstrip("-").isdigit():
            dest, path = int(a), b
        elif b.lstrip("-").isdigit():
            dest, path = int(b), a
        else:
            return False, "Destination node must be an integer"
        norm = self.node.vfs.normalize(path)
        if not self.node.vfs.isfile(norm):
            return False, f"No such file: {path}"
        data = self.node.vfs.read(norm)
        sent = self.node.send_file(norm.rsplit("/", 1)[-1], data, dest)
        return True, f"Sent {norm} ({len(data)} bytes) to node {dest} in {sent} chunks"

    def _tm_parse_beacon(self, args):
        beacon = self.node.gateway.get_beacon()
        return True, "\n".join(f"{k}: {v}" for k, v in beacon.items())

    def _obc_system(self, args):
        raw = self.node.last_raw_args
        code, out = shell_exec(self.node.shell_ctx, raw)
        text = out if out else f"(exit {code})" if code else "OK"
        return code == 0, text

    def _obc_rm(self, args):
        recursive = args and args[0] in ("-r", "-rf")
        paths = args[1:] if recursive else args
        if not paths:
            raise _Arity()
        try:
            self.node.vfs.remove(paths[0], recursive=bool(recursive))
            return True, f"Removed {self.node.vfs.normalize(paths[0])}"
        except FileNotFoundError:
            return False, f"No such path: {paths[0]}"
        except IsADirectoryError:
            return False, f"{paths[0]} is a directory (use -r)"

    def _obc_mkdir(self, args):
        if not args:
            raise _Arity()
        try:
            self.node.vfs.mkdir(args[0], parents=True)
            return True, f"Created {self.node.vfs.normalize(args[0])}"
        except (FileExistsError, NotADirectoryError) as exc:
            return False, f"Cannot create {args[0]}: {exc.__class__.__name__}"

    def _obc_mv(self, args):
        if len(args) != 2:
            raise _Arity()
        try:
            self.node.vfs.move(args[0], args[1])
            return True, f"Moved {args[0]} -> {args[1]}"
        except (FileNotFoundError, NotADirectoryError):
            return False, f"Cannot move {args[0]}"

    def _obc_reset(self, args):
        self.node.reset()
        return True, "OBC reset"

    def _obc_ebf(self, args):
        if not args:
            raise _Arity()
        # Always rejected, always the same answer: no oracle for key guessing.
        return False, "Invalid key"

    def _obc_get_sensor(self, args):
        if not args:
            raise _Arity()
        name = args[0].lower()
        subsystem = SENSOR_SUBSYSTEM.get(name)
        if subsystem is None:
            return False, f"Unknown sensor: {args[0]}"
        try:
            reply = self.node.gateway.handle(SimRequest(subsystem, name, "get"))
        except (UnknownTarget, BadParams) as exc:
            return False, str(exc)
        return True, "\n".join(f"{k}: {v}" for k, v in reply.values.items())

    def _obc_update_status(self, args):
        if len(args) < 2:
            raise _Arity()
        self.node.status_vars[args[0]] = _coerce(args[1])
        return True, f"{args[0]} = {self.node.status_vars[args[0]]}"

    def _drp_set_var_name(self, args):
        if len(args) < 2:
            raise _Arity()
        self.node.status_vars[args[0]] = _coerce(args[1])
        return True, f"{args[0]} = {self.node.status_vars[args[0]]}"

    def _drp_reset_payload(self, args):
        for k in self.node.payload_vars:
            self.node.payload_vars[k] = 0
        return True, "Payload repository zeroed"

    def _drp_reset_status(self, args):
        self.node.status_vars.clear()
        self.node.status_vars.update(DEFAULT_STATUS_VARS)
        return True, "Status variables reset to defaults"

    def _log_set(self, args):
        if len(args) != 3:
            raise _Arity()
        try:
            level, node, dest = (int(a) for a in args)
        except ValueError:
            return False, "log_set takes three integers"
        self.node.status_vars["log_level"] = level
        self.node.status_vars["log_node"] = node
        self.node.status_vars["log_dest"] = dest
        return True, f"Logging level {level}, node {node}, destination {dest}"

    def _fp_set_cmd_dt(self, args):
        if len(args) < 4:
            raise _Arity()
        try:
            dt, executions, period = float(args[0]), int(args[1]), float(args[2])
        except ValueError:
            return False, "fp_set_cmd_dt: dt, executions and period must be numbers"
        command, cmd_args = args[3], args[4:]
        try:
            self.node.plan.add(self.node.clock.timestamp(), dt, executions,
                               period, command, cmd_args)
        except ValueError as exc:
            return False, str(exc)
        return True, "Command scheduled"

    def _fp_show(self, args):
        return True, self.node.plan.render()

    def _cam_set_size(self, args):
        if len(args) != 2:
            raise _Arity()
        try:
            reply = self.node.gateway.handle(SimRequest(
                "payload", "camera", "set",
                {"width": args[0], "height": args[1]}))
        except BadParams as exc:
            return False, str(exc)
        v = reply.values
        return True, f"Camera size set to {v['width_px']}x{v['height_px']}"

    def _cam_take_img(self, args):
        if not args:
            raise _Arity()
        try:
            reply = self.node.gateway.handle(SimRequest(
                "payload", "camera", "set", {"capture": 1}))
        except BadParams as exc:
            return False, str(exc)
        except FsCapExceeded:
            return False, "Image storage full"
        self.node.payload_vars["cam_frames"] = (
            int(self.node.payload_vars.get("cam_frames", 0)) + 1)
        v = reply.values
        return True, f"Image captured: {v['path']} ({v['size']} bytes)"


class _Arity(Exception):
    pass


def _int_arg(args, index):
    if len(args) <= index:
        raise _Arity()
    try:
        return int(args[index])
    except ValueError:
        raise _Arity()


def _coerce(value: str):
    try:
        return int(value)
    except ValueError:
        try:
            return float(value)
        except ValueError:
            return value
