"""Space-segment flight software: command services, flight plan, telemetry
store, virtual filesystem and the emulated OBC shell."""

from .flightplan import FlightPlan, FlightPlanEntry
from .node import FsNode, parse_file_chunk
from .services import CommandTable, DEFAULT_PAYLOAD_VARS, DEFAULT_STATUS_VARS
from .shell import ShellContext, shell_exec
from .telemetry import TelemetryFrame, TelemetryStore
from .vfs import FsCapExceeded, VirtualFs, seed_default

__all__ = [
    "FlightPlan", "FlightPlanEntry", "FsNode", "parse_file_chunk",
    "CommandTable", "DEFAULT_PAYLOAD_VARS", "DEFAULT_STATUS_VARS",
    "ShellContext", "shell_exec", "TelemetryFrame", "TelemetryStore",
    "FsCapExceeded", "VirtualFs", "seed_default",
]
