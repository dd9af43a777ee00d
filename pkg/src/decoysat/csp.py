"""CSP-style packet encoding and stream framing.

Header is 6 bytes, big-endian bit order:

    priority:2  src:5  dst:5  dport:6  sport:6   (3 bytes)
    flags:8                                      (1 byte)
    payload length:16                            (2 bytes)

Payloads are capped at 1024 bytes. On TCP the packet travels behind a 4-byte
big-endian frame length. Priority is carried for wire fidelity; nothing
schedules on it.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

HEADER_LEN = 6
MAX_PAYLOAD = 1024

PORT_PING = 1
PORT_TELECOMMAND = 10
PORT_FILE = 12
PORT_TELEMETRY = 13
EPHEMERAL_PORT_MIN = 41
EPHEMERAL_PORT_MAX = 63

PRIO_CRITICAL = 0
PRIO_HIGH = 1
PRIO_NORM = 2
PRIO_LOW = 3


class TruncatedPacket(ValueError):
    pass


class MalformedHeader(ValueError):
    pass


@dataclass
class CspPacket:
    src: int
    dst: int
    dport: int
    sport: int
    priority: int = PRIO_NORM
    flags: int = 0
    payload: bytes = b""

    def __post_init__(self):
        if not (0 <= self.priority <= 3):
            raise MalformedHeader(f"priority {self.priority} outside [0, 3]")
        for name, value, top in (("src", self.src, 31), ("dst", self.dst, 31),
                                 ("dport", self.dport, 63), ("sport", self.sport, 63)):
            if not (0 <= value <= top):
                raise MalformedHeader(f"{name} {value} outside [0, {top}]")
        if not (0 <= self.flags <= 255):
            raise MalformedHeader(f"flags {self.flags} outside [0, 255]")
        if len(self.payload) > MAX_PAYLOAD:
            raise MalformedHeader(f"payload {len(self.payload)} exceeds {MAX_PAYLOAD}")

    def serialize(self) -> bytes:
        word = ((self.priority << 22) | (self.src << 17) | (self.dst << 12)
                | (self.dport << 6) | self.sport)
        return (word.to_bytes(3, "big") + bytes([self.flags])
                + struct.pack(">H", len(self.payload)) + self.payload)

    def reply_skeleton(self, payload: bytes = b"") -> "CspPacket":
        """Addressing for a response: src/dst and ports swapped."""
        return CspPacket(src=self.dst, dst=self.src, dport=self.sport,
                         sport=self.dport, priority=self.priority,
                         flags=self.flags, payload=payload)


def parse_packet(data: bytes) -> CspPacket:
    if len(data) < HEADER_LEN:
        raise TruncatedPacket(f"need {HEADER_LEN} header bytes, got {len(data)}")
    word = int.from_bytes(data[:3], "big")
    flags = data[3]
    (length,) = struct.unpack(">H", data[4:6])
    if length > MAX_PAYLOAD:
        raise MalformedHeader(f"declared payload {length} exceeds {MAX_PAYLOAD}")
    payload = data[HEADER_LEN:]
    if len(payload) != length:
        raise TruncatedPacket(f"declared payload {length}, got {len(payload)} bytes")
    return CspPacket(
        priority=(word >> 22) & 0x3,
        src=(word >> 17) & 0x1F,
        dst=(word >> 12) & 0x1F,
        dport=(word >> 6) & 0x3F,
        sport=word & 0x3F,
        flags=flags,
        payload=payload,
    )


def format_log_line(direction: str, packet: CspPacket, via: str) -> str:
    """Wire log rendering, e.g.
    OUT: S 10, D 1, Dp 1, Sp 41, Pr 2, Fl 0x00, Sz 10 VIA: ZMQHUB"""
    return (f"{direction}: S {packet.src}, D {packet.dst}, Dp {packet.dport}, "
            f"Sp {packet.sport}, Pr {packet.priority}, Fl 0x{packet.flags:02X}, "
            f"Sz {len(packet.payload)} VIA: {via}")


# ---------------------------------------------------------------- TCP framing

def frame(packet: CspPacket) -> bytes:
    blob = packet.serialize()
    return struct.pack(">I", len(blob)) + blob


def read_frame(sock) -> CspPacket | None:
    """Read one length-prefixed packet from a socket. None on clean EOF."""
    head = _read_exact(sock, 4)
    if head is None:
        return None
    (length,) = struct.unpack(">I", head)
    if length < HEADER_LEN or length > HEADER_LEN + MAX_PAYLOAD:
        raise MalformedHeader(f"frame length {length} out of range")
    body = _read_exact(sock, length)
    if body is None:
        raise TruncatedPacket("connection closed mid-frame")
    return parse_packet(body)


def _read_exact(sock, n: int) -> bytes | None:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            if not buf:
                return None
            raise TruncatedPacket("connection closed mid-frame")
        buf += chunk
    return buf


class EphemeralPorts:
    """Source-port allocator for client-side exchanges: 41..63, then wraps."""

    def __init__(self):
        self._next = EPHEMERAL_PORT_MIN

    def take(self) -> int:
        port = self._next
        self._next += 1
        if self._next > EPHEMERAL_PORT_MAX:
            self._next = EPHEMERAL_PORT_MIN
        return port
