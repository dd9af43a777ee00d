"""Telemetry frames and the on-board store."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class TelemetryFrame:
    sat_index: int
    timestamp: int
    subsystem: str
    fields: dict                 # insertion order is render order

    def render(self) -> str:
        lines = [f"sat_index: {self.sat_index}", f"timestamp: {self.timestamp}"]
        lines += [f"{k}: {v}" for k, v in self.fields.items()]
        return "\n".join(lines)

    def to_wire(self) -> bytes:
        return json.dumps({"sat_index": self.sat_index, "timestamp": self.timestamp,
                           "subsystem": self.subsystem, "fields": self.fields}).encode()

    @staticmethod
    def from_wire(blob: bytes) -> "TelemetryFrame":
        doc = json.loads(blob.decode())
        return TelemetryFrame(sat_index=doc["sat_index"], timestamp=doc["timestamp"],
                              subsystem=doc["subsystem"], fields=doc["fields"])


class TelemetryStore:
    """Append-only between resets, newest-first queries per subsystem."""

    def __init__(self, max_frames: int = 4096):
        self._frames: list[TelemetryFrame] = []
        self.max_frames = max_frames

    def append(self, frame: TelemetryFrame) -> None:
        self._frames.append(frame)
        if len(self._frames) > self.max_frames:
            self._frames.pop(0)

    def last(self, subsystem: str | None = None) -> TelemetryFrame | None:
        for frame in reversed(self._frames):
            if subsystem is None or frame.subsystem == subsystem:
                return frame
        return None

    def all(self, subsystem: str | None = None) -> list[TelemetryFrame]:
        return [f for f in self._frames
                if subsystem is None or f.subsystem == subsystem]

    def clear(self) -> None:
        self._frames = []

    def __len__(self) -> int:
        return len(self._frames)
