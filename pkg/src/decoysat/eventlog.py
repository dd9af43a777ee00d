"""Append-only interaction log.

Everything an attacker (or the sim itself) does becomes one LogEvent, written
as a JSON line. The JSONL file is the forensic record, so the writer never
rewrites history: append, flush, fsync every FSYNC_EVERY events.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

logger = logging.getLogger(__name__)

CATEGORIES = ("tc", "tm", "telnet", "web-login", "web-raw", "route", "sim", "system")

FSYNC_EVERY = 64
MAX_BUFFER = 10_000


class SinkUnavailable(Exception):
    pass


@dataclass
class LogEvent:
    seq: int
    timestamp_ms: int
    category: str
    payload: dict
    session_id: Optional[str] = None
    peer: Optional[str] = None

    def to_json(self) -> str:
        doc = {
            "seq": self.seq,
            "timestamp_ms": self.timestamp_ms,
            "category": self.category,
        }
        if self.session_id is not None:
            doc["session_id"] = self.session_id
        if self.peer is not None:
            doc["peer"] = self.peer
        doc["payload"] = self.payload
        return json.dumps(doc, sort_keys=False, separators=(",", ":"))

    @staticmethod
    def from_json(line: str) -> "LogEvent":
        doc = json.loads(line)
        return LogEvent(
            seq=doc["seq"],
            timestamp_ms=doc["timestamp_ms"],
            category=doc["category"],
            payload=doc.get("payload", {}),
            session_id=doc.get("session_id"),
            peer=doc.get("peer"),
        )


class JsonlSink:
    """Default sink: one JSON document per line, fsync every FSYNC_EVERY events."""

    def __init__(self, path: str):
        self.path = path
        parent = os.path.dirname(os.path.abspath(path))
        os.makedirs(parent, exist_ok=True)
        try:
            self._fh = open(path, "a", encoding="utf-8")
        except OSError as exc:
            raise SinkUnavailable(str(exc)) from exc
        self._since_sync = 0

    def write(self, event: LogEvent) -> None:
        self._fh.write(event.to_json() + "\n")
        self._fh.flush()
        self._since_sync += 1
        if self._since_sync >= FSYNC_EVERY:
            os.fsync(self._fh.fileno())
            self._since_sync = 0

    def close(self) -> None:
        try:
            self._fh.flush()
            os.fsync(self._fh.fileno())
        except (OSError, ValueError):
            pass
        self._fh.close()


class MemorySink:
    """Test sink: keeps events in a list."""

    def __init__(self):
        self.events: list[LogEvent] = []

    def write(self, event: LogEvent) -> None:
        self.events.append(event)

    def close(self) -> None:
        pass


class EventLog:
    """Sequencing front end over a sink.

    seq is strictly increasing per run. Producers call append() from any
    thread; a lock keeps (seq assignment, sink write) atomic, which is cheap
    at honeypot interaction rates. If the sink backs up beyond MAX_BUFFER
    queued events the oldest pending entries are dropped and a system event
    records how many were lost.
    """

    def __init__(self, sink, clock):
        self._sink = sink
        self._clock = clock
        self._lock = threading.Lock()
        self._seq = 0
        self._buffer: list[LogEvent] = []
        self._dropped = 0

    def append(self, category: str, payload: dict,
               session_id: Optional[str] = None, peer: Optional[str] = None) -> LogEvent:
        if category not in CATEGORIES:
            raise ValueError(f"unknown log category: {category}")
        with self._lock:
            self._seq += 1
            event = LogEvent(
                seq=self._seq,
                timestamp_ms=int(self._clock.timestamp() * 1000),
                category=category,
                payload=payload,
                session_id=session_id,
                peer=peer,
            )
            self._buffer.append(event)
            if len(self._buffer) > MAX_BUFFER:
                # Oldest-drop, and leave a trace that we did.
                drop = self._buffer.pop(0)
                self._dropped += 1
                logger.warning("event buffer overflow, dropped seq=%d", drop.seq)
                self._seq += 1
                self._buffer.append(LogEvent(
                    seq=self._seq,
                    timestamp_ms=event.timestamp_ms,
                    category="system",
                    payload={"event": "buffer-overflow", "dropped_total": self._dropped},
                ))
            self._drain()
            return event

    def _drain(self) -> None:
        while self._buffer:
            self._sink.write(self._buffer.pop(0))

    def flush(self) -> None:
        with self._lock:
            self._drain()

    def close(self) -> None:
        self.flush()
        self._sink.close()


def read_events(path: str) -> list[LogEvent]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                events.append(LogEvent.from_json(line))
            except (json.JSONDecodeError, KeyError):
                logger.warning("skipping malformed log line")
    return events


def dump(path: str, category: Optional[str] = None,
         since_ms: Optional[int] = None) -> list[LogEvent]:
    """Filtered read of a JSONL log file, oldest first."""
    out = []
    for ev in read_events(path):
        if category is not None and ev.category != category:
            continue
        if since_ms is not None and ev.timestamp_ms < since_ms:
            continue
        out.append(ev)
    return out
