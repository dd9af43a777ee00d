"""Injectable time source.

Every component that needs "now" (hub routing, physics ticks, flight plans,
log timestamps) takes a clock object instead of calling time.time() directly,
so replays can run on a virtual clock and stay deterministic.
"""

from __future__ import annotations

import time
from datetime import datetime, timezone


def to_datetime(epoch_s: float) -> datetime:
    return datetime.fromtimestamp(epoch_s, tz=timezone.utc)


class RealClock:
    """Wall clock. sleep() actually sleeps."""

    is_virtual = False

    def timestamp(self) -> float:
        return time.time()

    def now(self) -> datetime:
        return to_datetime(self.timestamp())

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class AnchoredClock:
    """Wall-rate clock pinned to a mission timeline.

    Advances at real-time speed but reports timestamps offset so that the
    moment of construction reads as start_epoch_s. A deployment anchored
    near its TLE epoch presents attackers a self-consistent world: log
    timestamps, beacon times, and the pass schedule all agree.
    """

    is_virtual = False

    def __init__(self, start_epoch_s: float):
        self._offset = float(start_epoch_s) - time.monotonic()

    def timestamp(self) -> float:
        return time.monotonic() + self._offset

    def now(self) -> datetime:
        return to_datetime(self.timestamp())

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class VirtualClock:
    """Manually advanced clock for replays and tests.

    sleep() advances virtual time instead of blocking, so code written against
    the clock interface behaves identically in both modes.
    """

    is_virtual = True

    def __init__(self, start_epoch_s: float):
        self._t = float(start_epoch_s)

    def timestamp(self) -> float:
        return self._t

    def now(self) -> datetime:
        return to_datetime(self._t)

    def advance(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("virtual clock cannot go backwards")
        self._t += seconds

    def set_to(self, epoch_s: float) -> None:
        if epoch_s < self._t:
            raise ValueError("virtual clock cannot go backwards")
        self._t = float(epoch_s)

    def sleep(self, seconds: float) -> None:
        self.advance(max(0.0, seconds))
