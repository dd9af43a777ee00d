"""Time drivers.

Components never wait on wall time directly; they ask the driver. The virtual
driver advances a VirtualClock from event to event (periodic ticks, hub
deliveries), which makes a whole replay single-threaded and deterministic.
The real driver runs the same periodic work off threads and waits by polling.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Optional


@dataclass
class _Periodic:
    period_s: float
    fn: Callable
    next_due: float
    order: int
    # Nested-safe work (log a line, enqueue an item) may fire while another
    # periodic's fn is blocked in wait_for; work that can itself block must
    # wait for the outer frame to unwind.
    allow_nested: bool = False
    running: bool = False


class VirtualDriver:
    def __init__(self, clock, hub=None):
        self.clock = clock
        self.hub = hub
        self._periodics: list[_Periodic] = []
        self._order = 0
        self._in_tick = False

    def register_periodic(self, period_s: float, fn: Callable,
                          first_due: Optional[float] = None,
                          allow_nested: bool = False):
        self._order += 1
        item = _Periodic(period_s, fn,
                         first_due if first_due is not None
                         else self.clock.timestamp() + period_s,
                         self._order, allow_nested)
        self._periodics.append(item)
        return item

    def unregister_periodic(self, item) -> None:
        if item in self._periodics:
            self._periodics.remove(item)

    def _runnable(self, p: _Periodic) -> bool:
        return not p.running and (p.allow_nested or not self._in_tick)

    def _next_event(self) -> Optional[float]:
        # Inside a blocked periodic only nested-safe ticks and hub deliveries
        # may advance the clock; suppressed periodics catch up one period per
        # fire once the frame unwinds.
        dues = [p.next_due for p in self._periodics if self._runnable(p)]
        if self.hub is not None:
            hub_due = self.hub.next_due()
            if hub_due is not None:
                dues.append(hub_due)
        return min(dues) if dues else None

    def _run_due(self) -> None:
        while True:
            now = self.clock.timestamp()
            due = [p for p in self._periodics
                   if p.next_due <= now + 1e-9 and self._runnable(p)]
            if not due:
                break
            p = min(due, key=lambda x: (x.next_due, x.order))
            p.next_due += p.period_s
            p.running = True
            outer = self._in_tick
            self._in_tick = True
            try:
                p.fn()
            finally:
                p.running = False
                self._in_tick = outer
        if self.hub is not None:
            self.hub.pump()

    def wait_for(self, predicate: Callable[[], bool], timeout_s: float) -> bool:
        """Advance virtual time until predicate() or timeout."""
        deadline = self.clock.timestamp() + timeout_s
        self._run_due()
        while not predicate():
            now = self.clock.timestamp()
            if now >= deadline - 1e-9:
                return predicate()
            nxt = self._next_event()
            target = deadline if nxt is None else min(nxt, deadline)
            target = min(max(target, now + 1e-4), deadline)
            self.clock.set_to(target)
            self._run_due()
        return True

    def advance(self, seconds: float) -> None:
        self.wait_for(lambda: False, seconds)


class RealDriver:
    """Same contract, wall-clock implementation."""

    POLL_S = 0.02

    def __init__(self, clock, hub=None):
        self.clock = clock
        self.hub = hub
        self._periodics: list[_Periodic] = []
        self._order = 0
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    def register_periodic(self, period_s: float, fn: Callable,
                          first_due: Optional[float] = None,
                          allow_nested: bool = False):
        # allow_nested is a virtual-mode concept; threads cover it here.
        with self._lock:
            self._order += 1
            item = _Periodic(period_s, fn,
                             first_due if first_due is not None
                             else self.clock.timestamp() + period_s,
                             self._order, allow_nested)
            self._periodics.append(item)
            return item

    def unregister_periodic(self, item) -> None:
        with self._lock:
            if item in self._periodics:
                self._periodics.remove(item)

    def start(self) -> None:
        self._thread = threading.Thread(target=self._loop, daemon=True,
                                        name="periodic-driver")
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    def _loop(self) -> None:
        while not self._stop.is_set():
            now = self.clock.timestamp()
            run = None
            with self._lock:
                due = sorted((p for p in self._periodics if p.next_due <= now),
                             key=lambda x: (x.next_due, x.order))
                if due:
                    run = due[0]
                    # Skip forward if we fell behind; periodic work is not
                    # allowed to burst after a stall.
                    while run.next_due <= now:
                        run.next_due += run.period_s
            if run is not None:
                try:
                    run.fn()
                except Exception:
                    import logging
                    logging.getLogger(__name__).exception("periodic task failed")
                continue
            self._stop.wait(self.POLL_S)

    def wait_for(self, predicate: Callable[[], bool], timeout_s: float) -> bool:
        deadline = self.clock.timestamp() + timeout_s
        while True:
            if predicate():
                return True
            if self.clock.timestamp() >= deadline:
                return predicate()
            self._stop.wait(self.POLL_S)

    def advance(self, seconds: float) -> None:
        self.clock.sleep(seconds)


class SerialExecutor:
    """Strictly ordered command runner, one per owner (MCS session, FS node).

    Submitted thunks run one at a time in submission order. Virtual mode backs
    this with a driver periodic so the whole replay stays single-threaded;
    real mode uses a worker thread. A thunk may block in driver.wait_for.
    """

    DRAIN_PERIOD_S = 0.25

    def __init__(self, driver, name: str = "executor"):
        self.driver = driver
        self.name = name
        self._closed = False
        if getattr(driver.clock, "is_virtual", False):
            self._queue = None
            self._items: list = []
            self._handle = driver.register_periodic(self.DRAIN_PERIOD_S,
                                                    self._drain)
            self._thread = None
        else:
            import queue as _queue
            self._queue = _queue.Queue()
            self._items = []
            self._handle = None
            self._thread = threading.Thread(target=self._loop, daemon=True,
                                            name=name)
            self._thread.start()

    def submit(self, fn: Callable) -> None:
        if self._closed:
            return
        if self._queue is None:
            self._items.append(fn)
        else:
            self._queue.put(fn)

    def pending(self) -> int:
        return len(self._items) if self._queue is None else self._queue.qsize()

    def _drain(self) -> None:
        while self._items:
            fn = self._items.pop(0)
            try:
                fn()
            except Exception:
                import logging
                logging.getLogger(__name__).exception(
                    "%s: queued command failed", self.name)

    def _loop(self) -> None:
        while not self._closed:
            try:
                fn = self._queue.get(timeout=0.2)
            except Exception:
                continue
            try:
                fn()
            except Exception:
                import logging
                logging.getLogger(__name__).exception(
                    "%s: queued command failed", self.name)

    def close(self) -> None:
        self._closed = True
        if self._handle is not None:
            self.driver.unregister_periodic(self._handle)
        if self._thread is not None:
            self._thread.join(timeout=2.0)
