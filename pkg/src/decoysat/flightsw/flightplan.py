"""Deferred/periodic command scheduler.

One implementation serves both sides of the link: the OBC runs one for
uplinked fp_set_cmd_dt telecommands, and each mission-control session runs
one for ground-local schedules. Log rendering is the owner's job via the
emit callback; execution order and the countdown contract live here.

Each execution emits the entry with its remaining count BEFORE decrementing,
so an entry created with executions=120 renders 120, 119, 118, 117...
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional


@dataclass
class FlightPlanEntry:
    command: str
    args: list
    dt_s: float
    period_s: float
    executions_remaining: int
    next_due: float
    created: float

    def render(self) -> str:
        args = " ".join(str(a) for a in self.args)
        return (f"Command: {self.command}\n"
                f"Arguments: {args}\n"
                f"Executions: {self.executions_remaining}\n"
                f"Period: {int(self.period_s)}")


class FlightPlan:
    def __init__(self):
        self.entries: list[FlightPlanEntry] = []

    def add(self, now: float, dt_s: float, executions: int, period_s: float,
            command: str, args: list) -> FlightPlanEntry:
        if dt_s < 0 or period_s <= 0 or executions <= 0:
            raise ValueError("dt >= 0, period > 0, executions > 0 required")
        entry = FlightPlanEntry(
            command=command, args=list(args), dt_s=dt_s, period_s=period_s,
            executions_remaining=int(executions), next_due=now + dt_s, created=now)
        self.entries.append(entry)
        return entry

    def tick(self, now: float, execute: Callable,
             emit: Optional[Callable] = None) -> int:
        """Run every due execution. execute(command, args) performs it;
        emit(entry) is called before each execution for log rendering."""
        ran = 0
        progressed = True
        while progressed:
            progressed = False
            for entry in list(self.entries):
                if entry.executions_remaining <= 0:
                    self.entries.remove(entry)
                    continue
                if entry.next_due <= now + 1e-9:
                    if emit is not None:
                        emit(entry)
                    entry.next_due += entry.period_s
                    entry.executions_remaining -= 1
                    execute(entry.command, entry.args)
                    if entry.executions_remaining <= 0 and entry in self.entries:
                        self.entries.remove(entry)
                    ran += 1
                    progressed = True
                    break
        return ran

    def render(self) -> str:
        if not self.entries:
            return "Flight plan is empty"
        return "\n\n".join(e.render() for e in self.entries)

    def clear(self) -> None:
        self.entries = []

    def __len__(self) -> int:
        return len(self.entries)
