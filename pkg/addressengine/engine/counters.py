"""Access counters, the ZBT access trace and the IIM fetch audit."""

from __future__ import annotations

import enum
import json
import logging
from collections import Counter
from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path

import numpy as np

from addressengine.engine.memory import EngineInvariantError

logger = logging.getLogger(__name__)


class Unit(enum.IntEnum):
    HOST_IN = 0
    TXU_IN = 1
    TXU_OUT = 2
    HOST_OUT = 3

    @property
    def label(self) -> str:
        return self.name.lower()


class AccessOp(enum.IntEnum):
    READ = 0
    WRITE = 1

    @property
    def label(self) -> str:
        return self.name.lower()


class StallReason(enum.StrEnum):
    IIM_EMPTY = "iim_empty"
    OIM_FULL = "oim_full"
    ARBITER = "arbiter"


@dataclass
class Counters:
    """Run counters.

    ``zbt_read_events`` and ``zbt_write_events`` follow the per-pixel convention:
    one read event per pixel position loaded (all words of that position move in
    parallel) and one write event per result pixel. Raw word counts are kept
    alongside.
    """

    zbt_read_events: int = 0
    zbt_write_events: int = 0
    zbt_words_read: int = 0
    zbt_words_written: int = 0
    host_words_in: int = 0
    host_words_out: int = 0
    cycles_total: int = 0
    cycles_stalled: int = 0
    stalls: Counter = field(default_factory=Counter)
    overlap_cycles: int = 0
    loads: int = 0
    shifts: int = 0
    iim_lines_loaded: int = 0

    @property
    def access_events(self) -> int:
        return self.zbt_read_events + self.zbt_write_events

    def record_stalls(self, reasons, cycles: int = 1) -> None:
        if not reasons or cycles <= 0:
            return
        self.cycles_stalled += cycles
        for reason in reasons:
            self.stalls[StallReason(reason)] += cycles

    def to_dict(self) -> dict:
        data = asdict(self)
        data["stalls"] = {str(r): self.stalls.get(r, 0) for r in StallReason}
        data["access_events"] = self.access_events
        return data


@dataclass(frozen=True, slots=True)
class AccessRecord:
    cycle: int
    unit: str
    bank: int
    address: int
    op: str


class AccessTrace:
    """Every ZBT word access, kept column-wise so long runs stay compact."""

    def __init__(self):
        self._cycles: list[int] = []
        self._units: list[int] = []
        self._banks: list[int] = []
        self._addresses: list[int] = []
        self._ops: list[int] = []

    def __len__(self) -> int:
        return len(self._cycles)

    def add(self, cycle: int, unit: Unit, bank: int, address: int, op: AccessOp) -> None:
        self._cycles.append(cycle)
        self._units.append(unit)
        self._banks.append(bank)
        self._addresses.append(address)
        self._ops.append(op)

    def add_block(self, cycles: np.ndarray, unit: Unit, bank: int, addresses: np.ndarray, op: AccessOp) -> None:
        n = len(cycles)
        self._cycles.extend(np.asarray(cycles).tolist())
        self._units.extend([int(unit)] * n)
        self._banks.extend([bank] * n)
        self._addresses.extend(np.asarray(addresses).tolist())
        self._ops.extend([int(op)] * n)

    def records(self):
        order = np.argsort(np.asarray(self._cycles, dtype=np.int64), kind="stable")
        for i in order.tolist():
            yield AccessRecord(
                cycle=self._cycles[i],
                unit=Unit(self._units[i]).label,
                bank=self._banks[i],
                address=self._addresses[i],
                op=AccessOp(self._ops[i]).label,
            )

    def count(self, unit: Unit | None = None, op: AccessOp | None = None) -> int:
        units = np.asarray(self._units)
        ops = np.asarray(self._ops)
        keep = np.ones(len(self), dtype=bool)
        if unit is not None:
            keep &= units == unit
        if op is not None:
            keep &= ops == op
        return int(keep.sum())

    def port_conflicts(self) -> list[tuple[int, int]]:
        """(cycle, bank) pairs that carry more than one access."""
        if not self._cycles:
            return []
        keys = np.asarray(self._cycles, dtype=np.int64) * 8 + np.asarray(self._banks, dtype=np.int64)
        values, counts = np.unique(keys, return_counts=True)
        return [(int(k // 8), int(k % 8)) for k in values[counts > 1]]

    def assert_port_discipline(self) -> None:
        conflicts = self.port_conflicts()
        if conflicts:
            raise EngineInvariantError(f"{len(conflicts)} bank port conflicts, first at {conflicts[0]}")

    def export_jsonl(self, path: Path | str) -> int:
        path = Path(path)
        written = 0
        with path.open("w", encoding="utf-8") as fh:
            for record in self.records():
                fh.write(json.dumps(asdict(record)) + "\n")
                written += 1
        logger.info("Wrote %d access records to %s", written, path)
        return written


@dataclass(frozen=True, slots=True)
class FetchRecord:
    cycle: int
    line: int
    pos: int
    kind: str
    lines: tuple[int, ...]
    ready_at: int
    missing: tuple[int, ...] = ()

    @property
    def stalled(self) -> bool:
        return bool(self.missing)


@dataclass
class FetchAudit:
    records: list[FetchRecord] = field(default_factory=list)

    def fetched(self, cycle: int, line: int, pos: int, kind: str, lines, ready_at: int) -> None:
        self.records.append(FetchRecord(cycle, line, pos, kind, tuple(lines), ready_at))

    def stalled(self, cycle: int, line: int, pos: int, kind: str, lines, missing) -> None:
        self.records.append(FetchRecord(cycle, line, pos, kind, tuple(lines), cycle + 1, tuple(missing)))

    def violations(self) -> list[FetchRecord]:
        """Fetches served from a line that was not yet resident."""
        return [r for r in self.records if r.ready_at > r.cycle and not r.stalled]

    def export_jsonl(self, path: Path | str) -> int:
        path = Path(path)
        with path.open("w", encoding="utf-8") as fh:
            for record in self.records:
                fh.write(json.dumps(asdict(record)) + "\n")
        return len(self.records)
