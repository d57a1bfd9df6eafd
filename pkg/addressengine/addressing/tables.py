"""Segment-indexed table: per-segment accumulators keyed by segment id (Alfa)."""

from __future__ import annotations

from dataclasses import dataclass
from dataclasses import field

from addressengine.frames.pixels import Channel

_ZERO_SUMS = (0, 0, 0, 0, 0)


@dataclass(frozen=True, slots=True)
class TableRecord:
    count: int = 0
    sums: tuple[int, int, int, int, int] = _ZERO_SUMS

    def sum(self, channel: Channel) -> int:
        return self.sums[channel]

    @property
    def y_sum(self) -> int:
        return self.sums[Channel.Y]

    def plus(self, other: TableRecord) -> TableRecord:
        return TableRecord(
            count=self.count + other.count,
            sums=tuple(a + b for a, b in zip(self.sums, other.sums, strict=True)),
        )

    def to_dict(self) -> dict:
        return {"count": self.count, "sums": {c.name.lower(): self.sums[c] for c in Channel if self.sums[c]}}


ZERO_RECORD = TableRecord()


def contribution(**channel_values: int) -> TableRecord:
    """Build a one-pixel contribution, e.g. ``contribution(y=10)``."""
    sums = [0] * len(Channel)
    for name, value in channel_values.items():
        sums[Channel.parse(name)] = int(value)
    return TableRecord(count=1, sums=tuple(sums))


@dataclass
class IndexedTable:
    """Maps segment id to a TableRecord; absent ids read as the zero record.

    Keys iterate in first-touch order.
    """

    records: dict[int, TableRecord] = field(default_factory=dict)

    def read(self, segment_id: int) -> TableRecord:
        return self.records.get(int(segment_id), ZERO_RECORD)

    def accumulate(self, segment_id: int, contrib: TableRecord) -> IndexedTable:
        key = int(segment_id)
        self.records[key] = self.records.get(key, ZERO_RECORD).plus(contrib)
        return self

    def write(self, segment_id: int, record: TableRecord) -> IndexedTable:
        self.records[int(segment_id)] = record
        return self

    def merge_totals(self, segment_id: int, count: int, sums) -> IndexedTable:
        """Add an already-grouped block of contributions for one id."""
        return self.accumulate(segment_id, TableRecord(count=int(count), sums=tuple(int(s) for s in sums)))

    def ids(self) -> list[int]:
        return list(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndexedTable):
            return NotImplemented
        return self.records == other.records

    def to_dict(self) -> dict:
        return {str(k): v.to_dict() for k, v in self.records.items()}


def table_read(t: IndexedTable, segment_id: int) -> TableRecord:
    return t.read(segment_id)


def table_accumulate(t: IndexedTable, segment_id: int, contrib: TableRecord) -> IndexedTable:
    return t.accumulate(segment_id, contrib)
