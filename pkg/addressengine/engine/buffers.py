"""Intermediate memories between the ZBT banks and the process unit.

The IIM holds whole lines (rows for a horizontal scan, columns for a vertical
one). Every line is spread over its own pair of blocks, lower and upper words,
so a column of the neighbourhood window is read from all lines at once. In
intra mode the IIM is one 16-line FIFO; in inter mode it is split into two
8-line FIFOs, one per input image.

The OIM buffers result words until TxU-out writes them to the result bank, one
word per cycle.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np

from addressengine.engine.memory import NEVER
from addressengine.engine.memory import EngineInvariantError
from addressengine.frames.pixels import unpack_words

logger = logging.getLogger(__name__)


@dataclass
class LineBuffer:
    lower: np.ndarray
    upper: np.ndarray
    filled: int = 0
    resident_at: int = NEVER
    values: np.ndarray | None = None


class LineFifo:
    def __init__(self, capacity: int, line_len: int):
        self.capacity = capacity
        self.line_len = line_len
        self.lines: dict[int, LineBuffer] = {}

    def __len__(self) -> int:
        return len(self.lines)

    @property
    def full(self) -> bool:
        return len(self.lines) >= self.capacity

    @property
    def empty(self) -> bool:
        return not self.lines

    def open_line(self, line: int) -> None:
        if self.full:
            raise EngineInvariantError(f"Line {line} loaded into a full FIFO")
        self.lines[line] = LineBuffer(
            lower=np.zeros(self.line_len, dtype=np.uint32),
            upper=np.zeros(self.line_len, dtype=np.uint32),
        )

    def write(self, line: int, pos: int, lower: int, upper: int) -> None:
        buf = self.lines[line]
        if pos != buf.filled:
            raise EngineInvariantError(f"Line {line} written out of order at {pos}")
        buf.lower[pos] = lower
        buf.upper[pos] = upper
        buf.filled += 1

    def close_line(self, line: int, cycle: int) -> None:
        """Mark *line* complete after its last word arrived in *cycle*."""
        buf = self.lines[line]
        if buf.filled != self.line_len:
            raise EngineInvariantError(f"Line {line} closed with {buf.filled} of {self.line_len} pixels")
        buf.values = unpack_words(buf.lower, buf.upper).astype(np.int64)
        buf.resident_at = cycle + 1

    def evict_below(self, line: int) -> int:
        stale = [n for n in self.lines if n < line]
        for n in stale:
            del self.lines[n]
        return len(stale)

    def resident(self, line: int, cycle: int) -> bool:
        buf = self.lines.get(line)
        return buf is not None and buf.resident_at <= cycle

    def column(self, rows, pos: int) -> np.ndarray:
        return np.stack([self.lines[r].values[pos] for r in rows])


@dataclass(frozen=True)
class ColumnFetch:
    column: np.ndarray | None
    lines: tuple[int, ...]
    ready_at: int
    missing: tuple[int, ...] = ()

    @property
    def stalled(self) -> bool:
        return self.column is None


class Iim:
    def __init__(self, fifo_count: int, total_lines: int, line_len: int, line_count: int):
        if fifo_count not in (1, 2):
            raise ValueError("The IIM runs as one FIFO or as two")
        self.line_len = line_len
        self.line_count = line_count
        self.fifos = [LineFifo(total_lines // fifo_count, line_len) for _ in range(fifo_count)]

    @property
    def full(self) -> bool:
        return any(f.full for f in self.fifos)

    @property
    def empty(self) -> bool:
        return all(f.empty for f in self.fifos)

    def window_lines(self, line: int, dl_range: tuple[int, int]) -> tuple[int, ...]:
        """Lines covered by the window around *line*, clamped to the frame."""
        lo, hi = dl_range
        last = self.line_count - 1
        return tuple(min(max(line + dl, 0), last) for dl in range(lo, hi + 1))

    def fetch_column(self, center: tuple[int, int], dl_range: tuple[int, int], cycle: int, fifo: int = 0) -> ColumnFetch:
        line, pos = center
        rows = self.window_lines(line, dl_range)
        source = self.fifos[fifo]
        missing = tuple(sorted({r for r in rows if not source.resident(r, cycle)}))
        if missing:
            return ColumnFetch(None, rows, NEVER, missing)
        ready_at = max(source.lines[r].resident_at for r in set(rows))
        col = min(max(pos, 0), self.line_len - 1)
        return ColumnFetch(source.column(rows, col), rows, ready_at)


def iim_fetch_column(iim: Iim, center: tuple[int, int], dl_range: tuple[int, int], cycle: int, fifo: int = 0) -> ColumnFetch:
    return iim.fetch_column(center, dl_range, cycle, fifo)


class Oim:
    def __init__(self, lines: int, line_len: int):
        self.capacity = lines * line_len
        self._words: deque[tuple[int, bool]] = deque()

    @property
    def pixels_held(self) -> int:
        return (len(self._words) + 1) // 2

    @property
    def full(self) -> bool:
        return self.pixels_held >= self.capacity

    @property
    def empty(self) -> bool:
        return not self._words

    def __len__(self) -> int:
        return len(self._words)

    def push(self, lower: int, upper: int) -> None:
        if self.full:
            raise EngineInvariantError("Result pushed into a full OIM")
        self._words.append((lower, False))
        self._words.append((upper, True))

    def pop_word(self) -> tuple[int, bool]:
        """Next (word, is_upper) in write order."""
        return self._words.popleft()
