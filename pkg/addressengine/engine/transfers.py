"""Host bus transfers and the two transmission units.

The host bus carries one 32-bit word per cycle. A pixel needs two words: the
lower word is latched in the first cycle and both banks of the slot are written
together in the second, which leaves every other cycle free for TxU-in to read
the same banks. Frames travel as 16-line strips; a strip becomes available to
the engine at the cycle after its last word (the strip-complete interrupt).

TxU-in moves one pixel position per cycle from the ZBT into the IIM, reading the
lower and upper bank in parallel (and, in inter mode, both slots in lockstep).
TxU-out writes one OIM word per cycle into the current result bank. It switches
from Res_block_A to Res_block_B once, at a pixel boundary, when the bus is free
and block A holds enough of the result for the host to start reading.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field

import numpy as np

from addressengine.addressing.masks import ScanOrder
from addressengine.engine.buffers import Iim
from addressengine.engine.buffers import Oim
from addressengine.engine.counters import AccessOp
from addressengine.engine.counters import AccessTrace
from addressengine.engine.counters import Counters
from addressengine.engine.counters import Unit
from addressengine.engine.memory import RESULT_BANKS
from addressengine.engine.memory import EngineInvariantError
from addressengine.engine.memory import ZbtLayout
from addressengine.engine.memory import ZbtMemory
from addressengine.engine.timing import InterPolicy
from addressengine.frames.pixels import Frame
from addressengine.frames.pixels import pack_array
from addressengine.frames.pixels import unpack_words

logger = logging.getLogger(__name__)

WORDS_PER_PIXEL = 2


class StripPlanError(ValueError):
    """The frame extent across the scan direction is not a whole number of strips."""


@dataclass(frozen=True)
class Strip:
    index: int
    first_line: int
    line_count: int
    line_len: int
    block: str

    @property
    def lines(self) -> range:
        return range(self.first_line, self.first_line + self.line_count)

    @property
    def pixel_count(self) -> int:
        return self.line_count * self.line_len

    @property
    def word_count(self) -> int:
        return WORDS_PER_PIXEL * self.pixel_count


def plan_strips(frame: Frame, scan: ScanOrder | str, strip_lines: int = 16) -> list[Strip]:
    scan = ScanOrder(scan)
    line_count, line_len = scan.lines_and_length(frame.width, frame.height)
    if line_count % strip_lines:
        raise StripPlanError(
            f"{frame!r} has {line_count} lines in {scan} scan order, not a multiple of {strip_lines}",
        )
    return [
        Strip(index=i, first_line=i * strip_lines, line_count=strip_lines, line_len=line_len, block="AB"[i % 2])
        for i in range(line_count // strip_lines)
    ]


def strip_addresses(strip: Strip, layout: ZbtLayout, scan: ScanOrder) -> np.ndarray:
    """Word addresses of a strip's pixels in transfer order (line by line in scan order)."""
    lines = np.arange(strip.first_line, strip.first_line + strip.line_count)[:, None]
    pos = np.arange(strip.line_len)[None, :]
    if scan is ScanOrder.HORIZONTAL:
        return (lines * layout.width + pos).reshape(-1)
    return (pos * layout.width + lines).reshape(-1)


@dataclass(frozen=True)
class ScheduledStrip:
    slot: int
    strip: Strip
    start: int

    @property
    def available_at(self) -> int:
        return self.start + self.strip.word_count


@dataclass
class TransferSchedule:
    strips: list[ScheduledStrip] = field(default_factory=list)
    end: int = 0

    def available_at(self, slot: int, strip_index: int) -> int:
        return self._index[(slot, strip_index)]

    def image_complete(self, slot: int) -> int:
        return max((s.available_at for s in self.strips if s.slot == slot), default=0)

    def __post_init__(self):
        self._index = {(s.slot, s.strip.index): s.available_at for s in self.strips}


def transfer_order(plans: Sequence[list[Strip]], policy: InterPolicy) -> list[tuple[int, Strip]]:
    if len(plans) == 1 or policy is InterPolicy.WORST_CASE:
        return [(slot, strip) for slot, plan in enumerate(plans) for strip in plan]
    # Streamed: the two images' strips alternate so both slots fill at the same pace.
    return [(slot, strip) for pair in zip(*plans, strict=True) for slot, strip in enumerate(pair)]


def run_transfer_in(
    frames: Sequence[Frame],
    layout: ZbtLayout,
    counters: Counters,
    memory: ZbtMemory,
    scan: ScanOrder = ScanOrder.HORIZONTAL,
    policy: InterPolicy = InterPolicy.STREAMED,
    strip_lines: int = 16,
    trace: AccessTrace | None = None,
) -> TransferSchedule:
    """Send the input frames over the host bus into their ZBT slots."""
    plans = [plan_strips(f, scan, strip_lines) for f in frames]
    packed = [pack_array(f.data.reshape(-1, 5)) for f in frames]
    scheduled = []
    cycle = 0
    for slot, strip in transfer_order(plans, policy):
        addresses = strip_addresses(strip, layout, scan)
        write_cycles = cycle + WORDS_PER_PIXEL * np.arange(addresses.size, dtype=np.int64) + 1
        for bank, words in zip(layout.input_banks(slot), packed[slot], strict=True):
            memory.write_block(bank, addresses, words[addresses], write_cycles)
            if trace is not None:
                trace.add_block(write_cycles, Unit.HOST_IN, bank, addresses, AccessOp.WRITE)
        scheduled.append(ScheduledStrip(slot, strip, cycle))
        cycle += strip.word_count
    counters.host_words_in += cycle
    schedule = TransferSchedule(scheduled, end=cycle)
    logger.debug("Input transfer: %d strips, %d words, ends at cycle %d", len(scheduled), cycle, cycle)
    return schedule


# ─────────────────────────────────────────────────────────────────────────────
# Transmission units
# ─────────────────────────────────────────────────────────────────────────────


class TxuIn:
    """ZBT to IIM, one pixel position per cycle, lines in scan order."""

    def __init__(
        self,
        memory: ZbtMemory,
        layout: ZbtLayout,
        schedule: TransferSchedule,
        iim: Iim,
        counters: Counters,
        scan: ScanOrder,
        strip_lines: int,
        trace: AccessTrace | None = None,
    ):
        self.memory = memory
        self.layout = layout
        self.schedule = schedule
        self.iim = iim
        self.counters = counters
        self.scan = scan
        self.strip_lines = strip_lines
        self.trace = trace
        self.line = 0
        self.pos = 0
        self.wait_until: int | None = None

    @property
    def done(self) -> bool:
        return self.line >= self.iim.line_count

    def address(self, line: int, pos: int) -> int:
        if self.scan is ScanOrder.HORIZONTAL:
            return line * self.layout.width + pos
        return pos * self.layout.width + line

    def step(self, cycle: int, release_line: int) -> bool:
        """Move one pixel position if possible; False leaves ``wait_until`` set (None = blocked on the IIM)."""
        self.wait_until = None
        if self.done:
            return False
        for fifo in self.iim.fifos:
            fifo.evict_below(release_line)
        if self.pos == 0 and any(f.full for f in self.iim.fifos):
            return False
        slots = range(len(self.iim.fifos))
        strip = self.line // self.strip_lines
        ready = max(self.schedule.available_at(slot, strip) for slot in slots)
        if cycle < ready:
            self.wait_until = ready
            return False
        banks = [b for slot in slots for b in self.layout.input_banks(slot)]
        if any(self.memory.port_busy(b, cycle) for b in banks):
            self.wait_until = cycle + 1
            return False

        address = self.address(self.line, self.pos)
        for slot, fifo in zip(slots, self.iim.fifos, strict=True):
            lower_bank, upper_bank = self.layout.input_banks(slot)
            if self.pos == 0:
                fifo.open_line(self.line)
            lower = self.memory.read(lower_bank, address, cycle)
            upper = self.memory.read(upper_bank, address, cycle)
            fifo.write(self.line, self.pos, lower, upper)
            if self.trace is not None:
                self.trace.add(cycle, Unit.TXU_IN, lower_bank, address, AccessOp.READ)
                self.trace.add(cycle, Unit.TXU_IN, upper_bank, address, AccessOp.READ)
        self.counters.zbt_read_events += 1
        self.counters.zbt_words_read += WORDS_PER_PIXEL * len(self.iim.fifos)

        self.pos += 1
        if self.pos == self.iim.line_len:
            for fifo in self.iim.fifos:
                fifo.close_line(self.line, cycle)
            self.counters.iim_lines_loaded += 1
            self.line += 1
            self.pos = 0
        return True


class TxuOut:
    """OIM to the result banks, one word per cycle, with the single bank switch."""

    def __init__(
        self,
        memory: ZbtMemory,
        oim: Oim,
        counters: Counters,
        pixel_count: int,
        bus_free_at: int,
        switch_fraction: float,
        trace: AccessTrace | None = None,
    ):
        self.memory = memory
        self.oim = oim
        self.counters = counters
        self.pixel_count = pixel_count
        self.bus_free_at = bus_free_at
        self.switch_target = math.ceil(switch_fraction * pixel_count)
        self.trace = trace
        self.bank_index = 0
        self.switch_cycle: int | None = None
        self.words_in_bank = [0, 0]
        self.last_write: int | None = None

    @property
    def bank(self) -> int:
        return RESULT_BANKS[self.bank_index]

    @property
    def switched(self) -> bool:
        return self.switch_cycle is not None

    @property
    def pixels_written(self) -> int:
        return sum(self.words_in_bank) // 2

    def _maybe_switch(self, cycle: int) -> None:
        if self.switched or cycle < self.bus_free_at or self.words_in_bank[0] % 2:
            return
        if self.words_in_bank[0] // 2 >= self.switch_target or self.pixels_written == self.pixel_count:
            self.switch_cycle = cycle
            self.bank_index = 1
            logger.debug("Result bank switch at cycle %d after %d pixels", cycle, self.words_in_bank[0] // 2)

    def step(self, cycle: int) -> bool:
        self._maybe_switch(cycle)
        if self.oim.empty:
            return False
        word, is_upper = self.oim.pop_word()
        address = self.words_in_bank[self.bank_index]
        self.memory.write(self.bank, address, word, cycle)
        if self.trace is not None:
            self.trace.add(cycle, Unit.TXU_OUT, self.bank, address, AccessOp.WRITE)
        self.words_in_bank[self.bank_index] += 1
        self.counters.zbt_words_written += 1
        if is_upper:
            self.counters.zbt_write_events += 1
        self.last_write = cycle
        return True

    def finish(self, cycle: int) -> int:
        """Close the run once the OIM is empty; returns the switch cycle."""
        if self.pixels_written != self.pixel_count:
            raise EngineInvariantError(f"{self.pixels_written} of {self.pixel_count} results reached the ZBT")
        self._maybe_switch(max(cycle, self.bus_free_at))
        return self.switch_cycle


def oim_drain(writer: TxuOut, start_cycle: int) -> int:
    """Empty the OIM through TxU-out; returns the cycles consumed."""
    cycle = start_cycle
    while not writer.oim.empty:
        if not writer.step(cycle):
            raise EngineInvariantError(f"TxU-out made no progress in cycle {cycle}")
        cycle += 1
    return cycle - start_cycle


@dataclass
class OutputSchedule:
    start: int = 0
    end: int = 0
    words: int = 0
    pixels: np.ndarray | None = None


def run_transfer_out(
    memory: ZbtMemory,
    writer: TxuOut,
    counters: Counters,
    trace: AccessTrace | None = None,
) -> OutputSchedule:
    """Host reads the result back: block A then block B, one word per cycle.

    A word can be read once it is written and when the engine is not writing
    that bank in the same cycle.
    """
    if writer.pixel_count == 0:
        return OutputSchedule(pixels=np.zeros((0, 5), dtype=np.uint16))
    start = writer.switch_cycle
    cycle = start
    words = []
    for bank, count in zip(RESULT_BANKS, writer.words_in_bank, strict=True):
        written_at = memory.written_at[bank]
        for address in range(count):
            cycle = max(cycle, int(written_at[address]) + 1)
            while memory.port_busy(bank, cycle):
                cycle += 1
            words.append(memory.read(bank, address, cycle))
            if trace is not None:
                trace.add(cycle, Unit.HOST_OUT, bank, address, AccessOp.READ)
            cycle += 1
    counters.host_words_out += len(words)
    pairs = np.asarray(words, dtype=np.uint32).reshape(-1, 2)
    logger.debug("Output transfer: %d words, cycles %d-%d", len(words), start, cycle)
    return OutputSchedule(start=start, end=cycle, words=len(words), pixels=unpack_words(pairs[:, 0], pairs[:, 1]))
