"""Cycle loop of the AddressEngine coprocessor.

One clock drives everything. Within a cycle the units act in a fixed order:

  1. TxU-out writes one OIM word to the result bank (so space it frees is
     visible to STORE in the same cycle),
  2. the pipeline advances, oldest pixel-cycle first,
  3. TxU-in loads one pixel position into the IIM.

Host writes are scheduled ahead of time by the input transfer. When a cycle
moves nothing, the image level controller halts the engine until the next
strip-complete event and the skipped cycles are booked as stalls.
"""

from __future__ import annotations

import enum
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field

from addressengine.addressing.masks import NeighborhoodMask
from addressengine.addressing.masks import ScanOrder
from addressengine.addressing.scans import DimensionMismatchError
from addressengine.addressing.tables import IndexedTable
from addressengine.engine.buffers import Iim
from addressengine.engine.buffers import Oim
from addressengine.engine.counters import AccessTrace
from addressengine.engine.counters import Counters
from addressengine.engine.counters import FetchAudit
from addressengine.engine.memory import EngineInvariantError
from addressengine.engine.memory import ZbtLayout
from addressengine.engine.memory import ZbtMemory
from addressengine.engine.pipeline import InstrKind
from addressengine.engine.pipeline import Plc
from addressengine.engine.pipeline import ProcessUnit
from addressengine.engine.pipeline import pipeline_step
from addressengine.engine.timing import InterPolicy
from addressengine.engine.timing import Schedule
from addressengine.engine.timing import TimingConfig
from addressengine.engine.timing import TimingReport
from addressengine.engine.timing import timing_report
from addressengine.engine.transfers import TransferSchedule
from addressengine.engine.transfers import TxuIn
from addressengine.engine.transfers import TxuOut
from addressengine.engine.transfers import oim_drain
from addressengine.engine.transfers import run_transfer_in
from addressengine.engine.transfers import run_transfer_out
from addressengine.frames.pixels import Frame
from addressengine.kernels.descriptors import Kernel
from addressengine.kernels.descriptors import KernelOp
from addressengine.kernels.ops import SadAccumulator

logger = logging.getLogger(__name__)


class UnsupportedModeError(ValueError):
    """The engine does not implement this addressing mode or mask."""


class EngineMode(enum.StrEnum):
    INTER = "inter"
    INTRA = "intra"
    SEGMENT = "segment"


class EventKind(enum.StrEnum):
    STRIP_COMPLETE = "strip_complete"
    IMAGE_COMPLETE = "image_complete"
    ENGINE_START = "engine_start"
    BANK_SWITCH = "bank_switch"
    RESULT_COMPLETE = "result_complete"


@dataclass(frozen=True, slots=True)
class ScheduleEvent:
    cycle: int
    kind: EventKind
    detail: str = ""

    def to_dict(self) -> dict:
        return {"cycle": self.cycle, "kind": str(self.kind), "detail": self.detail}


class ImageLevelController:
    """Turns transfer progress into schedule events and decides when the engine runs."""

    def __init__(self, transfer: TransferSchedule, slots: int, policy: InterPolicy):
        self.events: list[ScheduleEvent] = []
        for s in transfer.strips:
            self.emit(EventKind.STRIP_COMPLETE, s.available_at, f"slot {s.slot} strip {s.strip.index} block {s.strip.block}")
        for slot in range(slots):
            self.emit(EventKind.IMAGE_COMPLETE, transfer.image_complete(slot), f"slot {slot}")
        # Worst case: inter inputs are sent one after the other and the engine
        # waits for the image-complete interrupt of both.
        self.engine_start = transfer.end if slots == 2 and policy is InterPolicy.WORST_CASE else 0
        self.emit(EventKind.ENGINE_START, self.engine_start)

    def emit(self, kind: EventKind, cycle: int, detail: str = "") -> None:
        self.events.append(ScheduleEvent(cycle, kind, detail))
        logger.debug("cycle %d: %s %s", cycle, kind, detail)

    def halt_until(self, cycle: int, txu_in: TxuIn) -> int:
        """Cycle at which a stuck engine can move again."""
        if txu_in.wait_until is None or txu_in.wait_until <= cycle:
            raise EngineInvariantError(f"Engine cannot make progress after cycle {cycle}")
        return txu_in.wait_until

    def timeline(self) -> list[ScheduleEvent]:
        return sorted(self.events, key=lambda e: e.cycle)


@dataclass
class EngineRun:
    frame: Frame
    counters: Counters
    timing: TimingReport
    schedule: Schedule
    sad: SadAccumulator | None = None
    table: IndexedTable | None = None
    events: list[ScheduleEvent] = field(default_factory=list)
    trace: AccessTrace | None = None
    audit: FetchAudit | None = None

    def __iter__(self):
        yield self.frame
        yield self.counters
        yield self.timing


class AddressEngine:
    def __init__(
        self,
        mode: EngineMode | str,
        mask: NeighborhoodMask,
        scan: ScanOrder | str,
        kernel: Kernel,
        config: TimingConfig | None = None,
        record: bool = False,
    ):
        self.mode = EngineMode(mode)
        if self.mode is EngineMode.SEGMENT:
            raise UnsupportedModeError("Segment addressing is not implemented by the engine")
        self.mask = mask
        self.scan = ScanOrder(scan)
        self.kernel = kernel
        self.config = config or TimingConfig()
        self.record = record
        self.inter = self.mode is EngineMode.INTER
        if self.inter and mask.offsets != ((0, 0),):
            raise UnsupportedModeError(f"Inter addressing works on single pixels; mask {mask.name} has a neighbourhood")
        kernel.validate_for(mask, inter=self.inter)
        fifo_lines = self.config.iim_lines // (2 if self.inter else 1)
        mask.check_engine_fit(self.scan, fifo_lines)

    def _check_inputs(self, inputs: Sequence[Frame]) -> list[Frame]:
        frames = list(inputs)
        expected = 2 if self.inter else 1
        if len(frames) != expected:
            raise ValueError(f"{self.mode} addressing takes {expected} input frame(s), got {len(frames)}")
        if self.inter and frames[0].data.shape != frames[1].data.shape:
            raise DimensionMismatchError(f"Cannot combine {frames[0]!r} with {frames[1]!r}")
        return frames

    def run(self, inputs: Sequence[Frame]) -> EngineRun:
        frames = self._check_inputs(inputs)
        first = frames[0]
        config = self.config
        counters = Counters()
        trace = AccessTrace() if self.record else None
        audit = FetchAudit() if self.record else None
        sad = SadAccumulator() if self.kernel.op is KernelOp.SAD_ACCUMULATE else None
        table = IndexedTable() if self.kernel.uses_table else None
        layout = ZbtLayout(first.width, first.height, slots=len(frames))
        if first.pixel_count == 0:
            schedule = Schedule()
            return EngineRun(first.copy(), counters, timing_report(schedule, config), schedule, sad, table, [], trace, audit)

        logger.info("Engine run: %s %s %s scan over %s", self.mode, self.kernel.op, self.scan, first)
        memory = ZbtMemory()
        policy = config.inter_policy
        transfer = run_transfer_in(frames, layout, counters, memory, self.scan, policy, config.strip_lines, trace)
        ilc = ImageLevelController(transfer, len(frames), policy)

        line_count, line_len = self.scan.lines_and_length(first.width, first.height)
        iim = Iim(len(frames), config.iim_lines, line_len, line_count)
        oim = Oim(config.oim_lines, line_len)
        txu_in = TxuIn(memory, layout, transfer, iim, counters, self.scan, config.strip_lines, trace)
        txu_out = TxuOut(
            memory, oim, counters, first.pixel_count, transfer.end, config.result_switch_fraction, trace,
        )
        unit = ProcessUnit(self.kernel, self.mask, self.scan, iim, oim, counters, audit)
        plc = Plc(line_count, line_len, self.kernel.uses_table)
        dl_lo = unit.dl_range[0]

        cycle = ilc.engine_start
        compute_start = None
        while not plc.finished:
            wrote = txu_out.step(cycle)
            outcome = pipeline_step(plc, unit, cycle)
            loaded = txu_in.step(cycle, max(0, plc.next_fetch_line + dl_lo))
            counters.record_stalls(outcome.stalls)
            if outcome.progressed:
                if compute_start is None and InstrKind.LOAD in outcome.executed:
                    compute_start = cycle
                if cycle < transfer.end:
                    counters.overlap_cycles += 1
            if wrote or loaded or outcome.progressed:
                cycle += 1
                continue
            wake = ilc.halt_until(cycle, txu_in)
            counters.record_stalls(outcome.stalls, wake - cycle - 1)
            cycle = wake

        cycle += oim_drain(txu_out, cycle)
        switch = txu_out.finish(cycle)
        compute_end = txu_out.last_write + 1
        ilc.emit(EventKind.BANK_SWITCH, switch, f"Res_block_A holds {txu_out.words_in_bank[0] // 2} pixels")
        ilc.emit(EventKind.RESULT_COMPLETE, compute_end)

        output = run_transfer_out(memory, txu_out, counters, trace)
        data = output.pixels.reshape(line_count, line_len, 5)
        frame = Frame(self.scan.scan_view(data).copy())

        schedule = Schedule(
            input_transfer_end=transfer.end,
            engine_start=ilc.engine_start,
            compute_start=compute_start,
            compute_end=compute_end,
            bank_switch=switch,
            output_transfer_start=output.start,
            output_transfer_end=output.end,
            words_in=counters.host_words_in,
            words_out=counters.host_words_out,
        )
        timing = timing_report(schedule, config)
        counters.cycles_total = timing.total_cycles
        if trace is not None:
            trace.assert_port_discipline()
        logger.info(
            "Engine run done: %d cycles, %d stalled, %d access events, non-overlap ratio %.4f",
            timing.total_cycles,
            counters.cycles_stalled,
            counters.access_events,
            timing.non_overlap_ratio,
        )
        return EngineRun(frame, counters, timing, schedule, unit.sad, unit.table, ilc.timeline(), trace, audit)


def run_engine(
    mode: EngineMode | str,
    mask: NeighborhoodMask,
    scan: ScanOrder | str,
    kernel: Kernel,
    inputs: Sequence[Frame],
    config: TimingConfig | None = None,
    record: bool = False,
) -> EngineRun:
    return AddressEngine(mode, mask, scan, kernel, config=config, record=record).run(inputs)
