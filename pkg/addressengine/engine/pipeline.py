"""Pixel level controller and the four-stage process unit.

Each result pixel is one pixel-cycle of four instructions:

  stage 1  SCAN          advance the scan position counters
  stage 2  LOAD / SHIFT  fill the matrix register from the IIM (LOAD at the
                         start of a line, SHIFT in one new column otherwise)
  stage 3  EXEC          run the kernel on the matrix register contents
  stage 4  STORE         push the result pixel into the OIM

Up to four pixel-cycles are in flight, one per stage. Stages are visited oldest
first each cycle; an instruction moves on only if the next stage's latch is
free, so a stall holds every younger pixel-cycle behind it. The arbiter grants
resources in the same order, so on a conflict the older instruction wins.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from dataclasses import field

import numpy as np

from addressengine.addressing.masks import NeighborhoodMask
from addressengine.addressing.masks import ScanOrder
from addressengine.addressing.tables import IndexedTable
from addressengine.addressing.tables import TableRecord
from addressengine.engine.buffers import Iim
from addressengine.engine.buffers import Oim
from addressengine.engine.counters import Counters
from addressengine.engine.counters import FetchAudit
from addressengine.engine.counters import StallReason
from addressengine.engine.memory import EngineInvariantError
from addressengine.frames.pixels import pack_array
from addressengine.kernels.descriptors import Kernel
from addressengine.kernels.descriptors import KernelOp
from addressengine.kernels.ops import SadAccumulator
from addressengine.kernels.ops import TableContribution
from addressengine.kernels.ops import evaluate_inter
from addressengine.kernels.ops import evaluate_intra

logger = logging.getLogger(__name__)

STAGES = 4


class InstrKind(enum.StrEnum):
    SCAN = "scan"
    LOAD = "load"
    SHIFT = "shift"
    EXEC = "exec"
    STORE = "store"


class Resource(enum.StrEnum):
    SCAN_COUNTERS = "scan_counters"
    IIM_PORT = "iim_port"
    MATRIX_REGISTER = "matrix_register"
    ALU = "alu"
    OIM_PORT = "oim_port"
    INDEX_TABLE = "index_table"


@dataclass(eq=False)
class PipelineInstr:
    """One pixel-cycle; ``stage`` is the stage it executes next."""

    seq: int
    line: int
    pos: int
    stage: int = 1
    operands: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    out: np.ndarray | None = None
    contribution: TableContribution | None = None

    @property
    def kind(self) -> InstrKind:
        if self.stage == 1:
            return InstrKind.SCAN
        if self.stage == 2:
            return InstrKind.LOAD if self.pos == 0 else InstrKind.SHIFT
        return InstrKind.EXEC if self.stage == 3 else InstrKind.STORE


class MatrixRegister:
    """Window around the current centre in scan coordinates: (lines, positions, channels)."""

    def __init__(self, offsets: tuple[tuple[int, int], ...]):
        dls = [dl for dl, _ in offsets] + [0]
        dps = [dp for _, dp in offsets] + [0]
        self.dl_range = (min(dls), max(dls))
        self.dp_range = (min(dps), max(dps))
        shape = (self.dl_range[1] - self.dl_range[0] + 1, self.dp_range[1] - self.dp_range[0] + 1, 5)
        self.grid = np.zeros(shape, dtype=np.int64)
        self._rows = np.array([dl - self.dl_range[0] for dl, _ in offsets], dtype=np.intp)
        self._cols = np.array([dp - self.dp_range[0] for _, dp in offsets], dtype=np.intp)

    @classmethod
    def for_mask(cls, mask: NeighborhoodMask, scan: ScanOrder) -> MatrixRegister:
        return cls(mask.in_scan_coordinates(scan))

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape[:2]

    def load(self, columns: list[np.ndarray]) -> None:
        if len(columns) != self.grid.shape[1]:
            raise EngineInvariantError(f"LOAD of {len(columns)} columns into a {self.shape} register")
        for j, column in enumerate(columns):
            self.grid[:, j] = column

    def shift(self, column: np.ndarray) -> None:
        self.grid[:, :-1] = self.grid[:, 1:]
        self.grid[:, -1] = column

    def center(self) -> np.ndarray:
        return self.grid[-self.dl_range[0], -self.dp_range[0]].copy()

    def neighbourhood(self) -> np.ndarray:
        """Values at the mask offsets, in mask order: (K, channels)."""
        return self.grid[self._rows, self._cols]


# ─────────────────────────────────────────────────────────────────────────────
# Pixel level controller
# ─────────────────────────────────────────────────────────────────────────────


class ControlFsm:
    """Emits pixel-cycles in scan order."""

    def __init__(self, line_count: int, line_len: int):
        self.line_count = line_count
        self.line_len = line_len
        self.next_seq = 0

    @property
    def total(self) -> int:
        return self.line_count * self.line_len

    @property
    def finished(self) -> bool:
        return self.next_seq >= self.total

    @property
    def next_line(self) -> int:
        return self.next_seq // self.line_len if self.line_len else 0

    def issue(self) -> PipelineInstr | None:
        if self.finished:
            return None
        seq = self.next_seq
        self.next_seq += 1
        line, pos = divmod(seq, self.line_len)
        return PipelineInstr(seq=seq, line=line, pos=pos)


class InstructionsFsm:
    def __init__(self, uses_table: bool = False):
        self.uses_table = uses_table

    def resources(self, instr: PipelineInstr) -> frozenset[Resource]:
        stage = instr.stage
        if stage == 1:
            return frozenset({Resource.SCAN_COUNTERS})
        if stage == 2:
            return frozenset({Resource.IIM_PORT, Resource.MATRIX_REGISTER})
        held = {Resource.ALU} if stage == 3 else {Resource.OIM_PORT}
        if self.uses_table:
            held.add(Resource.INDEX_TABLE)
        return frozenset(held)

    def drive(self, instr: PipelineInstr, unit: ProcessUnit, cycle: int) -> StallReason | None:
        stage = instr.stage
        if stage == 1:
            return unit.scan(instr, cycle)
        if stage == 2:
            return unit.fetch(instr, cycle)
        if stage == 3:
            return unit.execute(instr, cycle)
        return unit.store(instr, cycle)


class Arbiter:
    def __init__(self):
        self.grants: dict[Resource, int] = {}
        self.conflicts = 0

    def begin_cycle(self) -> None:
        self.grants.clear()

    def request(self, instr: PipelineInstr, resources: frozenset[Resource]) -> bool:
        if any(r in self.grants for r in resources):
            self.conflicts += 1
            return False
        for r in resources:
            self.grants[r] = instr.seq
        return True


class StartPipeline:
    """The stage latches; index 0 holds the instruction about to run stage 1."""

    def __init__(self):
        self.latches: list[PipelineInstr | None] = [None] * STAGES
        self.retired = 0

    @property
    def idle(self) -> bool:
        return all(instr is None for instr in self.latches)

    def accept(self, instr: PipelineInstr) -> None:
        if self.latches[0] is not None:
            raise EngineInvariantError("Pixel-cycle issued while stage 1 is occupied")
        self.latches[0] = instr

    def oldest_first(self) -> list[PipelineInstr]:
        return [instr for instr in reversed(self.latches) if instr is not None]

    def can_advance(self, instr: PipelineInstr) -> bool:
        return instr.stage == STAGES or self.latches[instr.stage] is None

    def advance(self, instr: PipelineInstr) -> None:
        self.latches[instr.stage - 1] = None
        if instr.stage == STAGES:
            self.retired += 1
            return
        self.latches[instr.stage] = instr
        instr.stage += 1

    def in_stage(self, stage: int) -> PipelineInstr | None:
        return self.latches[stage - 1]


class Plc:
    def __init__(self, line_count: int, line_len: int, uses_table: bool = False):
        self.control = ControlFsm(line_count, line_len)
        self.instructions = InstructionsFsm(uses_table)
        self.arbiter = Arbiter()
        self.start = StartPipeline()

    @property
    def finished(self) -> bool:
        return self.control.finished and self.start.idle

    @property
    def next_fetch_line(self) -> int:
        """Line of the oldest pixel-cycle that has not yet run stage 2."""
        for stage in (2, 1):
            instr = self.start.in_stage(stage)
            if instr is not None:
                return instr.line
        return self.control.next_line if not self.control.finished else self.control.line_count


@dataclass
class StepOutcome:
    executed: list[InstrKind] = field(default_factory=list)
    stalls: set[StallReason] = field(default_factory=set)
    retired: int = 0

    @property
    def progressed(self) -> bool:
        return bool(self.executed)


def pipeline_step(plc: Plc, unit: ProcessUnit, cycle: int) -> StepOutcome:
    """Advance the pipeline by one clock cycle."""
    start = plc.start
    if start.in_stage(1) is None:
        instr = plc.control.issue()
        if instr is not None:
            start.accept(instr)

    plc.arbiter.begin_cycle()
    outcome = StepOutcome()
    for instr in start.oldest_first():
        if not start.can_advance(instr):
            continue
        kind = instr.kind
        if not plc.arbiter.request(instr, plc.instructions.resources(instr)):
            outcome.stalls.add(StallReason.ARBITER)
            continue
        reason = plc.instructions.drive(instr, unit, cycle)
        if reason is not None:
            outcome.stalls.add(reason)
            continue
        if instr.stage == STAGES:
            outcome.retired += 1
        start.advance(instr)
        outcome.executed.append(kind)
    return outcome


# ─────────────────────────────────────────────────────────────────────────────
# Process unit
# ─────────────────────────────────────────────────────────────────────────────


class ProcessUnit:
    """Datapath driven by the instructions FSM; stage methods return a stall reason or None."""

    def __init__(
        self,
        kernel: Kernel,
        mask: NeighborhoodMask,
        scan: ScanOrder,
        iim: Iim,
        oim: Oim,
        counters: Counters,
        audit: FetchAudit | None = None,
    ):
        self.kernel = kernel
        self.mask = mask
        self.iim = iim
        self.oim = oim
        self.counters = counters
        self.audit = audit
        self.inter = len(iim.fifos) == 2
        self.registers = [MatrixRegister.for_mask(mask, scan) for _ in iim.fifos]
        self.dl_range = self.registers[0].dl_range
        self.dp_range = self.registers[0].dp_range
        self.position = (0, 0)
        self.sad = SadAccumulator() if kernel.op is KernelOp.SAD_ACCUMULATE else None
        self.table = IndexedTable() if kernel.uses_table else None

    def scan(self, instr: PipelineInstr, cycle: int) -> None:
        self.position = (instr.line, instr.pos)

    def fetch(self, instr: PipelineInstr, cycle: int) -> StallReason | None:
        kind = instr.kind
        lo, hi = self.dp_range
        wanted = range(instr.pos + lo, instr.pos + hi + 1) if kind is InstrKind.LOAD else (instr.pos + hi,)
        columns = []
        for fifo in range(len(self.registers)):
            fetched = [self.iim.fetch_column((instr.line, p), self.dl_range, cycle, fifo) for p in wanted]
            stalled = next((f for f in fetched if f.stalled), None)
            if stalled is not None:
                if self.audit is not None:
                    self.audit.stalled(cycle, instr.line, instr.pos, kind, stalled.lines, stalled.missing)
                return StallReason.IIM_EMPTY
            columns.append(fetched)

        for register, fetched in zip(self.registers, columns, strict=True):
            if kind is InstrKind.LOAD:
                register.load([f.column for f in fetched])
            else:
                register.shift(fetched[0].column)
            instr.operands.append((register.center(), register.neighbourhood()))
        if kind is InstrKind.LOAD:
            self.counters.loads += 1
        else:
            self.counters.shifts += 1
        if self.audit is not None:
            first = columns[0][0]
            ready_at = max(f.ready_at for fetched in columns for f in fetched)
            self.audit.fetched(cycle, instr.line, instr.pos, kind, first.lines, ready_at)
        return None

    def execute(self, instr: PipelineInstr, cycle: int) -> None:
        if self.inter:
            (a, _), (b, _) = instr.operands
            result = evaluate_inter(self.kernel, a, b)
            if self.sad is not None:
                self.sad = self.sad.add(int(result.sad_terms))
        else:
            center, neigh = instr.operands[0]
            result = evaluate_intra(self.kernel, center, neigh, self.mask)
            if self.table is not None:
                segment_id = int(result.table_ids)
                delta = TableRecord(count=1, sums=tuple(result.table_sums.tolist()))
                instr.contribution = TableContribution(segment_id, delta, self.table.read(segment_id).plus(delta))
        instr.out = result.out
        instr.operands = []

    def store(self, instr: PipelineInstr, cycle: int) -> StallReason | None:
        if self.oim.full:
            return StallReason.OIM_FULL
        lower, upper = pack_array(instr.out)
        self.oim.push(int(lower), int(upper))
        if instr.contribution is not None:
            self.table.write(instr.contribution.segment_id, instr.contribution.updated)
        return None
