"""Clock, bandwidth and the timing report of a simulated run.

Engine and host bus share one clock. The host bus moves one 32-bit word per
cycle, which is also the rate of one ZBT bank port, so the bank rate must equal
clock x bus width.

How the reported ratio comes out for a worst-case inter run of N pixels:

  input transfer     2 frames x 2 words x N = 4N cycles
  engine             starts when both images are stored; the OIM drains one
                     word per cycle, so results reach Res_block_A at N/2
                     pixels per N cycles once the OIM has filled
  bank switch        when Res_block_A holds result_switch_fraction of the
                     result: 0.25 x N pixels = 0.5N cycles after the start,
                     plus the pipeline and first-line fill (about width + 5)
  non-overlap ratio  0.5N / 4N = 0.125
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import asdict
from dataclasses import dataclass

logger = logging.getLogger(__name__)

DEFAULT_CLOCK_HZ = 66_000_000
DEFAULT_BUS_WIDTH_BYTES = 4
DEFAULT_ZBT_BANK_RATE = 264_000_000
DEFAULT_STRIP_LINES = 16
DEFAULT_IIM_LINES = 16
DEFAULT_OIM_LINES = 16
DEFAULT_RESULT_SWITCH_FRACTION = 0.25


class TimingConfigError(ValueError):
    """Timing parameters are inconsistent."""


class InterPolicy(enum.StrEnum):
    STREAMED = "streamed"
    WORST_CASE = "worst_case"


@dataclass(frozen=True)
class TimingConfig:
    clock_hz: float = DEFAULT_CLOCK_HZ
    bus_width_bytes: int = DEFAULT_BUS_WIDTH_BYTES
    zbt_bank_rate: float = DEFAULT_ZBT_BANK_RATE
    strip_lines: int = DEFAULT_STRIP_LINES
    iim_lines: int = DEFAULT_IIM_LINES
    oim_lines: int = DEFAULT_OIM_LINES
    result_switch_fraction: float = DEFAULT_RESULT_SWITCH_FRACTION
    inter_policy: InterPolicy = InterPolicy.STREAMED

    def __post_init__(self):
        object.__setattr__(self, "inter_policy", InterPolicy(self.inter_policy))
        if self.clock_hz <= 0 or self.bus_width_bytes <= 0:
            raise TimingConfigError("Clock and bus width must be positive")
        if not math.isclose(self.bus_bytes_per_second, self.zbt_bank_rate):
            raise TimingConfigError(
                f"Bus rate {self.bus_bytes_per_second:.0f} B/s does not match ZBT bank rate {self.zbt_bank_rate:.0f} B/s",
            )
        if self.strip_lines <= 0:
            raise TimingConfigError("Strip size must be positive")
        if self.iim_lines < 2 or self.iim_lines % 2:
            raise TimingConfigError("IIM must hold an even number of lines so inter mode can split it in two")
        if self.oim_lines <= 0:
            raise TimingConfigError("OIM must hold at least one line")
        if not 0 < self.result_switch_fraction <= 1:
            raise TimingConfigError("Result switch fraction must be in (0, 1]")

    @property
    def bus_bytes_per_second(self) -> float:
        return self.clock_hz * self.bus_width_bytes

    def seconds(self, cycles: int) -> float:
        return cycles / self.clock_hz

    def with_policy(self, policy: InterPolicy | str) -> TimingConfig:
        return TimingConfig(**{**asdict(self), "inter_policy": InterPolicy(policy)})

    def to_dict(self) -> dict:
        data = asdict(self)
        data["inter_policy"] = str(self.inter_policy)
        return data

    @classmethod
    def from_settings(cls, **overrides) -> TimingConfig:
        """Defaults from the ``ADDRESSENGINE_*`` settings when Django is configured."""
        from django.conf import settings

        values = {}
        if settings.configured:
            values = {
                "clock_hz": getattr(settings, "ADDRESSENGINE_CLOCK_HZ", DEFAULT_CLOCK_HZ),
                "strip_lines": getattr(settings, "ADDRESSENGINE_STRIP_LINES", DEFAULT_STRIP_LINES),
                "iim_lines": getattr(settings, "ADDRESSENGINE_IIM_LINES", DEFAULT_IIM_LINES),
                "oim_lines": getattr(settings, "ADDRESSENGINE_OIM_LINES", DEFAULT_OIM_LINES),
                "result_switch_fraction": getattr(
                    settings,
                    "ADDRESSENGINE_RESULT_SWITCH_FRACTION",
                    DEFAULT_RESULT_SWITCH_FRACTION,
                ),
                "inter_policy": getattr(settings, "ADDRESSENGINE_INTER_POLICY", InterPolicy.STREAMED),
            }
            values["zbt_bank_rate"] = values["clock_hz"] * DEFAULT_BUS_WIDTH_BYTES
        values.update({k: v for k, v in overrides.items() if v is not None})
        if "clock_hz" in values and overrides.get("zbt_bank_rate") is None:
            values["zbt_bank_rate"] = values["clock_hz"] * values.get("bus_width_bytes", DEFAULT_BUS_WIDTH_BYTES)
        return cls(**values)


@dataclass
class Schedule:
    """Cycle stamps collected while a run executes; all zero for an empty run."""

    input_transfer_end: int = 0
    engine_start: int = 0
    compute_start: int = 0
    compute_end: int = 0
    bank_switch: int = 0
    output_transfer_start: int = 0
    output_transfer_end: int = 0
    words_in: int = 0
    words_out: int = 0


@dataclass(frozen=True)
class TimingReport:
    total_cycles: int
    input_transfer_cycles: int
    output_transfer_cycles: int
    output_transfer_start: int
    output_transfer_end: int
    compute_start: int
    compute_end: int
    compute_cycles: int
    compute_only_cycles: int
    compute_tail_cycles: int
    overlap_fraction: float
    non_overlap_ratio: float
    bus_occupancy_cycles: int
    seconds: float

    @property
    def transfer_cycles(self) -> int:
        return self.input_transfer_cycles + self.output_transfer_cycles

    def to_dict(self) -> dict:
        return {**asdict(self), "transfer_cycles": self.transfer_cycles}


def _overlap(a_start: int, a_end: int, b_start: int, b_end: int) -> int:
    return max(0, min(a_end, b_end) - max(a_start, b_start))


def timing_report(run: Schedule, config: TimingConfig | None = None) -> TimingReport:
    """Summarise a run's schedule.

    compute_only_cycles counts the cycles between the end of the input transfer
    and the moment the host can start reading results back; the non-overlap
    ratio relates them to the input transfer time.
    """
    config = config or TimingConfig()
    t_in = run.input_transfer_end
    compute_cycles = max(0, run.compute_end - run.compute_start)
    compute_only = max(0, run.output_transfer_start - t_in) if run.words_out else 0
    total = max(run.output_transfer_end, run.compute_end, t_in)
    return TimingReport(
        total_cycles=total,
        input_transfer_cycles=t_in,
        output_transfer_cycles=run.words_out,
        output_transfer_start=run.output_transfer_start,
        output_transfer_end=run.output_transfer_end,
        compute_start=run.compute_start,
        compute_end=run.compute_end,
        compute_cycles=compute_cycles,
        compute_only_cycles=compute_only,
        compute_tail_cycles=max(0, run.compute_end - t_in) if compute_cycles else 0,
        overlap_fraction=_overlap(run.compute_start, run.compute_end, 0, t_in) / compute_cycles if compute_cycles else 0.0,
        non_overlap_ratio=compute_only / t_in if t_in else 0.0,
        bus_occupancy_cycles=run.words_in + run.words_out,
        seconds=config.seconds(total),
    )
