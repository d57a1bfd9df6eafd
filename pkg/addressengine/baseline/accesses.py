"""Memory accesses of the software solution against the engine.

Software: every scan step reads the neighbourhood pixels that were not in the
previous window (a sliding window keeps the rest) and writes each output
channel. Inter addressing reads one pixel from each of the two frames.

Engine: one read event and one write event per pixel, whatever the mask or the
channels.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

from addressengine.addressing.masks import CON_0
from addressengine.addressing.masks import CON_8
from addressengine.addressing.masks import NeighborhoodMask
from addressengine.addressing.masks import ScanOrder
from addressengine.engine.simulator import EngineMode
from addressengine.frames.pixels import YUV_CHANNELS
from addressengine.frames.pixels import Channel
from addressengine.frames.pixels import normalise_channels
from addressengine.frames.pixels import size_for_tag

logger = logging.getLogger(__name__)

HARDWARE_EVENTS_PER_PIXEL = 2


class ZeroAccessCountError(ValueError):
    """A saving cannot be expressed relative to a zero access count."""


def software_reads_per_pixel(mode: EngineMode | str, mask: NeighborhoodMask, scan: ScanOrder = ScanOrder.HORIZONTAL) -> int:
    mode = EngineMode(mode)
    if mode is EngineMode.INTER:
        return 2 * mask.new_per_step(scan)
    return mask.new_per_step(scan)


def count_software_accesses(
    mode: EngineMode | str,
    mask: NeighborhoodMask,
    in_channels: Sequence[Channel],
    out_channels: Sequence[Channel],
    width: int,
    height: int,
    scan: ScanOrder = ScanOrder.HORIZONTAL,
) -> int:
    """Reads are counted per pixel position, so *in_channels* does not change the total."""
    per_pixel = software_reads_per_pixel(mode, mask, scan) + len(normalise_channels(out_channels))
    return per_pixel * width * height


def count_hardware_accesses(
    mode: EngineMode | str,
    mask: NeighborhoodMask,
    channels: Sequence[Channel],
    width: int,
    height: int,
) -> int:
    return HARDWARE_EVENTS_PER_PIXEL * width * height


@dataclass(frozen=True)
class SavingReport:
    software: int
    hardware: int
    relative_to_software: float
    relative_to_hardware: float

    def to_dict(self) -> dict:
        return {
            "software": self.software,
            "hardware": self.hardware,
            "relative_to_software": self.relative_to_software,
            "relative_to_hardware": self.relative_to_hardware,
        }


def saving(sw: int, hw: int) -> SavingReport:
    """Savings of the engine as percentages of either count."""
    if hw == 0:
        raise ZeroAccessCountError("Hardware access count is zero")
    if sw == 0:
        raise ZeroAccessCountError("Software access count is zero")
    return SavingReport(
        software=sw,
        hardware=hw,
        relative_to_software=100.0 * (sw - hw) / sw,
        relative_to_hardware=100.0 * (sw - hw) / hw,
    )


# ─────────────────────────────────────────────────────────────────────────────
# Published comparison
# ─────────────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class AccessComparison:
    label: str
    mode: EngineMode
    mask: NeighborhoodMask
    in_channels: tuple[Channel, ...]
    out_channels: tuple[Channel, ...]
    published_software: int
    published_hardware: int
    published_saving: str

    def software(self, width: int, height: int) -> int:
        return count_software_accesses(self.mode, self.mask, self.in_channels, self.out_channels, width, height)

    def hardware(self, width: int, height: int) -> int:
        return count_hardware_accesses(self.mode, self.mask, self.in_channels, width, height)


PUBLISHED_COMPARISONS: tuple[AccessComparison, ...] = (
    AccessComparison("Inter Y→Y", EngineMode.INTER, CON_0, (Channel.Y,), (Channel.Y,), 304_128, 202_752, "33%"),
    AccessComparison("Intra CON_0 Y→Y", EngineMode.INTRA, CON_0, (Channel.Y,), (Channel.Y,), 202_752, 202_752, "0%"),
    AccessComparison("Intra CON_8 Y→Y", EngineMode.INTRA, CON_8, (Channel.Y,), (Channel.Y,), 405_504, 202_752, "50%"),
    AccessComparison("Intra CON_8 YUV→YUV", EngineMode.INTRA, CON_8, YUV_CHANNELS, YUV_CHANNELS, 608_256, 202_752, "200%"),
)


@dataclass(frozen=True)
class ComparisonResult:
    row: AccessComparison
    software: int
    hardware: int
    saving: SavingReport
    matches: bool | None

    def to_dict(self) -> dict:
        return {
            "label": self.row.label,
            "software": self.software,
            "hardware": self.hardware,
            "saving": self.saving.to_dict(),
            "published": {
                "software": self.row.published_software,
                "hardware": self.row.published_hardware,
                "saving": self.row.published_saving,
            },
            "matches": self.matches,
        }


def compare_accesses(dims: str = "CIF") -> list[ComparisonResult]:
    """The four published configurations; ``matches`` is None off the published CIF size."""
    width, height = size_for_tag(dims)
    published = (width, height) == size_for_tag("CIF")
    results = []
    for row in PUBLISHED_COMPARISONS:
        sw, hw = row.software(width, height), row.hardware(width, height)
        matches = (sw, hw) == (row.published_software, row.published_hardware) if published else None
        results.append(ComparisonResult(row, sw, hw, saving(sw, hw), matches))
    return results
