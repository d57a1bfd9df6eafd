"""Pixel sub-functions.

The array functions work on any leading shape, so the reference scans call them
once per frame and the engine's process unit calls them once per pixel-cycle.
Both paths therefore share the same arithmetic:

  * outputs saturate to the output channel's width,
  * FIR sums are divided by an integer divisor, rounding half away from zero,
  * channels outside out_channels are copied from the centre pixel.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from addressengine.addressing.masks import NeighborhoodMask
from addressengine.addressing.tables import IndexedTable
from addressengine.addressing.tables import TableRecord
from addressengine.frames.pixels import CHANNEL_MAX
from addressengine.frames.pixels import YUV_CHANNELS
from addressengine.frames.pixels import Channel
from addressengine.frames.pixels import Pixel
from addressengine.frames.pixels import normalise_channels
from addressengine.kernels.descriptors import Kernel
from addressengine.kernels.descriptors import KernelOp
from addressengine.kernels.descriptors import KernelResult

logger = logging.getLogger(__name__)

SAD_ACCUMULATOR_BITS = 32


@dataclass(frozen=True, slots=True)
class SadAccumulator:
    total: int = 0
    saturated: bool = False
    width_bits: int = SAD_ACCUMULATOR_BITS

    @property
    def limit(self) -> int:
        return (1 << self.width_bits) - 1

    def add(self, term: int) -> SadAccumulator:
        total = self.total + int(term)
        if total > self.limit:
            if not self.saturated:
                logger.warning("SAD accumulator saturated at %d bits", self.width_bits)
            return SadAccumulator(self.limit, saturated=True, width_bits=self.width_bits)
        return SadAccumulator(total, self.saturated, self.width_bits)


@dataclass(frozen=True, slots=True)
class TableContribution:
    """A histogram update: ``delta`` is this pixel's share, ``updated`` the record to write back."""

    segment_id: int
    delta: TableRecord
    updated: TableRecord


@dataclass
class KernelOutput:
    """Array-level kernel result: ``out`` has the same leading shape as the input."""

    out: np.ndarray
    sad_terms: np.ndarray | None = None
    table_ids: np.ndarray | None = None
    table_sums: np.ndarray | None = None


# ─────────────────────────────────────────────────────────────────────────────
# Array arithmetic
# ─────────────────────────────────────────────────────────────────────────────


def saturate(values: np.ndarray, channel: Channel) -> np.ndarray:
    return np.clip(values, 0, CHANNEL_MAX[channel])


def round_half_away(numerator: np.ndarray, divisor: int) -> np.ndarray:
    """Integer division rounding half away from zero."""
    magnitude = (2 * np.abs(numerator) + divisor) // (2 * divisor)
    return np.sign(numerator) * magnitude


def _write(out: np.ndarray, kernel: Kernel, value_of) -> np.ndarray:
    for ci, co in kernel.channel_pairs():
        out[..., co] = saturate(value_of(ci), co)
    return out


def evaluate_inter(kernel: Kernel, a: np.ndarray, b: np.ndarray) -> KernelOutput:
    """Run an inter kernel on co-located pixels of two frames."""
    a = a.astype(np.int64)
    b = b.astype(np.int64)
    out = a.copy()
    if kernel.op is KernelOp.IDENTITY:
        return KernelOutput(_write(out, kernel, lambda c: a[..., c]))
    absdiff = np.abs(a - b)
    if kernel.out_channels:
        _write(out, kernel, lambda c: absdiff[..., c])
    if kernel.op is KernelOp.SAD_ACCUMULATE:
        terms = absdiff[..., list(kernel.in_channels)].sum(axis=-1)
        return KernelOutput(out, sad_terms=terms)
    return KernelOutput(out)


def evaluate_intra(kernel: Kernel, center: np.ndarray, neigh: np.ndarray, mask: NeighborhoodMask) -> KernelOutput:
    """Run an intra kernel; *neigh* holds the mask offsets on axis -2, in mask order."""
    center = center.astype(np.int64)
    neigh = neigh.astype(np.int64)
    out = center.copy()
    op = kernel.op
    if op is KernelOp.IDENTITY:
        return KernelOutput(_write(out, kernel, lambda c: center[..., c]))
    if op is KernelOp.MORPH_GRADIENT:
        return KernelOutput(_write(out, kernel, lambda c: neigh[..., c].max(axis=-1) - neigh[..., c].min(axis=-1)))
    if op is KernelOp.FIR:
        grid = kernel.coeff_grid(mask)
        dy_lo, dx_lo = mask.dy_range[0], mask.dx_range[0]
        weights = np.array([grid[dy - dy_lo, dx - dx_lo] for dy, dx in mask.offsets], dtype=np.int64)
        return KernelOutput(
            _write(out, kernel, lambda c: round_half_away(neigh[..., c] @ weights, kernel.divisor)),
        )
    if op is KernelOp.HOMOGENEITY:
        others = [i for i, o in enumerate(mask.offsets) if o != (0, 0)]
        compared = list(kernel.in_channels)
        if others:
            spread = np.abs(neigh[..., others, :][..., compared] - center[..., None, compared])
            passes = (spread.max(axis=-1) <= kernel.threshold).all(axis=-1)
        else:
            passes = np.ones(center.shape[:-1], dtype=bool)
        for co in kernel.out_channels:
            out[..., co] = np.where(passes, CHANNEL_MAX[co], 0)
        return KernelOutput(out)
    if op is KernelOp.HISTOGRAM:
        sums = np.zeros_like(center)
        summed = list(kernel.in_channels)
        sums[..., summed] = center[..., summed]
        return KernelOutput(out, table_ids=center[..., Channel.ALFA], table_sums=sums)
    raise ValueError(f"{op} is not an intra kernel")


# ─────────────────────────────────────────────────────────────────────────────
# Per-pixel operations
# ─────────────────────────────────────────────────────────────────────────────


def _pixel_array(p: Pixel) -> np.ndarray:
    return np.array(p.as_tuple(), dtype=np.int64)


def _grid_array(neigh) -> np.ndarray:
    return np.array([[p.as_tuple() for p in row] for row in neigh], dtype=np.int64)


def k_diff(a: Pixel, b: Pixel, channels: Sequence[Channel] = (Channel.Y,)) -> KernelResult:
    channels = normalise_channels(channels)
    kernel = Kernel(KernelOp.DIFF, in_channels=channels, out_channels=channels)
    result = evaluate_inter(kernel, _pixel_array(a), _pixel_array(b))
    return KernelResult(out_pixel=Pixel.from_values(result.out))


def k_sad_accumulate(
    a: Pixel,
    b: Pixel,
    running: SadAccumulator,
    channels: Sequence[Channel] = (Channel.Y,),
) -> SadAccumulator:
    term = sum(abs(a.channel(c) - b.channel(c)) for c in normalise_channels(channels))
    return running.add(term)


def k_morph_gradient(
    neigh: Sequence[Pixel],
    channels: Sequence[Channel] = (Channel.Y,),
    center: Pixel | None = None,
) -> KernelResult:
    """Max minus min over *neigh*; *center* defaults to the middle element."""
    if not neigh:
        raise ValueError("Morphological gradient needs a non-empty neighbourhood")
    channels = normalise_channels(channels)
    center = center if center is not None else neigh[len(neigh) // 2]
    values = np.array([p.as_tuple() for p in neigh], dtype=np.int64)
    out = _pixel_array(center)
    for c in channels:
        out[c] = values[:, c].max() - values[:, c].min()
    return KernelResult(out_pixel=Pixel.from_values(out))


def k_fir(
    neigh: Sequence[Sequence[Pixel]],
    coeffs: Sequence[Sequence[int]],
    channels: Sequence[Channel] = (Channel.Y,),
    divisor: int = 1,
    center: Pixel | None = None,
) -> KernelResult:
    """Weighted sum of a pixel grid; *neigh* and *coeffs* share one shape."""
    values = _grid_array(neigh)
    weights = np.array(coeffs, dtype=np.int64)
    if values.shape[:2] != weights.shape:
        raise ValueError(f"Coefficient grid {weights.shape} does not match neighbourhood {values.shape[:2]}")
    rows, cols = weights.shape
    center = center if center is not None else neigh[rows // 2][cols // 2]
    out = _pixel_array(center)
    for c in normalise_channels(channels):
        total = int((values[..., c] * weights).sum())
        out[c] = saturate(round_half_away(np.int64(total), divisor), c)
    return KernelResult(out_pixel=Pixel.from_values(out))


def k_homogeneity(
    center: Pixel,
    neighbor: Pixel,
    threshold: int,
    channels: Sequence[Channel] = YUV_CHANNELS,
) -> bool:
    if threshold < 0:
        raise ValueError("Threshold must be non-negative")
    return max(abs(center.channel(c) - neighbor.channel(c)) for c in normalise_channels(channels)) <= threshold


def k_histogram(
    center: Pixel,
    table: IndexedTable,
    channels: Sequence[Channel] = (Channel.Y,),
) -> TableContribution:
    """Contribution of *center* to its segment's record, keyed by its Alfa value."""
    sums = [0] * len(Channel)
    for c in normalise_channels(channels):
        sums[c] = center.channel(c)
    delta = TableRecord(count=1, sums=tuple(sums))
    return TableContribution(segment_id=center.alfa, delta=delta, updated=table.read(center.alfa).plus(delta))
