"""Neighbourhood masks and scan orders."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

MAX_LINE_SPAN = 9


class MaskSpanError(ValueError):
    """The neighbourhood window spans more lines than the line buffers hold."""


class ScanOrder(enum.StrEnum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"

    def positions(self, width: int, height: int):
        """Yield (x, y) in scan order."""
        if self is ScanOrder.HORIZONTAL:
            for y in range(height):
                for x in range(width):
                    yield x, y
        else:
            for x in range(width):
                for y in range(height):
                    yield x, y

    def scan_view(self, data: np.ndarray) -> np.ndarray:
        """Return *data* (h, w, ...) viewed as (lines, line_length, ...) in scan order."""
        return data if self is ScanOrder.HORIZONTAL else np.swapaxes(data, 0, 1)

    def lines_and_length(self, width: int, height: int) -> tuple[int, int]:
        return (height, width) if self is ScanOrder.HORIZONTAL else (width, height)


@dataclass(frozen=True)
class NeighborhoodMask:
    """A set of (dy, dx) offsets, kept in raster order (dy, then dx ascending)."""

    offsets: tuple[tuple[int, int], ...]
    name: str = "custom"

    def __post_init__(self):
        if not self.offsets:
            raise MaskSpanError("A neighbourhood mask needs at least one offset")
        ordered = tuple(sorted({(int(dy), int(dx)) for dy, dx in self.offsets}))
        object.__setattr__(self, "offsets", ordered)
        if self.line_span > MAX_LINE_SPAN:
            raise MaskSpanError(
                f"Mask {self.name} spans {self.line_span} lines; at most {MAX_LINE_SPAN} are supported"
            )

    @classmethod
    def from_offsets(cls, offsets, name: str = "custom") -> NeighborhoodMask:
        return cls(tuple((int(dy), int(dx)) for dy, dx in offsets), name=name)

    @classmethod
    def named(cls, name: str) -> NeighborhoodMask:
        try:
            return NAMED_MASKS[name.strip().upper()]
        except KeyError:
            raise ValueError(f"Unknown mask {name!r}; expected one of {', '.join(NAMED_MASKS)}") from None

    # The window always includes the centre so the matrix register can
    # return it alongside the mask offsets.
    @property
    def dy_range(self) -> tuple[int, int]:
        dys = [dy for dy, _ in self.offsets]
        return min(0, *dys), max(0, *dys)

    @property
    def dx_range(self) -> tuple[int, int]:
        dxs = [dx for _, dx in self.offsets]
        return min(0, *dxs), max(0, *dxs)

    @property
    def line_span(self) -> int:
        lo, hi = self.dy_range
        return hi - lo + 1

    @property
    def column_span(self) -> int:
        lo, hi = self.dx_range
        return hi - lo + 1

    @property
    def shape(self) -> tuple[int, int]:
        """Bounding-box shape (rows, columns) of the window."""
        return self.line_span, self.column_span

    @property
    def neighbours(self) -> tuple[tuple[int, int], ...]:
        """Offsets other than the centre, in raster order."""
        return tuple(o for o in self.offsets if o != (0, 0))

    def in_scan_coordinates(self, scan: ScanOrder) -> tuple[tuple[int, int], ...]:
        """Offsets as (d_line, d_position) for *scan*, in the same order as ``offsets``."""
        if scan is ScanOrder.HORIZONTAL:
            return self.offsets
        return tuple((dx, dy) for dy, dx in self.offsets)

    def scan_spans(self, scan: ScanOrder) -> tuple[int, int]:
        """Window extent as (lines across the scan, positions along it), centre included."""
        if scan is ScanOrder.HORIZONTAL:
            return self.line_span, self.column_span
        return self.column_span, self.line_span

    def check_engine_fit(self, scan: ScanOrder, fifo_lines: int) -> None:
        """Raise MaskSpanError unless the window fits one IIM FIFO and the matrix register."""
        lines, positions = self.scan_spans(scan)
        limit = min(MAX_LINE_SPAN, fifo_lines)
        if lines > limit:
            raise MaskSpanError(
                f"Mask {self.name} spans {lines} lines across a {scan} scan; the IIM FIFO holds {limit}"
            )
        if positions > MAX_LINE_SPAN:
            raise MaskSpanError(
                f"Mask {self.name} spans {positions} positions along a {scan} scan; "
                f"the matrix register holds {MAX_LINE_SPAN}"
            )

    def new_per_step(self, scan: ScanOrder = ScanOrder.HORIZONTAL) -> int:
        """Offsets entering a sliding window when the centre advances one position."""
        members = set(self.in_scan_coordinates(scan))
        return sum(1 for dl, dp in members if (dl, dp + 1) not in members)

    def to_dict(self) -> dict:
        return {"name": self.name, "offsets": [list(o) for o in self.offsets]}


CON_0 = NeighborhoodMask(((0, 0),), name="CON_0")
CON_8 = NeighborhoodMask(tuple((dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1)), name="CON_8")

NAMED_MASKS = {"CON_0": CON_0, "CON_8": CON_8}


def gather_neighbourhoods(data: np.ndarray, mask: NeighborhoodMask) -> np.ndarray:
    """Return every pixel's clamped neighbourhood: shape (h, w, K, channels).

    Offsets falling outside the frame replicate the nearest edge pixel.
    """
    height, width = data.shape[:2]
    (dy_lo, dy_hi), (dx_lo, dx_hi) = mask.dy_range, mask.dx_range
    pad = ((-dy_lo, dy_hi), (-dx_lo, dx_hi)) + ((0, 0),) * (data.ndim - 2)
    padded = np.pad(data, pad, mode="edge")
    views = [
        padded[dy - dy_lo : dy - dy_lo + height, dx - dx_lo : dx - dx_lo + width]
        for dy, dx in mask.offsets
    ]
    return np.stack(views, axis=2)
