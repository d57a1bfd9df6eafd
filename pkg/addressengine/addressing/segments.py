"""Segment addressing: breadth-first expansion from a seed set.

Pixels are processed in order of hop distance from the seeds under the mask
adjacency. A neighbour is enqueued when it is unvisited and homogeneous with the
pixel being processed; the test is made once, at enqueue time. Neighbours are
tried in the mask's raster order, so the visit order is deterministic.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np

from addressengine.addressing.masks import NeighborhoodMask
from addressengine.addressing.masks import gather_neighbourhoods
from addressengine.addressing.scans import grouped_table
from addressengine.addressing.scans import to_frame
from addressengine.addressing.tables import IndexedTable
from addressengine.frames.pixels import YUV_CHANNELS
from addressengine.frames.pixels import Channel
from addressengine.frames.pixels import Frame
from addressengine.frames.pixels import normalise_channels
from addressengine.kernels.descriptors import Kernel
from addressengine.kernels.ops import evaluate_intra

logger = logging.getLogger(__name__)


class SegmentSeedError(ValueError):
    """Seed set is empty or a seed lies outside the frame."""


@dataclass(frozen=True)
class SegmentCriteria:
    threshold: int
    seeds: tuple[tuple[int, int], ...]
    channels: tuple[Channel, ...] = YUV_CHANNELS

    def __post_init__(self):
        if self.threshold < 0:
            raise ValueError("Segment threshold must be non-negative")
        if not self.seeds:
            raise SegmentSeedError("Segment expansion needs at least one seed")
        seeds = tuple(dict.fromkeys((int(x), int(y)) for x, y in self.seeds))
        object.__setattr__(self, "seeds", seeds)
        object.__setattr__(self, "channels", normalise_channels(self.channels))

    def check_seeds(self, f: Frame) -> None:
        for x, y in self.seeds:
            if not (0 <= x < f.width and 0 <= y < f.height):
                raise SegmentSeedError(f"Seed ({x}, {y}) lies outside {f!r}")

    def homogeneity_maps(self, f: Frame, mask: NeighborhoodMask) -> np.ndarray:
        """(h, w, K) booleans: pixel is homogeneous with its neighbour at each mask offset."""
        values = f.data[..., list(self.channels)].astype(np.int64)
        neigh = gather_neighbourhoods(values, mask)
        return np.abs(neigh - values[:, :, None, :]).max(axis=-1) <= self.threshold

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "seeds": [list(s) for s in self.seeds],
            "channels": [c.name for c in self.channels],
        }


@dataclass
class SegmentResult:
    frame: Frame
    visit_order: list[tuple[int, int]]
    table: IndexedTable | None = None

    def __iter__(self):
        yield self.frame
        yield self.visit_order


def segment_scan(src: Frame, crit: SegmentCriteria, mask: NeighborhoodMask, k: Kernel) -> SegmentResult:
    k.validate_for(mask, inter=False)
    crit.check_seeds(src)

    height, width = src.height, src.width
    passes = crit.homogeneity_maps(src, mask).tolist()
    steps = [(i, dy, dx) for i, (dy, dx) in enumerate(mask.offsets) if (dy, dx) != (0, 0)]

    visited = np.zeros((height, width), dtype=bool)
    queue = deque()
    for x, y in crit.seeds:
        visited[y, x] = True
        queue.append((x, y))

    visit_order = []
    while queue:
        x, y = queue.popleft()
        visit_order.append((x, y))
        here = passes[y][x]
        for i, dy, dx in steps:
            nx, ny = x + dx, y + dy
            if 0 <= nx < width and 0 <= ny < height and not visited[ny, nx] and here[i]:
                visited[ny, nx] = True
                queue.append((nx, ny))

    result = evaluate_intra(k, src.data, gather_neighbourhoods(src.data, mask), mask)
    out = src.data.astype(np.int64)
    out[visited] = result.out[visited]

    table = None
    if k.uses_table:
        xs = np.array([p[0] for p in visit_order], dtype=np.intp)
        ys = np.array([p[1] for p in visit_order], dtype=np.intp)
        table = grouped_table(result.table_ids[ys, xs], result.table_sums[ys, xs])

    logger.debug("segment scan from %d seeds visited %d of %d pixels", len(crit.seeds), len(visit_order), src.pixel_count)
    return SegmentResult(to_frame(out), visit_order, table)
