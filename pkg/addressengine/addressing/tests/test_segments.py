"""Tests for seeded breadth-first segment addressing."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from addressengine.addressing.masks import CON_8
from addressengine.addressing.masks import NeighborhoodMask
from addressengine.addressing.segments import SegmentCriteria
from addressengine.addressing.segments import SegmentSeedError
from addressengine.addressing.segments import segment_scan
from addressengine.frames.pixels import YUV_CHANNELS
from addressengine.frames.pixels import Channel
from addressengine.frames.pixels import Frame
from addressengine.frames.tests.strategies import frames
from addressengine.kernels.descriptors import Kernel
from addressengine.kernels.descriptors import KernelOp

CON_4 = NeighborhoodMask.from_offsets([(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)], name="CON_4")
IDENTITY = Kernel(KernelOp.IDENTITY)


def flood_layers(f: Frame, crit: SegmentCriteria, mask: NeighborhoodMask) -> np.ndarray:
    """Hop distance from the seeds by repeated one-step expansion; -1 where unreached."""
    values = f.data[..., list(crit.channels)].astype(np.int64)
    height, width = f.height, f.width
    layer = np.full((height, width), -1)
    frontier = np.zeros((height, width), dtype=bool)
    for x, y in crit.seeds:
        frontier[y, x] = True
    step = 0
    while frontier.any():
        layer[frontier] = step
        grown = np.zeros_like(frontier)
        for y, x in zip(*np.nonzero(frontier), strict=True):
            for dy, dx in mask.neighbours:
                ny, nx = y + dy, x + dx
                if 0 <= ny < height and 0 <= nx < width and layer[ny, nx] < 0:
                    if np.abs(values[ny, nx] - values[y, x]).max() <= crit.threshold:
                        grown[ny, nx] = True
        frontier = grown
        step += 1
    return layer


class TestSegmentCriteria:
    def test_needs_a_seed(self):
        with pytest.raises(SegmentSeedError):
            SegmentCriteria(threshold=1, seeds=())

    def test_duplicate_seeds_collapse(self):
        assert SegmentCriteria(threshold=0, seeds=((1, 1), (1, 1), (0, 2))).seeds == ((1, 1), (0, 2))

    def test_seed_outside_frame(self):
        crit = SegmentCriteria(threshold=0, seeds=((4, 0),))
        with pytest.raises(SegmentSeedError, match="outside"):
            segment_scan(Frame.blank(4, 4), crit, CON_8, IDENTITY)

    def test_negative_threshold(self):
        with pytest.raises(ValueError, match="non-negative"):
            SegmentCriteria(threshold=-1, seeds=((0, 0),))


class TestSegmentScan:
    def test_stops_at_edge_of_region(self):
        y = np.array([[10, 11, 90], [12, 10, 91], [95, 93, 92]])
        crit = SegmentCriteria(threshold=3, seeds=((0, 0),), channels=("Y",))
        _, order = segment_scan(Frame.from_planes(y), crit, CON_4, IDENTITY)
        assert set(order) == {(0, 0), (1, 0), (0, 1), (1, 1)}

    def test_neighbours_tried_in_mask_raster_order(self):
        crit = SegmentCriteria(threshold=0, seeds=((1, 1),))
        _, order = segment_scan(Frame.blank(3, 3), crit, CON_8, IDENTITY)
        assert order == [(1, 1), (0, 0), (1, 0), (2, 0), (0, 1), (2, 1), (0, 2), (1, 2), (2, 2)]

    def test_output_only_changes_visited_pixels(self):
        y = np.array([[0, 0, 200], [0, 0, 200]])
        f = Frame.from_planes(y)
        crit = SegmentCriteria(threshold=0, seeds=((0, 0),), channels=("Y",))
        k = Kernel(KernelOp.MORPH_GRADIENT)
        result = segment_scan(f, crit, CON_4, k)
        assert result.frame.plane(Channel.Y).tolist() == [[0, 200, 200], [0, 200, 200]]

    def test_histogram_in_visit_order(self):
        f = Frame.from_planes(y=[[1, 1], [1, 1]], alfa=[[5, 6], [6, 5]])
        crit = SegmentCriteria(threshold=0, seeds=((1, 1),), channels=("Y",))
        result = segment_scan(f, crit, CON_4, Kernel(KernelOp.HISTOGRAM))
        assert result.table.ids() == [5, 6]
        assert result.table.read(5).count == 2

    @given(frames(max_side=10), st.integers(0, 40), st.data())
    def test_matches_layered_flood(self, f, threshold, data):
        seeds = tuple(
            data.draw(st.lists(st.tuples(st.integers(0, f.width - 1), st.integers(0, f.height - 1)), min_size=1, max_size=3)),
        )
        crit = SegmentCriteria(threshold=threshold, seeds=seeds, channels=YUV_CHANNELS)
        _, order = segment_scan(f, crit, CON_8, IDENTITY)
        layer = flood_layers(f, crit, CON_8)
        assert len(order) == len(set(order))
        assert set(order) == {(int(x), int(y)) for y, x in zip(*np.nonzero(layer >= 0), strict=True)}
        assert list(order[: len(crit.seeds)]) == list(crit.seeds)
        distances = [layer[y, x] for x, y in order]
        assert distances == sorted(distances)
