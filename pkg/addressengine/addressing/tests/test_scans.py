"""Tests for the reference inter and intra scans."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import ndimage

from addressengine.addressing.masks import CON_0
from addressengine.addressing.masks import CON_8
from addressengine.addressing.masks import ScanOrder
from addressengine.addressing.scans import DimensionMismatchError
from addressengine.addressing.scans import inter_scan
from addressengine.addressing.scans import intra_scan
from addressengine.frames.pixels import YUV_CHANNELS
from addressengine.frames.pixels import Channel
from addressengine.frames.pixels import Frame
from addressengine.frames.tests.strategies import frame_pairs
from addressengine.frames.tests.strategies import frames
from addressengine.kernels.descriptors import Kernel
from addressengine.kernels.descriptors import KernelConfigError
from addressengine.kernels.descriptors import KernelOp

GRADIENT = Kernel(KernelOp.MORPH_GRADIENT, in_channels=YUV_CHANNELS, out_channels=YUV_CHANNELS)


# ─────────────────────────────────────────────────────────────────────────────
# Inter
# ─────────────────────────────────────────────────────────────────────────────

class TestInterScan:
    @given(frame_pairs())
    def test_diff_is_absolute_difference(self, pair):
        a, b = pair
        result = inter_scan(a, b, Kernel(KernelOp.DIFF))
        expected = np.abs(a.data[..., 0].astype(int) - b.data[..., 0].astype(int))
        np.testing.assert_array_equal(result.frame.plane(Channel.Y), expected)
        np.testing.assert_array_equal(result.frame.data[..., 1:], a.data[..., 1:])

    @given(frame_pairs())
    def test_sad_is_sum_of_absolute_differences(self, pair):
        a, b = pair
        result = inter_scan(a, b, Kernel(KernelOp.SAD_ACCUMULATE, out_channels=()))
        expected = int(np.abs(a.data[..., 0].astype(int) - b.data[..., 0].astype(int)).sum())
        assert result.sad.total == expected
        assert not result.sad.saturated
        assert result.frame == a

    def test_identical_frames_have_zero_sad(self, small_frame):
        result = inter_scan(small_frame, small_frame.copy(), Kernel(KernelOp.SAD_ACCUMULATE, out_channels=()))
        assert result.sad.total == 0

    def test_size_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            inter_scan(Frame.blank(4, 4), Frame.blank(4, 2), Kernel(KernelOp.DIFF))

    def test_intra_only_kernel_rejected(self):
        with pytest.raises(KernelConfigError, match="not available in inter"):
            inter_scan(Frame.blank(2, 2), Frame.blank(2, 2), Kernel(KernelOp.MORPH_GRADIENT))


# ─────────────────────────────────────────────────────────────────────────────
# Intra
# ─────────────────────────────────────────────────────────────────────────────

class TestIntraScan:
    @given(frames(), st.sampled_from(list(ScanOrder)))
    def test_morph_gradient_matches_grey_morphology(self, f, scan):
        result = intra_scan(f, CON_8, scan, GRADIENT)
        for c in YUV_CHANNELS:
            plane = f.plane(c).astype(np.int64)
            dilated = ndimage.grey_dilation(plane, size=(3, 3), mode="nearest")
            eroded = ndimage.grey_erosion(plane, size=(3, 3), mode="nearest")
            np.testing.assert_array_equal(result.frame.plane(c), dilated - eroded)

    @given(frames())
    def test_fir_matches_correlation(self, f):
        coeffs = ((1, 2, 1), (2, 4, 2), (1, 2, 1))
        k = Kernel(KernelOp.FIR, coeffs=coeffs, divisor=16)
        result = intra_scan(f, CON_8, ScanOrder.HORIZONTAL, k)
        total = ndimage.correlate(f.plane(Channel.Y).astype(np.int64), np.array(coeffs), mode="nearest")
        np.testing.assert_array_equal(result.frame.plane(Channel.Y), (2 * total + 16) // 32)

    def test_fir_saturates(self):
        f = Frame.from_planes(np.full((3, 3), 200))
        k = Kernel(KernelOp.FIR, coeffs=((0, 0, 0), (0, 2, 0), (0, 0, 0)))
        assert int(intra_scan(f, CON_8, ScanOrder.HORIZONTAL, k).frame.plane(Channel.Y).max()) == 255

    def test_fir_negative_weights_clip_at_zero(self):
        f = Frame.from_planes(np.full((3, 3), 10))
        k = Kernel(KernelOp.FIR, coeffs=((0, 0, 0), (0, -1, 0), (0, 0, 0)))
        assert int(intra_scan(f, CON_8, ScanOrder.HORIZONTAL, k).frame.plane(Channel.Y).max()) == 0

    def test_identity_con0_copies(self, small_frame):
        result = intra_scan(small_frame, CON_0, ScanOrder.HORIZONTAL, Kernel(KernelOp.IDENTITY))
        assert result.frame == small_frame

    def test_identity_broadcasts_one_input(self):
        f = Frame.from_planes(np.full((2, 2), 9))
        k = Kernel(KernelOp.IDENTITY, in_channels=("Y",), out_channels=YUV_CHANNELS)
        out = intra_scan(f, CON_0, ScanOrder.HORIZONTAL, k).frame
        assert out.pixel(1, 1).as_tuple()[:3] == (9, 9, 9)

    def test_homogeneity_marks_flat_pixels(self):
        y = np.array([[5, 5, 5, 5], [5, 5, 5, 5], [5, 5, 5, 90]])
        k = Kernel(KernelOp.HOMOGENEITY, in_channels=("Y",), out_channels=("AUX",), threshold=2)
        out = intra_scan(Frame.from_planes(y), CON_8, ScanOrder.HORIZONTAL, k).frame.plane(Channel.AUX)
        assert out.tolist() == [[0xFFFF, 0xFFFF, 0xFFFF, 0xFFFF], [0xFFFF, 0xFFFF, 0, 0], [0xFFFF, 0xFFFF, 0, 0]]

    def test_histogram_groups_by_alfa(self):
        f = Frame.from_planes(y=[[1, 2], [3, 4]], alfa=[[7, 3], [7, 7]])
        result = intra_scan(f, CON_0, ScanOrder.HORIZONTAL, Kernel(KernelOp.HISTOGRAM))
        assert result.table.ids() == [7, 3]
        assert result.table.read(7).count == 3
        assert result.table.read(7).y_sum == 8
        assert result.frame == f

    def test_histogram_first_touch_follows_scan(self):
        f = Frame.from_planes(y=[[1, 2], [3, 4]], alfa=[[0, 1], [2, 3]])
        vertical = intra_scan(f, CON_0, ScanOrder.VERTICAL, Kernel(KernelOp.HISTOGRAM))
        assert vertical.table.ids() == [0, 2, 1, 3]

    def test_empty_frame(self):
        result = intra_scan(Frame.blank(0, 0), CON_8, ScanOrder.HORIZONTAL, GRADIENT)
        assert result.frame.pixel_count == 0

    def test_inter_only_kernel_rejected(self):
        with pytest.raises(KernelConfigError):
            intra_scan(Frame.blank(2, 2), CON_8, ScanOrder.HORIZONTAL, Kernel(KernelOp.DIFF))

    def test_fir_grid_must_match_mask(self):
        k = Kernel(KernelOp.FIR, coeffs=((1,),))
        with pytest.raises(KernelConfigError, match="does not match mask shape"):
            intra_scan(Frame.blank(2, 2), CON_8, ScanOrder.HORIZONTAL, k)
