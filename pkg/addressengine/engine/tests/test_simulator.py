"""The engine simulator against the reference scans."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import settings
from hypothesis import strategies as st

from addressengine.addressing.masks import CON_0
from addressengine.addressing.masks import CON_8
from addressengine.addressing.masks import MaskSpanError
from addressengine.addressing.masks import NeighborhoodMask
from addressengine.addressing.scans import DimensionMismatchError
from addressengine.addressing.scans import inter_scan
from addressengine.addressing.scans import intra_scan
from addressengine.engine.counters import AccessOp
from addressengine.engine.counters import StallReason
from addressengine.engine.counters import Unit
from addressengine.engine.simulator import AddressEngine
from addressengine.engine.simulator import EngineMode
from addressengine.engine.simulator import EventKind
from addressengine.engine.simulator import UnsupportedModeError
from addressengine.engine.simulator import run_engine
from addressengine.engine.timing import InterPolicy
from addressengine.engine.timing import TimingConfig
from addressengine.frames.pixels import YUV_CHANNELS
from addressengine.frames.pixels import Channel
from addressengine.frames.pixels import Frame
from addressengine.frames.tests.strategies import frames
from addressengine.kernels.descriptors import Kernel
from addressengine.kernels.descriptors import KernelOp

SOBEL = Kernel(KernelOp.FIR, coeffs=((1, 0, -1), (2, 0, -2), (1, 0, -1)), divisor=4)

INTRA_KERNELS = [
    pytest.param(CON_0, Kernel(KernelOp.IDENTITY), id="con0-identity"),
    pytest.param(CON_8, Kernel(KernelOp.MORPH_GRADIENT), id="con8-gradient"),
    pytest.param(CON_8, Kernel(KernelOp.MORPH_GRADIENT, YUV_CHANNELS, YUV_CHANNELS), id="con8-gradient-yuv"),
    pytest.param(CON_8, SOBEL, id="con8-fir"),
    pytest.param(CON_8, Kernel(KernelOp.HOMOGENEITY, YUV_CHANNELS, (Channel.AUX,), threshold=8), id="con8-homogeneity"),
    pytest.param(CON_0, Kernel(KernelOp.HISTOGRAM, out_channels=()), id="con0-histogram"),
]


class TestIntraEquivalence:
    @pytest.mark.parametrize(("mask", "kernel"), INTRA_KERNELS)
    @pytest.mark.parametrize("scan", ["horizontal", "vertical"])
    def test_matches_reference(self, small_frame, mask, kernel, scan):
        run = run_engine("intra", mask, scan, kernel, [small_frame])
        reference = intra_scan(small_frame, mask, scan, kernel)
        assert run.frame == reference.frame
        if kernel.uses_table:
            assert run.table == reference.table
            assert run.table.ids() == reference.table.ids()

    @settings(max_examples=10)
    @given(frame=frames(width=16, height=16))
    def test_gradient_on_generated_frames(self, frame):
        run = run_engine("intra", CON_8, "horizontal", Kernel(KernelOp.MORPH_GRADIENT), [frame])
        assert run.frame == intra_scan(frame, CON_8, "horizontal", Kernel(KernelOp.MORPH_GRADIENT)).frame

    def test_tall_mask_within_fifo(self, small_frame):
        column = NeighborhoodMask.from_offsets([(dy, 0) for dy in range(-3, 4)], name="column7")
        kernel = Kernel(KernelOp.MORPH_GRADIENT)
        run = run_engine("intra", column, "horizontal", kernel, [small_frame])
        assert run.frame == intra_scan(small_frame, column, "horizontal", kernel).frame

    @pytest.mark.parametrize(
        ("offsets", "scan"),
        [
            pytest.param([(dy, 0) for dy in range(-4, 5)], "horizontal", id="column9-horizontal"),
            pytest.param([(0, dx) for dx in range(-4, 5)], "vertical", id="row9-vertical"),
        ],
    )
    def test_nine_lines_perpendicular_to_scan_in_one_fetch(self, small_frame, offsets, scan):
        mask = NeighborhoodMask.from_offsets(offsets, name="perpendicular9")
        kernel = Kernel(KernelOp.MORPH_GRADIENT)
        run = run_engine("intra", mask, scan, kernel, [small_frame], record=True)
        assert run.frame == intra_scan(small_frame, mask, scan, kernel).frame
        assert run.audit.violations() == []
        served = [r for r in run.audit.records if not r.stalled]
        assert len(served) == small_frame.pixel_count
        assert all(len(r.lines) == 9 and r.ready_at <= r.cycle for r in served)
        assert all(set(r.missing) <= set(r.lines) for r in run.audit.records if r.stalled)


class TestInterEquivalence:
    @pytest.mark.parametrize("policy", list(InterPolicy))
    def test_diff(self, rng, policy):
        a, b = (Frame.random(rng, 24, 32) for _ in range(2))
        kernel = Kernel(KernelOp.DIFF, YUV_CHANNELS, YUV_CHANNELS)
        run = run_engine("inter", CON_0, "horizontal", kernel, [a, b], config=TimingConfig(inter_policy=policy))
        assert run.frame == inter_scan(a, b, kernel).frame

    @settings(max_examples=10)
    @given(st.sampled_from(["horizontal", "vertical"]), frames(width=16, height=16), frames(width=16, height=16))
    def test_sad(self, scan, a, b):
        kernel = Kernel(KernelOp.SAD_ACCUMULATE, out_channels=())
        run = run_engine("inter", CON_0, scan, kernel, [a, b])
        reference = inter_scan(a, b, kernel)
        assert run.sad == reference.sad
        assert run.frame == reference.frame == a


ENGINE_GRID = [
    ("intra", CON_0, Kernel(KernelOp.IDENTITY)),
    ("intra", CON_0, Kernel(KernelOp.MORPH_GRADIENT)),
    ("intra", CON_0, Kernel(KernelOp.FIR, coeffs=((2,),), divisor=2)),
    ("intra", CON_0, Kernel(KernelOp.HOMOGENEITY, YUV_CHANNELS, (Channel.AUX,), threshold=8)),
    ("intra", CON_0, Kernel(KernelOp.HISTOGRAM, out_channels=())),
    ("intra", CON_8, Kernel(KernelOp.IDENTITY)),
    ("intra", CON_8, Kernel(KernelOp.MORPH_GRADIENT, YUV_CHANNELS, YUV_CHANNELS)),
    ("intra", CON_8, SOBEL),
    ("intra", CON_8, Kernel(KernelOp.HOMOGENEITY, YUV_CHANNELS, (Channel.AUX,), threshold=8)),
    ("intra", CON_8, Kernel(KernelOp.HISTOGRAM, out_channels=())),
    ("inter", CON_0, Kernel(KernelOp.IDENTITY)),
    ("inter", CON_0, Kernel(KernelOp.DIFF, YUV_CHANNELS, YUV_CHANNELS)),
    ("inter", CON_0, Kernel(KernelOp.SAD_ACCUMULATE, out_channels=())),
]


def assert_matches_reference(mode, mask, scan, kernel, inputs, config=None):
    run = run_engine(mode, mask, scan, kernel, inputs, config=config)
    if mode == "inter":
        reference = inter_scan(*inputs, kernel)
        assert run.sad == reference.sad
    else:
        reference = intra_scan(inputs[0], mask, scan, kernel)
        assert run.table == reference.table
    assert run.frame == reference.frame
    return run


class TestEngineGrid:
    """Every mode, mask and kernel combination against the reference scans."""

    @pytest.mark.parametrize(
        ("mode", "mask", "kernel"),
        [pytest.param(*entry, id=f"{entry[0]}-{entry[1].name}-{entry[2].op}") for entry in ENGINE_GRID],
    )
    @pytest.mark.parametrize("scan", ["horizontal", "vertical"])
    def test_fixed_frames(self, rng, mode, mask, kernel, scan):
        inputs = [Frame.random(rng, 32, 32) for _ in range(2 if mode == "inter" else 1)]
        assert_matches_reference(mode, mask, scan, kernel, inputs)

    @settings(max_examples=100)
    @given(
        entry=st.sampled_from(ENGINE_GRID),
        scan=st.sampled_from(["horizontal", "vertical"]),
        a=frames(width=32, height=32, alfa_max=15),
        b=frames(width=32, height=32, alfa_max=15),
    )
    def test_generated_frames(self, entry, scan, a, b):
        mode, mask, kernel = entry
        inputs = [a, b] if mode == "inter" else [a]
        assert_matches_reference(mode, mask, scan, kernel, inputs)

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize(
        ("mode", "mask", "kernel"),
        [
            pytest.param("intra", CON_0, Kernel(KernelOp.IDENTITY), id="intra-con0-identity"),
            pytest.param("intra", CON_8, Kernel(KernelOp.MORPH_GRADIENT), id="intra-con8-gradient"),
            pytest.param("inter", CON_0, Kernel(KernelOp.DIFF, YUV_CHANNELS, YUV_CHANNELS), id="inter-diff"),
            pytest.param("inter", CON_0, Kernel(KernelOp.SAD_ACCUMULATE, out_channels=()), id="inter-sad"),
        ],
    )
    def test_qcif_frames(self, seed, mode, mask, kernel):
        rng = np.random.default_rng(seed)
        inputs = [Frame.random(rng, 176, 144) for _ in range(2 if mode == "inter" else 1)]
        run = assert_matches_reference(mode, mask, "horizontal", kernel, inputs)
        assert run.counters.access_events == 2 * 176 * 144

    def test_full_oim_stalls_without_changing_results(self, rng):
        # Worst-case inter transfers feed TxU-in faster than TxU-out drains.
        a, b = (Frame.random(rng, 32, 32) for _ in range(2))
        kernel = Kernel(KernelOp.DIFF, YUV_CHANNELS, YUV_CHANNELS)
        config = TimingConfig(oim_lines=2, inter_policy=InterPolicy.WORST_CASE)
        run = assert_matches_reference("inter", CON_0, "horizontal", kernel, [a, b], config=config)
        assert run.counters.stalls[StallReason.OIM_FULL] > 0


# ─────────────────────────────────────────────────────────────────────────────
# Counters, trace and schedule
# ─────────────────────────────────────────────────────────────────────────────

class TestEngineAccounting:
    @pytest.mark.parametrize(("mode", "mask"), [("intra", CON_0), ("intra", CON_8), ("inter", CON_0)])
    def test_two_access_events_per_pixel(self, rng, mode, mask):
        inputs = [Frame.random(rng, 16, 32) for _ in range(2 if mode == "inter" else 1)]
        kernel = Kernel(KernelOp.DIFF if mode == "inter" else KernelOp.IDENTITY)
        counters = run_engine(mode, mask, "horizontal", kernel, inputs).counters
        assert counters.zbt_read_events == counters.zbt_write_events == 512
        assert counters.access_events == 1_024
        assert counters.iim_lines_loaded == 32
        assert counters.loads == 32

    def test_recorded_run_keeps_port_discipline(self, small_frame):
        run = run_engine("intra", CON_8, "horizontal", Kernel(KernelOp.MORPH_GRADIENT), [small_frame], record=True)
        run.trace.assert_port_discipline()
        assert run.audit.violations() == []
        n = small_frame.pixel_count
        assert run.trace.count(Unit.HOST_IN, AccessOp.WRITE) == 2 * n
        assert run.trace.count(Unit.TXU_IN, AccessOp.READ) == 2 * n
        assert run.trace.count(Unit.TXU_OUT, AccessOp.WRITE) == 2 * n
        assert run.trace.count(Unit.HOST_OUT, AccessOp.READ) == 2 * n

    def test_events_in_cycle_order(self, small_frame):
        run = run_engine("intra", CON_0, "horizontal", Kernel(KernelOp.IDENTITY), [small_frame])
        kinds = [e.kind for e in run.events]
        assert kinds.count(EventKind.STRIP_COMPLETE) == 2
        assert kinds.count(EventKind.BANK_SWITCH) == 1
        cycles = [e.cycle for e in run.events]
        assert cycles == sorted(cycles)
        assert run.events[0].to_dict() == {"cycle": 0, "kind": "engine_start", "detail": ""}

    def test_zero_size_frame(self):
        run = run_engine("intra", CON_8, "horizontal", Kernel(KernelOp.MORPH_GRADIENT), [Frame.blank(0, 0)])
        assert run.frame == Frame.blank(0, 0)
        assert run.counters.access_events == 0
        assert run.timing.total_cycles == 0
        assert run.events == []

    def test_unpacks_as_frame_counters_timing(self, small_frame):
        frame, counters, timing = run_engine("intra", CON_0, "horizontal", Kernel(KernelOp.IDENTITY), [small_frame])
        assert frame == small_frame
        assert counters.cycles_total == timing.total_cycles


# ─────────────────────────────────────────────────────────────────────────────
# Rejected configurations
# ─────────────────────────────────────────────────────────────────────────────

class TestEngineValidation:
    def test_segment_mode_is_not_implemented(self):
        with pytest.raises(UnsupportedModeError):
            AddressEngine(EngineMode.SEGMENT, CON_8, "horizontal", Kernel(KernelOp.IDENTITY))

    def test_inter_needs_single_pixel_mask(self):
        with pytest.raises(UnsupportedModeError, match="CON_8"):
            AddressEngine("inter", CON_8, "horizontal", Kernel(KernelOp.DIFF))

    def test_mask_span_beyond_fifo(self):
        tall = NeighborhoodMask.from_offsets([(dy, 0) for dy in range(-4, 5)], name="column9")
        with pytest.raises(MaskSpanError, match="FIFO holds 8"):
            AddressEngine("intra", tall, "horizontal", Kernel(KernelOp.IDENTITY), config=TimingConfig(iim_lines=8))

    @pytest.mark.parametrize("width", [10, 17])
    def test_wide_mask_across_vertical_scan(self, width):
        wide = NeighborhoodMask.from_offsets([(0, dx) for dx in range(-(width // 2), width - width // 2)], name="row")
        with pytest.raises(MaskSpanError, match=f"spans {width} lines across a vertical scan"):
            AddressEngine("intra", wide, "vertical", Kernel(KernelOp.MORPH_GRADIENT))
        with pytest.raises(MaskSpanError, match="matrix register"):
            AddressEngine("intra", wide, "horizontal", Kernel(KernelOp.MORPH_GRADIENT))

    def test_input_count(self, small_frame):
        with pytest.raises(ValueError, match="takes 2 input"):
            run_engine("inter", CON_0, "horizontal", Kernel(KernelOp.DIFF), [small_frame])

    def test_inter_sizes_must_match(self, small_frame):
        with pytest.raises(DimensionMismatchError):
            run_engine("inter", CON_0, "horizontal", Kernel(KernelOp.DIFF), [small_frame, Frame.blank(16, 16)])

    def test_kernel_must_fit_mode(self, small_frame):
        with pytest.raises(ValueError, match="not available"):
            run_engine("intra", CON_8, "horizontal", Kernel(KernelOp.DIFF), [small_frame])
