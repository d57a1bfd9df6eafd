"""Tests for the timing configuration and the timing report."""
import numpy as np
import pytest

from addressengine.addressing.masks import CON_0
from addressengine.addressing.masks import CON_8
from addressengine.engine.simulator import run_engine
from addressengine.engine.timing import InterPolicy
from addressengine.engine.timing import Schedule
from addressengine.engine.timing import TimingConfig
from addressengine.engine.timing import TimingConfigError
from addressengine.engine.timing import timing_report
from addressengine.frames.pixels import CIF_SIZE
from addressengine.frames.pixels import Frame
from addressengine.kernels.descriptors import Kernel
from addressengine.kernels.descriptors import KernelOp


class TestTimingConfig:
    def test_defaults_match_the_bus(self):
        config = TimingConfig()
        assert config.bus_bytes_per_second == 264_000_000
        assert config.seconds(66_000_000) == pytest.approx(1.0)

    def test_bank_rate_must_match_bus(self):
        with pytest.raises(TimingConfigError, match="does not match"):
            TimingConfig(zbt_bank_rate=200_000_000)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"iim_lines": 15},
            {"iim_lines": 0},
            {"oim_lines": 0},
            {"strip_lines": 0},
            {"result_switch_fraction": 0},
            {"result_switch_fraction": 1.5},
        ],
    )
    def test_rejects(self, overrides):
        with pytest.raises(TimingConfigError):
            TimingConfig(**overrides)

    def test_policy_is_parsed(self):
        config = TimingConfig(inter_policy="worst_case")
        assert config.inter_policy is InterPolicy.WORST_CASE
        assert config.with_policy("streamed").inter_policy is InterPolicy.STREAMED
        assert config.to_dict()["inter_policy"] == "worst_case"

    def test_from_settings(self, settings):
        settings.ADDRESSENGINE_OIM_LINES = 8
        config = TimingConfig.from_settings()
        assert config.oim_lines == 8
        assert config.clock_hz == 66_000_000

    def test_clock_override_moves_the_bank_rate(self):
        config = TimingConfig.from_settings(clock_hz=100_000_000, strip_lines=None)
        assert config.zbt_bank_rate == 400_000_000
        assert config.strip_lines == 16


class TestTimingReport:
    def test_empty_run(self):
        report = timing_report(Schedule())
        assert report.total_cycles == 0
        assert report.non_overlap_ratio == 0.0
        assert report.overlap_fraction == 0.0

    def test_ratio_relates_compute_only_cycles_to_input(self):
        schedule = Schedule(
            input_transfer_end=400,
            compute_start=10,
            compute_end=500,
            output_transfer_start=450,
            output_transfer_end=900,
            words_in=400,
            words_out=400,
        )
        report = timing_report(schedule)
        assert report.compute_only_cycles == 50
        assert report.non_overlap_ratio == pytest.approx(0.125)
        assert report.overlap_fraction == pytest.approx(390 / 490)
        assert report.compute_tail_cycles == 100
        assert report.transfer_cycles == 800
        assert report.to_dict()["transfer_cycles"] == 800


# ─────────────────────────────────────────────────────────────────────────────
# Simulated runs
# ─────────────────────────────────────────────────────────────────────────────

class TestEngineTiming:
    def test_intra_compute_overlaps_the_transfer(self, small_frame):
        run = run_engine("intra", CON_8, "horizontal", Kernel(KernelOp.MORPH_GRADIENT), [small_frame])
        timing = run.timing
        assert timing.input_transfer_cycles == 2 * small_frame.pixel_count
        assert timing.compute_start < timing.input_transfer_cycles
        assert run.counters.overlap_cycles > 0
        assert timing.output_transfer_cycles == 2 * small_frame.pixel_count

    def test_worst_case_starts_after_both_images(self, rng):
        frames = [Frame.random(rng, 16, 16) for _ in range(2)]
        config = TimingConfig(inter_policy=InterPolicy.WORST_CASE)
        run = run_engine("inter", CON_0, "horizontal", Kernel(KernelOp.DIFF), frames, config=config)
        assert run.schedule.engine_start == run.timing.input_transfer_cycles == 4 * 256
        assert run.counters.overlap_cycles == 0

    @pytest.mark.slow
    def test_worst_case_inter_cif_ratio(self):
        rng = np.random.default_rng(0)
        frames = [Frame.random(rng, *CIF_SIZE) for _ in range(2)]
        config = TimingConfig(inter_policy=InterPolicy.WORST_CASE)
        run = run_engine("inter", CON_0, "horizontal", Kernel(KernelOp.DIFF), frames, config=config)
        assert run.timing.non_overlap_ratio == pytest.approx(0.125, abs=0.005)
