"""Tests for the host bus transfers and the transmission units."""
import numpy as np
import pytest

from addressengine.addressing.masks import ScanOrder
from addressengine.engine.buffers import Oim
from addressengine.engine.counters import AccessTrace
from addressengine.engine.counters import Counters
from addressengine.engine.memory import EngineInvariantError
from addressengine.engine.memory import ZbtLayout
from addressengine.engine.memory import ZbtMemory
from addressengine.engine.timing import InterPolicy
from addressengine.engine.transfers import StripPlanError
from addressengine.engine.transfers import TxuOut
from addressengine.engine.transfers import oim_drain
from addressengine.engine.transfers import plan_strips
from addressengine.engine.transfers import run_transfer_in
from addressengine.engine.transfers import run_transfer_out
from addressengine.engine.transfers import strip_addresses
from addressengine.engine.transfers import transfer_order
from addressengine.frames.pixels import Frame
from addressengine.frames.pixels import Pixel
from addressengine.frames.pixels import pack_pixel


# ─────────────────────────────────────────────────────────────────────────────
# Strip planning
# ─────────────────────────────────────────────────────────────────────────────

class TestPlanStrips:
    def test_cif_is_eighteen_alternating_strips(self):
        strips = plan_strips(Frame.blank(352, 288), ScanOrder.HORIZONTAL)
        assert len(strips) == 18
        assert [s.block for s in strips[:4]] == ["A", "B", "A", "B"]
        assert strips[-1].lines == range(272, 288)
        assert strips[0].word_count == 2 * 16 * 352

    def test_vertical_scan_strips_columns(self):
        strips = plan_strips(Frame.blank(32, 16), ScanOrder.VERTICAL)
        assert len(strips) == 2
        assert strips[0].line_len == 16

    def test_partial_strip_is_rejected(self):
        with pytest.raises(StripPlanError, match="not a multiple of 16"):
            plan_strips(Frame.blank(16, 20), "horizontal")

    def test_strip_addresses_follow_scan_order(self):
        layout = ZbtLayout(4, 2)
        strip = plan_strips(Frame.blank(4, 2), ScanOrder.VERTICAL, strip_lines=2)[1]
        np.testing.assert_array_equal(strip_addresses(strip, layout, ScanOrder.VERTICAL), [2, 6, 3, 7])


class TestTransferOrder:
    def plans(self):
        frame = Frame.blank(4, 4)
        return [plan_strips(frame, "horizontal", strip_lines=2) for _ in range(2)]

    def test_streamed_alternates_images(self):
        order = transfer_order(self.plans(), InterPolicy.STREAMED)
        assert [(slot, s.index) for slot, s in order] == [(0, 0), (1, 0), (0, 1), (1, 1)]

    def test_worst_case_sends_images_one_after_the_other(self):
        order = transfer_order(self.plans(), InterPolicy.WORST_CASE)
        assert [(slot, s.index) for slot, s in order] == [(0, 0), (0, 1), (1, 0), (1, 1)]


# ─────────────────────────────────────────────────────────────────────────────
# Host to ZBT
# ─────────────────────────────────────────────────────────────────────────────

class TestTransferIn:
    def test_two_words_per_pixel(self, rng):
        frames = [Frame.random(rng, 8, 4) for _ in range(2)]
        counters = Counters()
        schedule = run_transfer_in(frames, ZbtLayout(8, 4, slots=2), counters, ZbtMemory(), strip_lines=2)
        assert counters.host_words_in == 2 * 2 * 32
        assert schedule.end == 128
        assert schedule.available_at(0, 0) == 32
        assert schedule.available_at(1, 0) == 64
        assert schedule.image_complete(1) == 128

    def test_words_land_in_slot_banks(self, rng):
        frame = Frame.random(rng, 4, 2)
        memory = ZbtMemory()
        run_transfer_in([frame], ZbtLayout(4, 2), Counters(), memory, strip_lines=2)
        words = pack_pixel(frame.pixel(3, 1))
        assert memory.read(0, 7, cycle=1_000) == words.lower
        assert memory.read(1, 7, cycle=1_001) == words.upper

    def test_bus_leaves_every_other_cycle_free(self, rng):
        memory = ZbtMemory()
        trace = AccessTrace()
        run_transfer_in([Frame.random(rng, 4, 2)], ZbtLayout(4, 2), Counters(), memory, strip_lines=2, trace=trace)
        assert [r.cycle for r in trace.records() if r.bank == 0] == [1, 3, 5, 7, 9, 11, 13, 15]
        assert not memory.port_busy(0, 2)
        trace.assert_port_discipline()


# ─────────────────────────────────────────────────────────────────────────────
# OIM to ZBT and back to the host
# ─────────────────────────────────────────────────────────────────────────────

class TestTxuOut:
    def loaded_writer(self, pixels):
        oim = Oim(lines=1, line_len=len(pixels))
        for p in pixels:
            words = pack_pixel(p)
            oim.push(words.lower, words.upper)
        memory = ZbtMemory()
        writer = TxuOut(memory, oim, Counters(), len(pixels), bus_free_at=0, switch_fraction=0.25)
        return memory, writer

    def test_switches_once_at_a_pixel_boundary(self):
        pixels = [Pixel(y=i, alfa=100 + i) for i in range(4)]
        _, writer = self.loaded_writer(pixels)
        assert oim_drain(writer, 0) == 8
        assert writer.finish(8) == 2
        assert writer.words_in_bank == [2, 6]
        assert writer.counters.zbt_write_events == 4

    def test_waits_for_the_bus(self):
        oim = Oim(lines=1, line_len=2)
        for _ in range(2):
            oim.push(0, 0)
        writer = TxuOut(ZbtMemory(), oim, Counters(), 2, bus_free_at=50, switch_fraction=0.25)
        oim_drain(writer, 0)
        assert writer.words_in_bank == [4, 0]
        assert writer.finish(4) == 50

    def test_drain_takes_two_cycles_per_pixel(self):
        _, writer = self.loaded_writer([Pixel(y=i % 256) for i in range(100)])
        assert oim_drain(writer, 0) == 200
        assert oim_drain(writer, 200) == 0

    def test_full_oim_onset_under_sustained_production(self):
        # One result per cycle in, one word per cycle out.
        oim = Oim(lines=2, line_len=4)
        pixel_count = 40
        writer = TxuOut(ZbtMemory(), oim, Counters(), pixel_count, bus_free_at=0, switch_fraction=0.25)
        stalls, produced, cycle = [], 0, 0
        while produced < pixel_count:
            writer.step(cycle)
            if oim.full:
                stalls.append(cycle)
            else:
                oim.push(produced, 0)
                produced += 1
            cycle += 1

        queued_words, queue_stalls = 0, []
        for c in range(cycle):
            queued_words = max(queued_words - 1, 0)
            if (queued_words + 1) // 2 >= oim.capacity:
                queue_stalls.append(c)
            else:
                queued_words += 2
        assert stalls == queue_stalls
        assert stalls[0] == 2 * oim.capacity - 2
        # Once full, production falls to the drain rate of one pixel per two cycles.
        assert stalls[:3] == [14, 16, 18]

    def test_finish_before_all_results(self):
        writer = TxuOut(ZbtMemory(), Oim(1, 2), Counters(), 2, bus_free_at=0, switch_fraction=0.25)
        with pytest.raises(EngineInvariantError, match="0 of 2"):
            writer.finish(0)

    def test_host_reads_results_back(self):
        pixels = [Pixel(y=i, u=2 * i, alfa=i + 1, aux=7) for i in range(4)]
        memory, writer = self.loaded_writer(pixels)
        writer.finish(oim_drain(writer, 0))
        counters = Counters()
        output = run_transfer_out(memory, writer, counters)
        assert output.words == 8
        assert counters.host_words_out == 8
        assert output.start == 2
        # Block B is busy with engine writes until cycle 7.
        assert output.end == 14
        np.testing.assert_array_equal(output.pixels, [p.as_tuple() for p in pixels])
