"""The 6-bank ZBT memory and where frames live in it.

Layout:

  banks 0, 1   input slot 0, lower and upper words
  banks 2, 3   input slot 1, lower and upper words
  bank 4       Res_block_A
  bank 5       Res_block_B

An input pixel at row-major index i sits at word i of both banks of its slot.
Consecutive strips alternate between block A and block B of the slot. Result
pixels are written sequentially, lower word then upper word, so one result bank
holds at most 131,072 pixels.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

BANK_COUNT = 6
BANK_WORDS = 262_144
SLOT_BANKS = ((0, 1), (2, 3))
RESULT_BANKS = (4, 5)
RESULT_BANK_PIXELS = BANK_WORDS // 2

NEVER = np.iinfo(np.int64).max


class EngineInvariantError(AssertionError):
    """The simulated hardware broke one of its own protocol rules."""


class LayoutOverflowError(ValueError):
    """Frames do not fit the ZBT layout."""


@dataclass(frozen=True)
class ZbtLayout:
    width: int
    height: int
    slots: int = 1

    def __post_init__(self):
        if self.slots not in (1, 2):
            raise LayoutOverflowError("The layout has room for one or two input images")
        if self.pixel_count > RESULT_BANK_PIXELS:
            raise LayoutOverflowError(
                f"{self.width}x{self.height} needs {2 * self.pixel_count} result words; "
                f"a result bank holds {BANK_WORDS}",
            )

    @property
    def pixel_count(self) -> int:
        return self.width * self.height

    def input_banks(self, slot: int) -> tuple[int, int]:
        if slot not in range(self.slots):
            raise ValueError(f"Slot {slot} is not in use")
        return SLOT_BANKS[slot]

    def word_address(self, x: int, y: int) -> int:
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise ValueError(f"({x}, {y}) lies outside the {self.width}x{self.height} frame")
        return y * self.width + x

    @staticmethod
    def block_of_strip(index: int) -> str:
        return "AB"[index % 2]


def map_input_address(x: int, y: int, slot: int, layout: ZbtLayout) -> tuple[int, int, int]:
    """(bank_lower, bank_upper, word_address) of input pixel (x, y) in *slot*."""
    lower, upper = layout.input_banks(slot)
    return lower, upper, layout.word_address(x, y)


class ZbtMemory:
    """Word storage plus a write timestamp per word and a port ledger per bank.

    A bank port serves one access per cycle; a second claim on the same
    (bank, cycle) raises EngineInvariantError.
    """

    def __init__(self):
        self.words = np.zeros((BANK_COUNT, BANK_WORDS), dtype=np.uint32)
        self.written_at = np.full((BANK_COUNT, BANK_WORDS), NEVER, dtype=np.int64)
        self._ports = [np.zeros(1024, dtype=bool) for _ in range(BANK_COUNT)]

    # ── port ledger ──────────────────────────────────────────────────────────

    def _ledger(self, bank: int, last_cycle: int) -> np.ndarray:
        ledger = self._ports[bank]
        if last_cycle >= ledger.size:
            grown = np.zeros(max(2 * ledger.size, last_cycle + 1), dtype=bool)
            grown[: ledger.size] = ledger
            self._ports[bank] = ledger = grown
        return ledger

    def port_busy(self, bank: int, cycle: int) -> bool:
        ledger = self._ports[bank]
        return cycle < ledger.size and bool(ledger[cycle])

    def claim(self, bank: int, cycle: int) -> None:
        ledger = self._ledger(bank, cycle)
        if ledger[cycle]:
            raise EngineInvariantError(f"Bank {bank} accessed twice in cycle {cycle}")
        ledger[cycle] = True

    def claim_many(self, bank: int, cycles: np.ndarray) -> None:
        if cycles.size == 0:
            return
        ledger = self._ledger(bank, int(cycles.max()))
        if ledger[cycles].any() or np.unique(cycles).size != cycles.size:
            raise EngineInvariantError(f"Bank {bank} double-booked by a block transfer")
        ledger[cycles] = True

    # ── accesses ─────────────────────────────────────────────────────────────

    def write(self, bank: int, address: int, word: int, cycle: int) -> None:
        self.claim(bank, cycle)
        self.words[bank, address] = word
        self.written_at[bank, address] = cycle

    def write_block(self, bank: int, addresses: np.ndarray, words: np.ndarray, cycles: np.ndarray) -> None:
        if addresses.size and addresses.max() >= BANK_WORDS:
            raise LayoutOverflowError(f"Block write past the end of bank {bank}")
        self.claim_many(bank, cycles)
        self.words[bank, addresses] = words
        self.written_at[bank, addresses] = cycles

    def read(self, bank: int, address: int, cycle: int) -> int:
        if self.written_at[bank, address] >= cycle:
            raise EngineInvariantError(f"Bank {bank} word {address} read in cycle {cycle} before it was written")
        self.claim(bank, cycle)
        return int(self.words[bank, address])
