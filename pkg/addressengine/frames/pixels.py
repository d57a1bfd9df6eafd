"""Pixels, frames and the packed two-word representation used by the ZBT model.

A pixel is 64 bits: Y, U, V at 8 bits each and Alfa, Aux at 16 bits each.
It is stored as two 32-bit words:

  lower  Y in bits 0-7, U in 8-15, V in 16-23, bits 24-31 always zero
  upper  Alfa in bits 0-15, Aux in 16-31
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

QCIF_SIZE = (176, 144)
CIF_SIZE = (352, 288)

PIXEL_BYTES = 8
LOWER_PADDING_MASK = 0xFF000000


class MalformedWordError(ValueError):
    """Raised when a lower word carries non-zero padding bits."""


class Channel(enum.IntEnum):
    Y = 0
    U = 1
    V = 2
    ALFA = 3
    AUX = 4

    @property
    def max_value(self) -> int:
        return 0xFF if self <= Channel.V else 0xFFFF

    @classmethod
    def parse(cls, name: str) -> Channel:
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"Unknown channel {name!r}") from None


ALL_CHANNELS: tuple[Channel, ...] = tuple(Channel)
YUV_CHANNELS: tuple[Channel, ...] = (Channel.Y, Channel.U, Channel.V)

# Per-channel saturation bound, indexable by channel number.
CHANNEL_MAX = np.array([c.max_value for c in Channel], dtype=np.int64)


def normalise_channels(channels) -> tuple[Channel, ...]:
    """Return *channels* as a sorted, de-duplicated tuple of Channel members."""
    parsed = {c if isinstance(c, Channel) else Channel.parse(str(c)) for c in channels}
    return tuple(sorted(parsed))


class FrameTag(enum.StrEnum):
    QCIF = "QCIF"
    CIF = "CIF"
    CUSTOM = "custom"

    @classmethod
    def for_size(cls, width: int, height: int) -> FrameTag:
        if (width, height) == QCIF_SIZE:
            return cls.QCIF
        if (width, height) == CIF_SIZE:
            return cls.CIF
        return cls.CUSTOM


def size_for_tag(tag: str) -> tuple[int, int]:
    """Return (width, height) for ``QCIF``/``CIF`` or a ``WxH`` string."""
    upper = tag.strip().upper()
    if upper == FrameTag.QCIF:
        return QCIF_SIZE
    if upper == FrameTag.CIF:
        return CIF_SIZE
    try:
        width, height = (int(part) for part in upper.split("X"))
    except ValueError:
        raise ValueError(f"Frame size must be QCIF, CIF or WxH, got {tag!r}") from None
    if width < 0 or height < 0:
        raise ValueError(f"Frame size must be non-negative, got {tag!r}")
    return width, height


@dataclass(frozen=True, slots=True)
class Pixel:
    y: int = 0
    u: int = 0
    v: int = 0
    alfa: int = 0
    aux: int = 0

    def __post_init__(self):
        for channel, value in zip(Channel, self.as_tuple(), strict=True):
            if not 0 <= value <= channel.max_value:
                raise ValueError(f"{channel.name} value {value} out of range 0..{channel.max_value}")

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.y, self.u, self.v, self.alfa, self.aux)

    def channel(self, channel: Channel) -> int:
        return self.as_tuple()[channel]

    @classmethod
    def from_values(cls, values) -> Pixel:
        return cls(*(int(v) for v in values))


@dataclass(frozen=True, slots=True)
class WordPair:
    lower: int
    upper: int


def pack_pixel(p: Pixel) -> WordPair:
    lower = p.y | (p.u << 8) | (p.v << 16)
    upper = p.alfa | (p.aux << 16)
    return WordPair(lower=lower, upper=upper)


def unpack_pixel(w: WordPair) -> Pixel:
    if w.lower & LOWER_PADDING_MASK:
        raise MalformedWordError(f"Lower word 0x{w.lower:08X} has non-zero padding bits")
    return Pixel(
        y=w.lower & 0xFF,
        u=(w.lower >> 8) & 0xFF,
        v=(w.lower >> 16) & 0xFF,
        alfa=w.upper & 0xFFFF,
        aux=(w.upper >> 16) & 0xFFFF,
    )


def pack_array(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized pack_pixel over an array whose last axis holds the 5 channels."""
    v = values.astype(np.uint32)
    lower = v[..., 0] | (v[..., 1] << 8) | (v[..., 2] << 16)
    upper = v[..., 3] | (v[..., 4] << 16)
    return lower, upper


def unpack_words(lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Vectorized unpack_pixel; returns an array with a trailing channel axis."""
    lower = np.asarray(lower, dtype=np.uint32)
    upper = np.asarray(upper, dtype=np.uint32)
    if np.any(lower & LOWER_PADDING_MASK):
        raise MalformedWordError("Lower word has non-zero padding bits")
    out = np.empty((*lower.shape, 5), dtype=np.uint16)
    out[..., 0] = lower & 0xFF
    out[..., 1] = (lower >> 8) & 0xFF
    out[..., 2] = (lower >> 16) & 0xFF
    out[..., 3] = upper & 0xFFFF
    out[..., 4] = (upper >> 16) & 0xFFFF
    return out


@dataclass(frozen=True, eq=False)
class Frame:
    """Row-major frame; ``data`` has shape (height, width, 5) and dtype uint16."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[2] != len(Channel):
            raise ValueError(f"Frame data must have shape (h, w, 5), got {self.data.shape}")
        flat = self.data.reshape(-1, 5)
        bad_range = (flat.max(axis=0, initial=0) > CHANNEL_MAX) | (flat.min(axis=0, initial=0) < 0)
        if np.any(bad_range):
            bad = [Channel(i).name for i in np.flatnonzero(bad_range)]
            raise ValueError(f"Channel values out of range: {', '.join(bad)}")
        if self.data.dtype != np.uint16:
            object.__setattr__(self, "data", self.data.astype(np.uint16))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def pixel_count(self) -> int:
        return self.width * self.height

    @property
    def tag(self) -> FrameTag:
        return FrameTag.for_size(self.width, self.height)

    def pixel(self, x: int, y: int) -> Pixel:
        return Pixel.from_values(self.data[y, x])

    def plane(self, channel: Channel) -> np.ndarray:
        return self.data[..., channel]

    def with_pixel(self, x: int, y: int, p: Pixel) -> Frame:
        data = self.data.copy()
        data[y, x] = p.as_tuple()
        return Frame(data)

    def copy(self) -> Frame:
        return Frame(self.data.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))

    def __repr__(self) -> str:
        return f"Frame({self.width}x{self.height}, {self.tag})"

    @classmethod
    def blank(cls, width: int, height: int) -> Frame:
        return cls(np.zeros((height, width, 5), dtype=np.uint16))

    @classmethod
    def from_planes(cls, y, u=None, v=None, alfa=None, aux=None) -> Frame:
        y = np.asarray(y)
        planes = [p if p is not None else np.zeros_like(y) for p in (y, u, v, alfa, aux)]
        return cls(np.stack([np.asarray(p, dtype=np.uint16) for p in planes], axis=-1))

    @classmethod
    def random(cls, rng: np.random.Generator, width: int, height: int, alfa_max: int = 0xFFFF) -> Frame:
        data = np.empty((height, width, 5), dtype=np.uint16)
        data[..., :3] = rng.integers(0, 256, size=(height, width, 3))
        data[..., 3] = rng.integers(0, alfa_max + 1, size=(height, width))
        data[..., 4] = rng.integers(0, 0x10000, size=(height, width))
        return cls(data)


def frame_byte_size(f: Frame) -> int:
    return f.width * f.height * PIXEL_BYTES
