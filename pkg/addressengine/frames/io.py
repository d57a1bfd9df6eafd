"""Frame file formats.

raw-planar  five consecutive row-major planes: Y, U, V at 1 byte/pixel, then
            Alfa, Aux at 2 bytes/pixel little-endian. Dimensions are not stored
            in the file and must be supplied by the caller.
graymap     binary 8-bit portable graymap (P5). Only Y is stored; on load the
            other channels are zero.
"""

from __future__ import annotations

import enum
import logging
from pathlib import Path

import numpy as np
from PIL import Image
from PIL import UnidentifiedImageError

from addressengine.frames.pixels import Channel
from addressengine.frames.pixels import Frame

logger = logging.getLogger(__name__)

RAW_BYTES_PER_PIXEL = 7


class FrameSizeError(ValueError):
    """File contents do not match the declared frame dimensions."""


class FrameFormatError(ValueError):
    """File header or pixel mode is not a supported frame format."""


class FrameFormat(enum.StrEnum):
    RAW = "raw"
    GRAYMAP = "pgm"

    @classmethod
    def for_path(cls, path: Path | str) -> FrameFormat:
        return cls.GRAYMAP if Path(path).suffix.lower() in {".pgm", ".pnm"} else cls.RAW


def load_frame(
    path: Path | str,
    fmt: FrameFormat | str | None = None,
    width: int | None = None,
    height: int | None = None,
) -> Frame:
    """Load a frame; *width*/*height* are required for raw-planar files."""
    path = Path(path)
    fmt = FrameFormat(fmt) if fmt else FrameFormat.for_path(path)
    if fmt is FrameFormat.RAW:
        if width is None or height is None:
            raise FrameSizeError(f"{path}: raw-planar frames need explicit width and height")
        frame = _load_raw(path, width, height)
    else:
        frame = _load_graymap(path, width, height)
    logger.debug("Loaded %s frame %s from %s", fmt, frame, path)
    return frame


def save_frame(f: Frame, path: Path | str, fmt: FrameFormat | str | None = None) -> None:
    path = Path(path)
    fmt = FrameFormat(fmt) if fmt else FrameFormat.for_path(path)
    if fmt is FrameFormat.RAW:
        path.write_bytes(_raw_bytes(f))
    else:
        if f.pixel_count == 0:
            raise FrameSizeError("A portable graymap cannot hold an empty frame")
        image = Image.fromarray(f.plane(Channel.Y).astype(np.uint8))
        image.save(path, format="PPM")
    logger.debug("Saved %s frame %s to %s", fmt, f, path)


def _raw_bytes(f: Frame) -> bytes:
    parts = [f.plane(c).astype(np.uint8).tobytes() for c in (Channel.Y, Channel.U, Channel.V)]
    parts += [f.plane(c).astype("<u2").tobytes() for c in (Channel.ALFA, Channel.AUX)]
    return b"".join(parts)


def _load_raw(path: Path, width: int, height: int) -> Frame:
    raw = path.read_bytes()
    pixels = width * height
    expected = pixels * RAW_BYTES_PER_PIXEL
    if len(raw) != expected:
        raise FrameSizeError(
            f"{path}: expected {expected} bytes for {width}x{height} raw-planar, got {len(raw)}"
        )
    data = np.empty((height, width, 5), dtype=np.uint16)
    offset = 0
    for channel in (Channel.Y, Channel.U, Channel.V):
        data[..., channel] = np.frombuffer(raw, dtype=np.uint8, count=pixels, offset=offset).reshape(height, width)
        offset += pixels
    for channel in (Channel.ALFA, Channel.AUX):
        data[..., channel] = np.frombuffer(raw, dtype="<u2", count=pixels, offset=offset).reshape(height, width)
        offset += 2 * pixels
    return Frame(data)


def _load_graymap(path: Path, width: int | None, height: int | None) -> Frame:
    try:
        with Image.open(path) as image:
            fmt, mode = image.format, image.mode
            y = np.asarray(image, dtype=np.uint8) if mode == "L" else None
    except (UnidentifiedImageError, SyntaxError, ValueError) as exc:
        raise FrameFormatError(f"{path}: malformed graymap header") from exc
    except OSError as exc:
        # Pillow reports short pixel data as an OSError while decoding.
        raise FrameSizeError(f"{path}: {exc}") from exc
    if fmt != "PPM" or y is None:
        raise FrameFormatError(f"{path}: not an 8-bit binary graymap ({fmt} {mode})")
    if width is not None and height is not None and y.shape != (height, width):
        raise FrameSizeError(f"{path}: graymap is {y.shape[1]}x{y.shape[0]}, expected {width}x{height}")
    return Frame.from_planes(y)
