"""Kernel descriptors: which pixel operation runs, on which channels, with what parameters."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from dataclasses import field

import numpy as np

from addressengine.addressing.masks import NeighborhoodMask
from addressengine.frames.pixels import YUV_CHANNELS
from addressengine.frames.pixels import Channel
from addressengine.frames.pixels import Pixel
from addressengine.frames.pixels import normalise_channels


class KernelConfigError(ValueError):
    """Kernel descriptor is inconsistent with itself, its mask or its mode."""


class KernelOp(enum.StrEnum):
    IDENTITY = "identity"
    DIFF = "diff"
    SAD_ACCUMULATE = "sad_accumulate"
    MORPH_GRADIENT = "morph_gradient"
    FIR = "fir"
    HISTOGRAM = "histogram"
    HOMOGENEITY = "homogeneity"


INTER_OPS = frozenset({KernelOp.IDENTITY, KernelOp.DIFF, KernelOp.SAD_ACCUMULATE})
INTRA_OPS = frozenset(
    {KernelOp.IDENTITY, KernelOp.MORPH_GRADIENT, KernelOp.FIR, KernelOp.HISTOGRAM, KernelOp.HOMOGENEITY},
)
# Side-output kernels may leave every channel untouched.
SIDE_OUTPUT_OPS = frozenset({KernelOp.SAD_ACCUMULATE, KernelOp.HISTOGRAM})
TABLE_OPS = frozenset({KernelOp.HISTOGRAM})


@dataclass(frozen=True)
class Kernel:
    op: KernelOp
    in_channels: tuple[Channel, ...] = (Channel.Y,)
    out_channels: tuple[Channel, ...] = (Channel.Y,)
    coeffs: tuple[tuple[int, ...], ...] | None = None
    divisor: int = 1
    threshold: int = 0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "op", KernelOp(self.op))
        object.__setattr__(self, "in_channels", normalise_channels(self.in_channels))
        object.__setattr__(self, "out_channels", normalise_channels(self.out_channels))
        if self.coeffs is not None:
            object.__setattr__(self, "coeffs", tuple(tuple(int(c) for c in row) for row in self.coeffs))
        if not self.in_channels:
            raise KernelConfigError(f"{self.op} needs at least one input channel")
        if not self.out_channels and self.op not in SIDE_OUTPUT_OPS:
            raise KernelConfigError(f"{self.op} produces a frame and needs at least one output channel")
        if self.divisor <= 0:
            raise KernelConfigError("FIR divisor must be positive")
        if self.threshold < 0:
            raise KernelConfigError("Threshold must be non-negative")
        if self.op is KernelOp.FIR and self.coeffs is None:
            raise KernelConfigError("FIR kernels need a coefficient grid")
        if self.op is not KernelOp.HOMOGENEITY and self.out_channels:
            self.channel_pairs()

    @property
    def uses_table(self) -> bool:
        return self.op in TABLE_OPS

    def channel_pairs(self) -> tuple[tuple[Channel, Channel], ...]:
        """(input, output) channel pairs: pairwise in order, or one input broadcast."""
        if len(self.in_channels) == len(self.out_channels):
            return tuple(zip(self.in_channels, self.out_channels, strict=True))
        if len(self.in_channels) == 1:
            return tuple((self.in_channels[0], out) for out in self.out_channels)
        raise KernelConfigError(
            f"{self.op}: cannot map {len(self.in_channels)} input channels onto {len(self.out_channels)} outputs",
        )

    def coeff_grid(self, mask: NeighborhoodMask) -> np.ndarray:
        grid = np.array(self.coeffs, dtype=np.int64)
        if grid.shape != mask.shape:
            raise KernelConfigError(f"FIR grid shape {grid.shape} does not match mask shape {mask.shape}")
        return grid

    def validate_for(self, mask: NeighborhoodMask, *, inter: bool) -> None:
        allowed = INTER_OPS if inter else INTRA_OPS
        if self.op not in allowed:
            mode = "inter" if inter else "intra/segment"
            raise KernelConfigError(f"{self.op} is not available in {mode} addressing")
        if self.op is KernelOp.FIR:
            self.coeff_grid(mask)

    def to_dict(self) -> dict:
        data = {
            "op": str(self.op),
            "in_channels": [c.name for c in self.in_channels],
            "out_channels": [c.name for c in self.out_channels],
        }
        if self.coeffs is not None:
            data["coeffs"] = [list(row) for row in self.coeffs]
            data["divisor"] = self.divisor
        if self.op is KernelOp.HOMOGENEITY:
            data["threshold"] = self.threshold
        return data

    @classmethod
    def from_dict(cls, data: dict) -> Kernel:
        try:
            op = KernelOp(data["op"])
        except (KeyError, ValueError) as exc:
            raise KernelConfigError(f"Unknown kernel op in {data!r}") from exc
        default_in = YUV_CHANNELS if op is KernelOp.HOMOGENEITY else (Channel.Y,)
        default_out = () if op in SIDE_OUTPUT_OPS else (Channel.Y,)
        try:
            return cls(
                op=op,
                in_channels=tuple(data.get("in_channels", default_in)),
                out_channels=tuple(data.get("out_channels", default_out)),
                coeffs=data.get("coeffs"),
                divisor=int(data.get("divisor", 1)),
                threshold=int(data.get("threshold", 0)),
            )
        except ValueError as exc:
            raise KernelConfigError(str(exc)) from exc


@dataclass(frozen=True)
class KernelResult:
    """One output pixel plus an optional side output (SAD term or table contribution)."""

    out_pixel: Pixel
    side: object | None = None
