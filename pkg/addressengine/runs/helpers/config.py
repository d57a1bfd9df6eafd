"""
Run configuration for the management commands.

A RunConfig comes from a declarative JSON file (``--config``) overridden by
command-line flags; flags win. Everything the run needs is validated here,
before any frame is loaded or any cycle simulated.

Example file::

    {
        "mode": "intra",
        "mask": "CON_8",
        "scan": "horizontal",
        "kernel": {"op": "morph_gradient", "in_channels": ["Y"], "out_channels": ["Y"]},
        "engine": true,
        "inputs": ["foreman_qcif.pgm"],
        "output": "gradient.pgm",
        "timing": {"inter_policy": "worst_case"}
    }
"""
import json
import logging
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path

from addressengine.addressing.masks import CON_0
from addressengine.addressing.masks import NeighborhoodMask
from addressengine.addressing.masks import ScanOrder
from addressengine.addressing.segments import SegmentCriteria
from addressengine.addressing.segments import SegmentSeedError
from addressengine.engine.simulator import EngineMode
from addressengine.engine.simulator import UnsupportedModeError
from addressengine.engine.timing import TimingConfig
from addressengine.engine.timing import TimingConfigError
from addressengine.engine.transfers import StripPlanError
from addressengine.frames.pixels import Frame
from addressengine.frames.pixels import FrameTag
from addressengine.frames.pixels import size_for_tag
from addressengine.kernels.descriptors import Kernel
from addressengine.kernels.descriptors import KernelConfigError
from addressengine.kernels.descriptors import KernelOp

logger = logging.getLogger(__name__)

_TIMING_KEYS = ("clock_hz", "strip_lines", "iim_lines", "oim_lines", "result_switch_fraction", "inter_policy")


class RunConfigError(ValueError):
    """The run configuration is malformed or its fields contradict each other."""


def parse_mask(value) -> NeighborhoodMask:
    """A mask is a name (``"CON_8"``) or ``{"name": ..., "offsets": [[dy, dx], ...]}``."""
    try:
        if isinstance(value, str):
            return NeighborhoodMask.named(value)
        if isinstance(value, dict) and "offsets" in value:
            return NeighborhoodMask.from_offsets(value["offsets"], name=value.get("name", "custom"))
    except (TypeError, ValueError) as exc:
        raise RunConfigError(f"Invalid mask {value!r}: {exc}") from exc
    raise RunConfigError(f"Invalid mask {value!r}: expected a name or an offsets list")


def kernel_arg(value: str):
    """``--kernel`` takes an op name or a JSON descriptor."""
    if value.lstrip().startswith("{"):
        try:
            return json.loads(value)
        except json.JSONDecodeError as exc:
            raise RunConfigError(f"--kernel is not valid JSON: {exc}") from exc
    return value


def parse_kernel(value) -> Kernel:
    """A kernel is an op name (``"diff"``) or a descriptor dict."""
    data = {"op": value} if isinstance(value, str) else value
    if not isinstance(data, dict):
        raise RunConfigError(f"Invalid kernel {value!r}")
    try:
        return Kernel.from_dict(data)
    except KernelConfigError as exc:
        raise RunConfigError(f"Invalid kernel {value!r}: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    mode: EngineMode = EngineMode.INTRA
    mask: NeighborhoodMask = CON_0
    scan: ScanOrder = ScanOrder.HORIZONTAL
    kernel: Kernel = field(default_factory=lambda: Kernel(KernelOp.IDENTITY))
    engine: bool = False
    inputs: tuple[Path, ...] = ()
    output: Path | None = None
    report: Path | None = None
    trace: Path | None = None
    width: int | None = None
    height: int | None = None
    segment: SegmentCriteria | None = None
    timing: TimingConfig = field(default_factory=TimingConfig)

    @property
    def inter(self) -> bool:
        return self.mode is EngineMode.INTER

    @property
    def input_count(self) -> int:
        return 2 if self.inter else 1

    def validate(self) -> None:
        """Cross-field checks that do not need the input frames."""
        if self.engine and self.mode is EngineMode.SEGMENT:
            raise UnsupportedModeError("Segment addressing runs on the reference library only; drop --engine")
        if self.inter and self.mask.offsets != CON_0.offsets:
            raise UnsupportedModeError(f"Inter addressing takes single pixels; mask {self.mask.name} has a neighbourhood")
        try:
            self.kernel.validate_for(self.mask, inter=self.inter)
        except KernelConfigError as exc:
            raise RunConfigError(str(exc)) from exc
        if self.mode is EngineMode.SEGMENT and self.segment is None:
            raise RunConfigError("Segment addressing needs a 'segment' block with threshold and seeds")
        if self.inputs and len(self.inputs) != self.input_count:
            raise RunConfigError(f"{self.mode} addressing takes {self.input_count} input file(s), got {len(self.inputs)}")
        if self.engine:
            fifo_lines = self.timing.iim_lines // (2 if self.inter else 1)
            self.mask.check_engine_fit(self.scan, fifo_lines)
        elif self.trace is not None:
            raise RunConfigError("An access trace comes from the engine simulator; add --engine or drop --trace")
        if (self.width is None) != (self.height is None):
            raise RunConfigError("Give both width and height, or neither")

    def check_frames(self, frames: list[Frame]) -> None:
        """Checks that need the loaded frames: matching sizes, strip divisibility, seeds."""
        first = frames[0]
        if any(f.data.shape != first.data.shape for f in frames[1:]):
            raise RunConfigError(f"Input frames differ in size: {', '.join(repr(f) for f in frames)}")
        if self.engine and first.pixel_count:
            line_count, _ = self.scan.lines_and_length(first.width, first.height)
            if line_count % self.timing.strip_lines:
                raise StripPlanError(
                    f"{first!r} has {line_count} lines in {self.scan} scan order, "
                    f"not a multiple of the {self.timing.strip_lines}-line strip",
                )
        if self.segment is not None:
            try:
                self.segment.check_seeds(first)
            except SegmentSeedError as exc:
                raise RunConfigError(str(exc)) from exc

    def frame_size(self, default: str = FrameTag.CIF) -> tuple[int, int]:
        if self.width is not None and self.height is not None:
            return self.width, self.height
        return size_for_tag(default)

    def to_dict(self) -> dict:
        """The effective configuration, in the same shape the JSON file takes."""
        return {
            "mode": str(self.mode),
            "mask": self.mask.to_dict(),
            "scan": str(self.scan),
            "kernel": self.kernel.to_dict(),
            "engine": self.engine,
            "inputs": [str(p) for p in self.inputs],
            "output": str(self.output) if self.output else None,
            "report": str(self.report) if self.report else None,
            "trace": str(self.trace) if self.trace else None,
            "width": self.width,
            "height": self.height,
            "segment": self.segment.to_dict() if self.segment else None,
            "timing": self.timing.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise RunConfigError(f"Unknown config keys: {', '.join(sorted(unknown))}")
        try:
            mode = EngineMode(data.get("mode", EngineMode.INTRA))
            scan = ScanOrder(data.get("scan", ScanOrder.HORIZONTAL))
        except ValueError as exc:
            raise RunConfigError(str(exc)) from exc
        timing_data = data.get("timing") or {}
        unknown_timing = set(timing_data) - set(TimingConfig.__dataclass_fields__)
        if unknown_timing:
            raise RunConfigError(f"Unknown timing keys: {', '.join(sorted(unknown_timing))}")
        try:
            timing = TimingConfig.from_settings(**timing_data)
        except (TimingConfigError, ValueError, TypeError) as exc:
            raise RunConfigError(f"Invalid timing parameters: {exc}") from exc
        segment = None
        if data.get("segment"):
            seg = data["segment"]
            try:
                segment = SegmentCriteria(
                    threshold=int(seg["threshold"]),
                    seeds=tuple(tuple(s) for s in seg["seeds"]),
                    channels=tuple(seg.get("channels", ("Y", "U", "V"))),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise RunConfigError(f"Invalid segment block {seg!r}: {exc}") from exc
        kernel_default = "sad_accumulate" if mode is EngineMode.INTER else "identity"
        return cls(
            mode=mode,
            mask=parse_mask(data.get("mask") or "CON_0"),
            scan=scan,
            kernel=parse_kernel(data.get("kernel") or kernel_default),
            engine=bool(data.get("engine", False)),
            inputs=tuple(Path(p) for p in data.get("inputs") or ()),
            output=Path(data["output"]) if data.get("output") else None,
            report=Path(data["report"]) if data.get("report") else None,
            trace=Path(data["trace"]) if data.get("trace") else None,
            width=_optional_int(data.get("width")),
            height=_optional_int(data.get("height")),
            segment=segment,
            timing=timing,
        )


def _optional_int(value) -> int | None:
    if value is None:
        return None
    try:
        return int(value)
    except (TypeError, ValueError) as exc:
        raise RunConfigError(f"Expected an integer, got {value!r}") from exc


def read_config_file(path: Path | str) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise RunConfigError(f"Config file {path} does not exist") from exc
    except json.JSONDecodeError as exc:
        raise RunConfigError(f"Config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise RunConfigError(f"Config file {path} must hold a JSON object")
    return data


def load_run_config(config_path: Path | str | None = None, **flags) -> RunConfig:
    """Merge the config file with flag values (``None`` means "not given") and validate."""
    data = read_config_file(config_path) if config_path else {}
    timing_flags = {k: flags.pop(k) for k in _TIMING_KEYS if k in flags}
    data.update({k: v for k, v in flags.items() if v is not None})
    timing = dict(data.get("timing") or {})
    timing.update({k: v for k, v in timing_flags.items() if v is not None})
    data["timing"] = timing
    config = RunConfig.from_dict(data)
    config.validate()
    logger.debug("Effective run config: %s", config.to_dict())
    return config
