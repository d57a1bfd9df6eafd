"""
Executing a RunConfig.

The reference library always runs; with ``engine`` on, the simulator runs
too and its output must match the reference bit for bit. The management
commands and the huey tasks both go through ``execute_run``.
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management.base import CommandError

from addressengine.addressing.scans import ScanResult
from addressengine.addressing.scans import inter_scan
from addressengine.addressing.scans import intra_scan
from addressengine.addressing.segments import segment_scan
from addressengine.engine.memory import EngineInvariantError
from addressengine.engine.simulator import EngineMode
from addressengine.engine.simulator import EngineRun
from addressengine.engine.simulator import UnsupportedModeError
from addressengine.engine.simulator import run_engine
from addressengine.frames.io import load_frame
from addressengine.frames.io import save_frame
from addressengine.frames.pixels import Frame
from addressengine.runs.helpers.config import RunConfig
from addressengine.runs.helpers.reports import baseline_summary
from addressengine.runs.helpers.reports import build_report
from addressengine.runs.helpers.reports import frame_summary

logger = logging.getLogger(__name__)

EXIT_MISMATCH = 1
EXIT_INVALID = 2
EXIT_UNSUPPORTED = 3
EXIT_ENGINE_ASSERTION = 4

# Segment ids for random histogram inputs; a handful of ids gives real grouping.
RANDOM_ALFA_MAX = 15


def command_error(exc: Exception) -> CommandError:
    """Map a domain error onto a CommandError carrying the documented exit status."""
    if isinstance(exc, UnsupportedModeError):
        code = EXIT_UNSUPPORTED
    elif isinstance(exc, EngineInvariantError):
        code = EXIT_ENGINE_ASSERTION
    else:
        code = EXIT_INVALID
    return CommandError(str(exc), returncode=code)


def load_inputs(config: RunConfig) -> list[Frame]:
    frames = [load_frame(path, width=config.width, height=config.height) for path in config.inputs]
    config.check_frames(frames)
    return frames


def random_inputs(config: RunConfig, width: int, height: int, seed: int = 0) -> list[Frame]:
    rng = np.random.default_rng(seed)
    alfa_max = RANDOM_ALFA_MAX if config.kernel.uses_table else 0xFFFF
    frames = [Frame.random(rng, width, height, alfa_max=alfa_max) for _ in range(config.input_count)]
    config.check_frames(frames)
    return frames


def run_reference(config: RunConfig, frames: list[Frame]) -> ScanResult:
    if config.mode is EngineMode.INTER:
        return inter_scan(frames[0], frames[1], config.kernel)
    if config.mode is EngineMode.SEGMENT:
        result = segment_scan(frames[0], config.segment, config.mask, config.kernel)
        return ScanResult(result.frame, table=result.table)
    return intra_scan(frames[0], config.mask, config.scan, config.kernel)


def compare_with_reference(run: EngineRun, reference: ScanResult) -> None:
    """Raise EngineInvariantError when the engine disagrees with the reference scan."""
    if run.frame != reference.frame:
        differing = int(np.any(run.frame.data != reference.frame.data, axis=-1).sum())
        raise EngineInvariantError(f"Engine output differs from the reference scan at {differing} pixel(s)")
    if run.sad != reference.sad:
        raise EngineInvariantError(f"Engine SAD {run.sad} differs from the reference {reference.sad}")
    if run.table != reference.table:
        raise EngineInvariantError("Engine segment table differs from the reference scan")


def trace_path(path: Path) -> Path:
    """Bare file names land in ADDRESSENGINE_TRACE_DIR."""
    if not path.is_absolute() and path.parent == Path("."):
        path = Path(settings.ADDRESSENGINE_TRACE_DIR) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


@dataclass
class RunOutcome:
    frame: Frame
    report: dict
    engine_run: EngineRun | None = None


def execute_run(config: RunConfig, frames: list[Frame] | None = None, command: str = "run") -> RunOutcome:
    """Run *config* over *frames* (loaded from ``config.inputs`` when omitted)."""
    if frames is None:
        frames = load_inputs(config)
    first = frames[0]
    logger.info("Run: %s %s %s over %s (engine %s)", config.mode, config.kernel.op, config.mask.name, first, config.engine)

    reference = run_reference(config, frames)
    result_frame, sad, table = reference.frame, reference.sad, reference.table
    engine_run = None
    sections = {}
    if config.engine:
        engine_run = run_engine(
            config.mode,
            config.mask,
            config.scan,
            config.kernel,
            frames,
            config=config.timing,
            record=config.trace is not None,
        )
        compare_with_reference(engine_run, reference)
        result_frame = engine_run.frame
        sections = {
            "counters": engine_run.counters.to_dict(),
            "timing": engine_run.timing.to_dict(),
            "events": [e.to_dict() for e in engine_run.events],
            "matches_reference": True,
        }
        if config.trace is not None:
            path = trace_path(config.trace)
            sections["trace"] = {
                "path": str(path),
                "records": engine_run.trace.export_jsonl(path),
                "audit_records": engine_run.audit.export_jsonl(path.with_suffix(".audit.jsonl")),
                "audit_violations": len(engine_run.audit.violations()),
            }

    if config.output is not None:
        save_frame(result_frame, config.output)

    report = build_report(
        command,
        config.to_dict(),
        frame=frame_summary(first),
        engine=config.engine,
        sad={"total": sad.total, "saturated": sad.saturated} if sad is not None else None,
        table=table.to_dict() if table is not None else None,
        baseline=baseline_summary(config, first.width, first.height),
        **sections,
    )
    return RunOutcome(result_frame, report, engine_run)
