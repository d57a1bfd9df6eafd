"""
Report documents written by the management commands.

Every report is a JSON object that embeds the effective configuration it was
produced with, so a run can be repeated from its report alone. The same data
is printed as a plain-text table for people.
"""
import json
import logging
from collections.abc import Iterable
from collections.abc import Sequence
from pathlib import Path

from addressengine.baseline.accesses import ComparisonResult
from addressengine.baseline.accesses import ZeroAccessCountError
from addressengine.baseline.accesses import count_hardware_accesses
from addressengine.baseline.accesses import count_software_accesses
from addressengine.baseline.accesses import saving
from addressengine.engine.timing import TimingReport
from addressengine.frames.pixels import Frame
from addressengine.frames.pixels import frame_byte_size

logger = logging.getLogger(__name__)

REPORT_VERSION = 1


def frame_summary(f: Frame) -> dict:
    return {
        "width": f.width,
        "height": f.height,
        "tag": str(f.tag),
        "byte_size": frame_byte_size(f),
    }


def baseline_summary(config, width: int, height: int) -> dict:
    """Software against engine access counts for one run configuration."""
    sw = count_software_accesses(
        config.mode, config.mask, config.kernel.in_channels, config.kernel.out_channels, width, height, config.scan,
    )
    hw = count_hardware_accesses(config.mode, config.mask, config.kernel.in_channels, width, height)
    data = {"software": sw, "hardware": hw, "saving": None}
    try:
        data["saving"] = saving(sw, hw).to_dict()
    except ZeroAccessCountError:
        pass
    return data


def build_report(command: str, config: dict, **sections) -> dict:
    """Wrap *sections* in the common envelope; ``None`` sections are dropped."""
    report = {"version": REPORT_VERSION, "command": command, "config": config}
    report.update({k: v for k, v in sections.items() if v is not None})
    return report


def write_report(report: dict, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=2, default=str) + "\n", encoding="utf-8")
    logger.info("Wrote %s report to %s", report.get("command", "?"), path)
    return path


# ─── Text tables ─────────────────────────────────────────────────────────────


def format_table(headers: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Left-aligned first column, right-aligned numbers, two spaces between columns."""
    cells = [[str(h) for h in headers]] + [[_cell(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]

    def line(row):
        first, *rest = row
        return "  ".join([first.ljust(widths[0])] + [v.rjust(w) for v, w in zip(rest, widths[1:], strict=True)])

    rule = "  ".join("-" * w for w in widths)
    return "\n".join([line(cells[0]), rule, *(line(r) for r in cells[1:])])


def _cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "NO"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, int):
        return f"{value:,}"
    return str(value)


def access_table_text(results: Sequence[ComparisonResult]) -> str:
    rows = [
        (
            r.row.label,
            r.software,
            r.hardware,
            f"{r.saving.relative_to_software:.0f}%",
            f"{r.saving.relative_to_hardware:.0f}%",
            r.row.published_saving,
            r.matches,
        )
        for r in results
    ]
    headers = ("configuration", "software", "engine", "vs software", "vs engine", "published", "match")
    return format_table(headers, rows)


def timing_text(timing: TimingReport) -> str:
    rows = [
        ("total cycles", timing.total_cycles),
        ("input transfer cycles", timing.input_transfer_cycles),
        ("output transfer cycles", timing.output_transfer_cycles),
        ("compute cycles", timing.compute_cycles),
        ("compute-only cycles", timing.compute_only_cycles),
        ("overlap fraction", timing.overlap_fraction),
        ("non-overlap ratio", timing.non_overlap_ratio),
        ("seconds", timing.seconds),
    ]
    return format_table(("quantity", "value"), rows)
