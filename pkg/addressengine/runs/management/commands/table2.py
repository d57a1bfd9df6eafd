"""Management command to reproduce the published software-versus-engine memory access comparison."""
import json
import logging

import numpy as np
from django.core.management.base import BaseCommand
from django.core.management.base import CommandError

from addressengine.baseline.accesses import compare_accesses
from addressengine.engine.memory import EngineInvariantError
from addressengine.engine.simulator import EngineMode
from addressengine.engine.simulator import run_engine
from addressengine.frames.pixels import Frame
from addressengine.frames.pixels import FrameTag
from addressengine.frames.pixels import size_for_tag
from addressengine.kernels.descriptors import Kernel
from addressengine.kernels.descriptors import KernelOp
from addressengine.runs.helpers.execution import EXIT_MISMATCH
from addressengine.runs.helpers.execution import command_error
from addressengine.runs.helpers.records import record_report
from addressengine.runs.helpers.reports import access_table_text
from addressengine.runs.helpers.reports import build_report
from addressengine.runs.helpers.reports import write_report

logger = logging.getLogger(__name__)


def simulated_hardware_count(row, width: int, height: int, seed: int = 0) -> int:
    """Run the engine on random frames for one comparison row and return its access events."""
    rng = np.random.default_rng(seed)
    slots = 2 if row.mode is EngineMode.INTER else 1
    frames = [Frame.random(rng, width, height) for _ in range(slots)]
    op = KernelOp.DIFF if slots == 2 else KernelOp.IDENTITY
    kernel = Kernel(op, in_channels=row.in_channels, out_channels=row.out_channels)
    run = run_engine(row.mode, row.mask, "horizontal", kernel, frames)
    return run.counters.access_events


class Command(BaseCommand):
    help = "Count memory accesses of the software solution and the engine for the four published configurations."

    def add_arguments(self, parser):
        parser.add_argument("dims", nargs="?", choices=[str(FrameTag.QCIF), str(FrameTag.CIF)], default=str(FrameTag.CIF))
        parser.add_argument(
            "--simulate",
            action="store_true",
            help="Confirm the engine column by running the simulator on random frames.",
        )
        parser.add_argument("--report", default=None, help="Write the JSON report here.")
        parser.add_argument("--json", action="store_true", help="Print the JSON report instead of the table.")
        parser.add_argument("--record", action="store_true", help="Persist the report as a RunRecord.")

    def handle(self, *args, **options):
        dims = options["dims"]
        results = compare_accesses(dims)
        width, height = size_for_tag(dims)

        simulated = None
        if options["simulate"]:
            simulated = {}
            for r in results:
                self.stdout.write(f"Simulating {r.row.label} on {dims}…")
                try:
                    simulated[r.row.label] = simulated_hardware_count(r.row, width, height)
                except (ValueError, EngineInvariantError) as exc:
                    logger.error("table2 simulation failed for %s: %s", r.row.label, exc)
                    raise command_error(exc) from exc

        report = build_report(
            "table2",
            {"dims": dims, "simulate": options["simulate"]},
            rows=[r.to_dict() for r in results],
            simulated_hardware=simulated,
        )
        if options["report"]:
            write_report(report, options["report"])
        if options["record"]:
            record_report("table2", report, engine=options["simulate"])

        if options["json"]:
            self.stdout.write(json.dumps(report, indent=2))
        else:
            self.stdout.write(access_table_text(results))

        mismatches = [r.row.label for r in results if r.matches is False]
        if simulated is not None:
            mismatches += [r.row.label for r in results if simulated[r.row.label] != r.hardware]
        if mismatches:
            raise CommandError(f"Access counts differ from the published figures: {', '.join(mismatches)}", returncode=EXIT_MISMATCH)
        if dims == FrameTag.CIF:
            self.stdout.write(self.style.SUCCESS(f"Done: all {len(results)} configurations match the published counts."))
        else:
            self.stdout.write(self.style.SUCCESS(f"Done: {dims} counts (the published figures are for CIF)."))
