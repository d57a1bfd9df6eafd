"""Management command to measure how much of an engine run is hidden behind the PCI transfers."""
import json
import logging

from django.core.management.base import BaseCommand

from addressengine.engine.memory import EngineInvariantError
from addressengine.engine.timing import InterPolicy
from addressengine.frames.pixels import size_for_tag
from addressengine.runs.helpers.config import kernel_arg
from addressengine.runs.helpers.config import load_run_config
from addressengine.runs.helpers.execution import command_error
from addressengine.runs.helpers.execution import execute_run
from addressengine.runs.helpers.execution import load_inputs
from addressengine.runs.helpers.execution import random_inputs
from addressengine.runs.helpers.records import record_report
from addressengine.runs.helpers.reports import timing_text
from addressengine.runs.helpers.reports import write_report

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Simulate a run and report transfer, compute and non-overlapped cycles."

    def add_arguments(self, parser):
        parser.add_argument("--config", default=None, help="JSON run configuration; flags override it.")
        parser.add_argument("--mode", choices=["inter", "intra"], default=None, help="Defaults to inter.")
        parser.add_argument("--mask", default=None)
        parser.add_argument("--kernel", default=None, help="Kernel op name or JSON descriptor.")
        parser.add_argument("--scan", choices=["horizontal", "vertical"], default=None)
        parser.add_argument("--in", dest="input", default=None, help="Input frame; random frames when omitted.")
        parser.add_argument("--in2", dest="input2", default=None)
        parser.add_argument("--size", default="CIF", help="QCIF, CIF or WxH for random frames.")
        parser.add_argument("--seed", type=int, default=0, help="Random frame seed.")
        parser.add_argument(
            "--worst-case",
            action="store_true",
            help="Send inter inputs one after the other and start the engine only when both are in.",
        )
        parser.add_argument("--report", default=None, help="Write the JSON report here.")
        parser.add_argument("--json", action="store_true", help="Print the JSON report instead of the table.")
        parser.add_argument("--record", action="store_true", help="Persist the report as a RunRecord.")

    def handle(self, *args, **options):
        inputs = [p for p in (options["input"], options["input2"]) if p]
        mode = options["mode"] or (None if options["config"] else "inter")
        try:
            config = load_run_config(
                options["config"],
                mode=mode,
                mask=options["mask"],
                kernel=kernel_arg(options["kernel"]) if options["kernel"] else None,
                scan=options["scan"],
                engine=True,
                inputs=inputs or None,
                report=options["report"],
                inter_policy=str(InterPolicy.WORST_CASE) if options["worst_case"] else None,
            )
            if config.inputs:
                frames = load_inputs(config)
            else:
                frames = random_inputs(config, *size_for_tag(options["size"]), seed=options["seed"])
            outcome = execute_run(config, frames, command="timing")
        except (ValueError, OSError, EngineInvariantError) as exc:
            logger.error("timing failed: %s", exc)
            raise command_error(exc) from exc

        report = outcome.report
        if not config.inputs:
            report["random_frames"] = {"size": options["size"], "seed": options["seed"]}
        if config.report is not None:
            write_report(report, config.report)
        if options["record"]:
            record_report("timing", report, mode=str(config.mode), engine=True)

        if options["json"]:
            self.stdout.write(json.dumps(report, indent=2, default=str))
            return
        timing = outcome.engine_run.timing
        self.stdout.write(timing_text(timing))
        self.stdout.write(
            self.style.SUCCESS(
                f"Done: {config.mode} ({config.timing.inter_policy}) over {frames[0]!r}, "
                f"non-overlap ratio {timing.non_overlap_ratio:.4f}.",
            ),
        )
