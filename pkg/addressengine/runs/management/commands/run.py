"""Management command to run one addressing configuration on the reference library or the engine simulator."""
import json
import logging

from django.core.management.base import BaseCommand

from addressengine.engine.memory import EngineInvariantError
from addressengine.engine.timing import InterPolicy
from addressengine.runs.helpers.config import kernel_arg
from addressengine.runs.helpers.config import load_run_config
from addressengine.runs.helpers.execution import command_error
from addressengine.runs.helpers.execution import execute_run
from addressengine.runs.helpers.records import record_report
from addressengine.runs.helpers.reports import format_table
from addressengine.runs.helpers.reports import timing_text
from addressengine.runs.helpers.reports import write_report

logger = logging.getLogger(__name__)


def seed_arg(value: str) -> tuple[int, int]:
    x, _, y = value.partition(",")
    return int(x), int(y)


class Command(BaseCommand):
    help = "Run an addressing scan on input frames, optionally through the cycle-accurate engine simulator."

    def add_arguments(self, parser):
        parser.add_argument("--config", default=None, help="JSON run configuration; flags override it.")
        parser.add_argument("--mode", choices=["inter", "intra", "segment"], default=None)
        parser.add_argument("--mask", default=None, help="Mask name, e.g. CON_0 or CON_8.")
        parser.add_argument("--kernel", default=None, help="Kernel op name or JSON descriptor.")
        parser.add_argument("--scan", choices=["horizontal", "vertical"], default=None)
        parser.add_argument(
            "--engine",
            action="store_true",
            default=None,
            help="Run the engine simulator and check it against the reference library.",
        )
        parser.add_argument("--in", dest="input", default=None, help="Input frame (raw-planar or .pgm).")
        parser.add_argument("--in2", dest="input2", default=None, help="Second input frame for inter addressing.")
        parser.add_argument("--width", type=int, default=None, help="Frame width, required for raw-planar input.")
        parser.add_argument("--height", type=int, default=None, help="Frame height, required for raw-planar input.")
        parser.add_argument("--out", default=None, help="Write the output frame here.")
        parser.add_argument("--report", default=None, help="Write the JSON report here.")
        parser.add_argument("--trace", default=None, help="Write the engine access trace (JSON lines) here.")
        parser.add_argument("--threshold", type=int, default=None, help="Segment homogeneity threshold.")
        parser.add_argument(
            "--seed-pixel",
            type=seed_arg,
            action="append",
            default=None,
            help="Segment seed as x,y; repeat for several seeds.",
        )
        parser.add_argument("--inter-policy", choices=[str(p) for p in InterPolicy], default=None)
        parser.add_argument("--json", action="store_true", help="Print the JSON report instead of a summary.")
        parser.add_argument("--record", action="store_true", help="Persist the report as a RunRecord.")

    def handle(self, *args, **options):
        try:
            config = load_run_config(options["config"], **self.flag_values(options))
            outcome = execute_run(config)
        except (ValueError, OSError, EngineInvariantError) as exc:
            logger.error("run failed: %s", exc)
            raise command_error(exc) from exc

        report = outcome.report
        if config.report is not None:
            write_report(report, config.report)
        if options["record"]:
            record_report("run", report, mode=str(config.mode), engine=config.engine)

        if options["json"]:
            self.stdout.write(json.dumps(report, indent=2, default=str))
            return
        self.stdout.write(self.summary(report, outcome.engine_run))
        if config.output is not None:
            self.stdout.write(f"Output frame written to {config.output}")
        self.stdout.write(self.style.SUCCESS(f"Done: {config.mode} {config.kernel.op} over {outcome.frame!r}."))

    def flag_values(self, options) -> dict:
        inputs = [p for p in (options["input"], options["input2"]) if p]
        flags = {
            "mode": options["mode"],
            "mask": options["mask"],
            "kernel": kernel_arg(options["kernel"]) if options["kernel"] else None,
            "scan": options["scan"],
            "engine": options["engine"],
            "inputs": inputs or None,
            "width": options["width"],
            "height": options["height"],
            "output": options["out"],
            "report": options["report"],
            "trace": options["trace"],
            "inter_policy": options["inter_policy"],
        }
        if options["threshold"] is not None or options["seed_pixel"]:
            flags["segment"] = {"threshold": options["threshold"] or 0, "seeds": options["seed_pixel"] or []}
        return flags

    def summary(self, report: dict, engine_run) -> str:
        rows = [
            ("frame", f"{report['frame']['width']}x{report['frame']['height']} ({report['frame']['tag']})"),
            ("software accesses", report["baseline"]["software"]),
            ("engine accesses", report["baseline"]["hardware"]),
        ]
        if "sad" in report:
            rows.append(("SAD", report["sad"]["total"]))
        if "table" in report:
            rows.append(("segments", len(report["table"])))
        if engine_run is not None:
            rows += [
                ("access events", engine_run.counters.access_events),
                ("stalled cycles", engine_run.counters.cycles_stalled),
                ("matches reference", True),
            ]
        text = format_table(("run", "value"), rows)
        if engine_run is not None:
            text += "\n\n" + timing_text(engine_run.timing)
        return text
