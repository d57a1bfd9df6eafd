"""Management command to queue independent run configurations on the huey workers."""
import logging

from django.core.management.base import BaseCommand
from django.core.management.base import CommandError

from addressengine.runs.helpers.config import load_run_config
from addressengine.runs.helpers.execution import command_error
from addressengine.runs.helpers.records import queue_run
from addressengine.runs.models import RunRecord

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Validate each JSON run configuration and dispatch it to the huey workers as a RunRecord."

    def add_arguments(self, parser):
        parser.add_argument("configs", nargs="+", help="JSON run configuration files.")
        parser.add_argument("--engine", action="store_true", default=None, help="Force the engine simulator on.")

    def handle(self, *args, **options):
        # Validate everything first so a bad file does not leave half a batch queued.
        try:
            configs = [load_run_config(path, engine=options["engine"]) for path in options["configs"]]
        except ValueError as exc:
            logger.error("run_batch: invalid config: %s", exc)
            raise command_error(exc) from exc

        self.stdout.write(f"Queueing {len(configs)} run(s)…")
        records = [queue_run(config) for config in configs]
        for record in records:
            record.refresh_from_db()
            self.stdout.write(f"  {record.pk}  {record.mode:<8} {record.status}")

        failed = [r for r in records if r.status == RunRecord.Status.FAILED]
        if failed:
            raise CommandError(f"{len(failed)} of {len(records)} run(s) failed", returncode=1)
        self.stdout.write(self.style.SUCCESS(f"Done: {len(records)} RunRecord(s) created."))
