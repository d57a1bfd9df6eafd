"""Persisting command reports and queueing runs as RunRecords."""
import logging

from django.utils import timezone

from addressengine.runs.helpers.config import RunConfig
from addressengine.runs.models import RunRecord

logger = logging.getLogger(__name__)


def record_report(command: str, report: dict, *, mode: str = "", engine: bool = False) -> RunRecord:
    """Store a finished command's report; the config is taken from the report itself."""
    record = RunRecord.objects.create(
        command=command,
        status=RunRecord.Status.SUCCEEDED,
        mode=mode,
        engine=engine,
        config=report.get("config", {}),
        report=report,
        finished_at=timezone.now(),
    )
    logger.info("Recorded %s report as RunRecord %s", command, record.pk)
    return record


def queue_run(config: RunConfig) -> RunRecord:
    """Create a pending RunRecord and hand it to the huey workers."""
    from addressengine.runs.tasks import run_config_task

    record = RunRecord.objects.create(
        command=RunRecord.Command.RUN,
        mode=str(config.mode),
        engine=config.engine,
        config=config.to_dict(),
    )
    run_config_task(str(record.pk))
    return record
