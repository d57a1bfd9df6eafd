"""
Huey background tasks for engine runs.

Each task is a thin wrapper: load the RunRecord, rebuild the RunConfig from
its stored config, delegate to the execution helpers and persist the outcome.
"""
import logging

from huey.contrib.djhuey import db_task

from addressengine.runs.models import RunRecord

logger = logging.getLogger(__name__)


@db_task()
def run_config_task(record_id: str) -> str | None:
    """
    Execute the RunConfig stored on a pending RunRecord.

    Inputs are read from the paths in the config. Returns the final status,
    or None when the record no longer exists.
    """
    from django.utils import timezone

    from addressengine.runs.helpers.config import RunConfig
    from addressengine.runs.helpers.execution import execute_run

    try:
        record = RunRecord.objects.get(pk=record_id)
    except RunRecord.DoesNotExist:
        logger.warning("run_config_task: RunRecord %s not found", record_id)
        return None

    try:
        config = RunConfig.from_dict(record.config)
        config.validate()
        outcome = execute_run(config)
    except (ValueError, OSError, AssertionError) as exc:
        logger.exception("run_config_task: run %s failed", record_id)
        record.status = RunRecord.Status.FAILED
        record.error = f"{type(exc).__name__}: {exc}"
    else:
        record.status = RunRecord.Status.SUCCEEDED
        record.report = outcome.report
    record.finished_at = timezone.now()
    record.save(update_fields=["status", "error", "report", "finished_at"])
    return record.status
