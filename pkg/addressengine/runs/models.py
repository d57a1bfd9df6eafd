from uuid import uuid4

from django.db import models
from django.db.models import BooleanField
from django.db.models import CharField
from django.db.models import DateTimeField
from django.db.models import JSONField
from django.db.models import Model
from django.db.models import TextChoices
from django.db.models import TextField
from django.db.models import UUIDField


class RunRecord(Model):
    """One command invocation: the effective config it ran with and the report it produced."""

    class Command(TextChoices):
        RUN = "run", "Run"
        TABLE2 = "table2", "Access table"
        TIMING = "timing", "Timing"

    class Status(TextChoices):
        PENDING = "pending", "Pending"
        SUCCEEDED = "succeeded", "Succeeded"
        FAILED = "failed", "Failed"

    id = UUIDField(primary_key=True, default=uuid4, editable=False)
    command = CharField(max_length=20, choices=Command.choices, default=Command.RUN)
    status = CharField(max_length=20, choices=Status.choices, default=Status.PENDING)
    mode = CharField(max_length=20, blank=True)
    engine = BooleanField(default=False)
    config = JSONField(default=dict)
    report = JSONField(default=dict)
    error = TextField(blank=True)
    created_at = DateTimeField(auto_now_add=True)
    finished_at = DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ["-created_at"]
        indexes = [
            models.Index(fields=["command", "status"], name="runs_command_status_idx"),
        ]

    def __str__(self) -> str:
        return f"{self.command} {self.id} – {self.status}"
