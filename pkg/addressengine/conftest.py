import os

import numpy as np
import pytest
from hypothesis import HealthCheck
from hypothesis import settings as hypothesis_settings

from addressengine.frames.pixels import Frame
from addressengine.runs.models import RunRecord
from addressengine.runs.tests.factories import RunRecordFactory

# Oracle suites build frames and run the simulator per example, so the
# default deadline is far too tight.
hypothesis_settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
hypothesis_settings.register_profile("ci", parent=hypothesis_settings.get_profile("default"), max_examples=200)
hypothesis_settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(autouse=True)
def _trace_dir(settings, tmp_path) -> None:
    settings.ADDRESSENGINE_TRACE_DIR = str(tmp_path / "traces")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20_05)


@pytest.fixture
def small_frame(rng) -> Frame:
    return Frame.random(rng, 32, 32, alfa_max=7)


@pytest.fixture
def run_record(db) -> RunRecord:
    return RunRecordFactory()
