from __future__ import annotations

import pytest

from spotlake.config import Config
from spotlake.pipeline import DemoArtifacts, run_demo


@pytest.fixture(scope="session")
def demo_artifacts(tmp_path_factory) -> DemoArtifacts:
    """One full demo run (48 simulated hours, 10-minute cadence, default seed)
    shared by the service and acceptance tests."""
    out = tmp_path_factory.mktemp("demo")
    return run_demo(Config(out=str(out)))
