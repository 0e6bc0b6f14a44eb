import numpy as np
import pytest

from dtipa.pipeline import PipelineConfig, run_pipeline
from dtipa.synth import JUDGMENTS_CSV, synth_survey


@pytest.fixture(scope="session")
def fixture_matrix():
    return synth_survey()


@pytest.fixture(scope="session")
def fixture_csv(fixture_matrix):
    return fixture_matrix.to_csv().encode()


@pytest.fixture(scope="session")
def fixture_report(fixture_csv):
    return run_pipeline(fixture_csv, JUDGMENTS_CSV.encode(), PipelineConfig())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
