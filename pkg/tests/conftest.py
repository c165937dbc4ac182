import pytest

from strokehmm.model_zoo import ModelParams, build_ergodic_baseline, build_structured_model


@pytest.fixture(scope="session")
def structured():
    return build_structured_model(1.0, ModelParams())


@pytest.fixture(scope="session")
def ergodic():
    return build_ergodic_baseline(1.0, ModelParams())


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
