import pytest

from isac_elm.config import profile_config
from isac_elm.pilots import build_pilot_plan

# Acceptance outcomes, filled by test_acceptance.py and echoed in the summary.
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def desk_cfg():
    return profile_config("desk")


@pytest.fixture
def desk_plan(desk_cfg):
    return build_pilot_plan(desk_cfg)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
