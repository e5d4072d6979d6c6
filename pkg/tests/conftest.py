from pathlib import Path

import pytest

from blsos.datum import validate

DATA = Path(__file__).parent / "data"

LW_MAPS = [[[0, 1, 0], [0, 0, 1]], [[1, 0, 0], [0, 0, 1]], [[1, 0, 0], [0, 1, 0]]]


def lw(p, box=2):
    return validate({"n": 3, "maps": LW_MAPS, "p": [str(x) for x in p], "domain": {"box": box}})


def holder(p=("1/2", "1/2"), box=2):
    return validate({"n": 1, "maps": [[[1]], [[1]]], "p": list(p), "domain": {"box": box}})


@pytest.fixture
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num][1])
