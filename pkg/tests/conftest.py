import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coldist.naming import (TABLE_ENV, fallback_table, learn_ground_distance, load_naming_table, load_w2c_text,
                            save_naming_table)

PUBLISHED_SKIP = (f"published naming table not available: set {TABLE_ENV} to its CSV "
                  "(or w2c.txt) to run this check")


@pytest.fixture(scope="session")
def table():
    return fallback_table()


@pytest.fixture(scope="session")
def ground(table):
    return learn_ground_distance(table, 0.7)


def _published():
    path = os.environ.get(TABLE_ENV)
    if not path or not Path(path).exists():
        return None
    return load_w2c_text(path) if path.endswith(".txt") else load_naming_table(path)


@pytest.fixture(scope="session")
def published_table():
    tbl = _published()
    if tbl is None:
        pytest.skip(PUBLISHED_SKIP)
    return tbl


@pytest.fixture(scope="session")
def published_ground(published_table):
    return learn_ground_distance(published_table, 0.7)


@pytest.fixture(scope="session")
def published_table_csv(published_table, tmp_path_factory):
    path = tmp_path_factory.mktemp("published") / "names.csv"
    save_naming_table(published_table, path)
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one status line per acceptance criterion, printed after the run
_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
        detail = ""
        if rep.skipped and isinstance(rep.longrepr, tuple):
            detail = f" ({rep.longrepr[2].removeprefix('Skipped: ')})"
        _CRITERIA[number] = f"{status} criterion {number}: {title}{detail}"


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
