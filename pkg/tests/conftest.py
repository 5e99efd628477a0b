import json
import sys
from pathlib import Path

import pytest

from dea_research import _kernels
from dea_research.dea import DmuPanel
from dea_research.lp import SolverOptions

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

BACKENDS = ["numpy"] + (["numba"] if _kernels.NUMBA_AVAILABLE else [])


@pytest.fixture(params=BACKENDS)
def options(request):
    return SolverOptions(backend=request.param)


@pytest.fixture
def hand_panel():
    """A(2,4->1), B(4,2->1), C(4,4->1); third input and other outputs zero."""
    return DmuPanel.from_bundles(
        1,
        [
            ("A", (2, 4, 0), (1, 0, 0)),
            ("B", (4, 2, 0), (1, 0, 0)),
            ("C", (4, 4, 0), (1, 0, 0)),
        ],
        min_staff_threshold=0,
    )


@pytest.fixture(scope="session")
def lp_oracle_cases():
    return json.loads((HERE / "data" / "lp_oracle_500.json").read_text())["cases"]


@pytest.fixture
def fixtures_dir():
    return HERE / "fixtures"


_acceptance: dict[str, str] = {}
_criteria: dict[str, str] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        if item.get_closest_marker("acceptance"):
            doc = (item.function.__doc__ or "").strip()
            _criteria[item.nodeid] = doc.splitlines()[0] if doc else ""


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    if report.when == "call" or report.outcome != "passed":
        _acceptance[report.nodeid] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_acceptance):
        terminalreporter.write_line(f"{_acceptance[nodeid]}  {_criteria[nodeid]}")
