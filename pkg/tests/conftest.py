import itertools

import pytest

from qpartial.config import validate_geometry
from qpartial.errors import QPartialError

_CRITERIA = {}


def record_criterion(number, ok, detail=""):
    """Remember the outcome of an acceptance criterion for the summary."""
    previous = _CRITERIA.get(number)
    if previous is not None:
        ok = ok and previous[0]
        detail = f"{previous[1]}; {detail}" if detail else previous[1]
    _CRITERIA[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


def valid_geometries(Ns, Ks, ts, taus):
    out = []
    for N, K, t, tau in itertools.product(Ns, Ks, ts, taus):
        try:
            out.append(validate_geometry(N, K, t, tau))
        except QPartialError:
            pass
    return out


@pytest.fixture
def g64():
    return validate_geometry(64, 4, 1, 1)
