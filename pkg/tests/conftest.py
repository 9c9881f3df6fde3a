from fractions import Fraction

import pytest
from hypothesis import settings

from qserre.qfield import SYMBOLIC, specialized

settings.register_profile("qserre", max_examples=40, deadline=None)
settings.load_profile("qserre")

Q32 = specialized(Fraction(3, 2))


@pytest.fixture(params=[Q32, SYMBOLIC], ids=["q=3/2", "symbolic"])
def field(request):
    return request.param


@pytest.fixture
def F():
    return Q32


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        title, status = results[n]
        terminalreporter.write_line(f"{status}  criterion {n:2d}: {title}")
