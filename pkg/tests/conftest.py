import os
import sys
from contextlib import contextmanager

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CRITERIA: dict = {}


@contextmanager
def criterion(number: int, title: str):
    """Record PASS or FAIL for one acceptance criterion; details go into ``notes``."""
    notes: list = []
    try:
        yield notes
    except BaseException:
        CRITERIA[number] = ("FAIL", title, "; ".join(notes))
        raise
    CRITERIA[number] = ("PASS", title, "; ".join(notes))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        status, title, detail = CRITERIA[number]
        line = f"criterion {number}: {status} {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
