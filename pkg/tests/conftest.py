import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).resolve().parents[1] / "data"


import time
from contextlib import contextmanager

import pytest

_RESULTS = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Context manager recording PASS/FAIL and wall time for one acceptance criterion."""
    results = request.config.stash.setdefault(_RESULTS, {})

    @contextmanager
    def record(number: int, title: str):
        t0 = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            why = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
            results[number] = (title, "FAIL", time.perf_counter() - t0, why)
            raise
        results[number] = (title, "PASS", time.perf_counter() - t0, "")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, verdict, secs, why = results[number]
        line = f"criterion {number}: {verdict}  {title}  ({secs:.1f} s)"
        terminalreporter.write_line(line + (f"  -- {why}" if why else ""))
