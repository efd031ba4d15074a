import math

import pytest

from coopcast.protocol import ProtocolParams

# G(alpha) = 1/2, beta = 1/2, 0 dB
FIG2_ALPHA = math.exp(-0.5)


@pytest.fixture
def fig2():
    return ProtocolParams(alpha=FIG2_ALPHA, beta=0.5, snr=1.0)


_RESULTS = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion, then assert it."""
    results = request.config.stash.setdefault(_RESULTS, {})

    def record(number: int, ok: bool, detail: str):
        results[number] = (bool(ok), detail)
        assert ok, f"criterion {number}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
