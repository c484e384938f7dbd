import numpy as np
import pytest

_VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def verdict(request):
    """Record a PASS/FAIL line for the acceptance summary and return the flag."""
    lines = request.config.stash.setdefault(_VERDICTS, [])

    def record(number: int, title: str, passed: bool, detail: str, elapsed: float) -> bool:
        lines.append(f"{'PASS' if passed else 'FAIL'} criterion {number:>2} {title} ({elapsed:.1f}s): {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
