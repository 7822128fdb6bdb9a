import math

import pytest

from hmcfront.scene import example_scene

ALPHAS = (1.0, 2.0, 0.5)
KS = (1.0, 2 * math.sqrt(2), 4.0)


def gallery():
    """(label, Scene) for every example front used by the checks."""
    out = [(f"zalpha-{a:g}", example_scene("zalpha", alpha=a)) for a in ALPHAS]
    out += [(f"expk-{k:.4g}", example_scene("expk", k=k)) for k in KS]
    out.append(("joukowski", example_scene("joukowski")))
    return out


@pytest.fixture(scope="session")
def scenes():
    return dict(gallery())


_ACCEPTANCE: list = []


@pytest.fixture
def acceptance():
    """Record one criterion verdict; the lines are repeated in the run summary."""
    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d} {title}: {'PASS' if ok else 'FAIL'} ({detail})"
        print(line)
        _ACCEPTANCE.append((number, line))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
