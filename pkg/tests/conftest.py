import numpy as np
import pytest

from subcellsbp.mesh import OversetDomain

_acceptance_lines = []


@pytest.fixture
def overlap_domain():
    return OversetDomain(-1.0, -0.1, 0.1, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def acceptance(request):
    """Collects one pass/fail line per acceptance criterion."""

    def report(name: str, passed: bool, detail: str = ""):
        status = "PASS" if passed else "FAIL"
        _acceptance_lines.append(f"{status}  {name}" + (f"  [{detail}]" if detail else ""))
        assert passed, f"{name}: {detail}"

    return report


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
