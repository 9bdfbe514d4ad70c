import math

import pytest

from lossy_su11.model import InterferometerConfig

REFERENCE_G1 = 0.05


@pytest.fixture
def lossy_config():
    return InterferometerConfig(0.05, 0.03, T_A=0.8, T_B=0.7, eta_A=0.9, eta_B=0.85, phi=math.pi / 3)


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(tag: str, ok: bool, detail: str) -> str:
    line = f"{tag}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
