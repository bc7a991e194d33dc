from pathlib import Path

import pytest

from epamgps.codec import syllable
from epamgps.epam import Pair

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"
CORPUS = HERE / "corpus"


def pairs(text):
    """``"DAX:JIR KOQ:PEM"`` -> tuple of Pair."""
    out = []
    for item in text.split():
        s, r = item.split(":")
        out.append(Pair(syllable(s), syllable(r)))
    return tuple(out)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
