import os
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=1000, deadline=None, derandomize=True)
settings.register_profile("quick", max_examples=100, deadline=None, derandomize=True)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ROOT = Path(__file__).resolve().parent.parent
GOLDEN_SOURCE = ROOT / "programs" / "golden.s"


@pytest.fixture
def golden_source():
    return GOLDEN_SOURCE.read_text()


@pytest.fixture
def golden_image(golden_source):
    from dynclock import assemble

    return assemble(golden_source, "word-aligned")


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" in props and (rep.when == "call" or outcome != "passed"):
                rows.append((props["criterion"], "PASS" if outcome == "passed" else "FAIL", props.get("detail", "")))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, status, detail in sorted(set(rows)):
        terminalreporter.write_line(f"criterion {num}: {status}  {detail}")
