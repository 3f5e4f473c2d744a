import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rsgsim.model import (  # noqa: E402
    ArrivalModel, ChannelModel, PolicySpec, SimConfig, Topology, bernoulli, constant,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

_acceptance_lines: list[tuple[str, bool, str]] = []


@pytest.fixture
def report():
    """Collect one pass/fail line per acceptance criterion."""

    def _report(name: str, ok: bool, detail: str = "") -> bool:
        _acceptance_lines.append((name, bool(ok), detail))
        return bool(ok)

    return _report


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _acceptance_lines:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


def symmetric_single_hop(L=4, rate=0.225, kind="rsg", gamma=2.0, **run) -> SimConfig:
    cfg = SimConfig(
        Topology.single_hop(L),
        ChannelModel((constant(1),) * L),
        ArrivalModel((bernoulli(rate),) * L),
        PolicySpec.make(kind, L, gamma=gamma),
    )
    return cfg.with_run(**run) if run else cfg
