"""Collects one verdict line per acceptance criterion and prints them after the run."""

import time
from contextlib import contextmanager

import pytest

_VERDICTS: list[str] = []


class _Outcome:
    def __init__(self):
        self.detail = ""
        self.ok = False


@pytest.fixture
def criterion():
    """``with criterion("C3", "title", budget_s) as out: ...; out.ok = ...; out.detail = ...``"""

    @contextmanager
    def _run(cid: str, title: str, budget_s: float | None = None):
        out = _Outcome()
        start = time.perf_counter()
        try:
            yield out
        except Exception as exc:  # recorded, then re-raised for pytest
            out.ok, out.detail = False, f"{type(exc).__name__}: {exc}"
            raise
        finally:
            elapsed = time.perf_counter() - start
            if budget_s is not None and elapsed > budget_s:
                out.ok = False
                out.detail += f" (over budget: {elapsed:.1f}s > {budget_s:.0f}s)"
            line = f"{'PASS' if out.ok else 'FAIL'} {cid} {title}: {out.detail} [{elapsed:.1f}s]"
            _VERDICTS.append(line)
            print(line)
        assert out.ok, line

    return _run


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda l: int(l.split()[1][1:])):
            terminalreporter.write_line(line)
