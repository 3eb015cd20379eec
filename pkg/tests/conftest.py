import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from tempgraph.graph import Event, TemporalEdge, TemporalGraph  # noqa: E402

_acceptance = []


def make_graph(phrases, triples, doc_id="d"):
    """Graph whose events are ``phrases`` in order; triples use phrases as endpoints."""
    events = {p: Event.from_phrase(p, i) for i, p in enumerate(phrases)}
    edges = [TemporalEdge(events[s], events[t], r) for s, t, r in triples]
    return TemporalGraph(doc_id, list(events.values()), edges)


@pytest.fixture
def graph_of():
    return make_graph


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance.append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
