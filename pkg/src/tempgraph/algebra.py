"""Transitive closure and reduction of temporal edge sets, built on composition.

Edge sets here are sets of ``(source, target, label)`` triples whose label
is one of the canonical relations (before, includes, simultaneous). Nodes
are any hashable, orderable values; across graphs they are normalized
phrases.

Relations are read as interval relations: ``before`` is strict
precedence, ``includes`` is containment and ``simultaneous`` is equality.
Only compositions with a single possible outcome are kept, so the closure
is conservative.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .graph import CANONICAL_LABELS, RelationLabel, TemporalGraph, canonical_edge

log = logging.getLogger(__name__)

B = RelationLabel.BEFORE
A = RelationLabel.AFTER
I = RelationLabel.INCLUDES  # noqa: E741
II = RelationLabel.IS_INCLUDED
S = RelationLabel.SIMULTANEOUS

# r1(a, b), r2(b, c) -> r(a, c), over both orientations of every relation.
_ORIENTED = {
    (B, B): B, (B, S): B, (B, I): B,
    (A, A): A, (A, S): A, (A, I): A,
    (I, I): I, (I, S): I,
    (II, II): II, (II, S): II, (II, B): B, (II, A): A,
    (S, S): S, (S, B): B, (S, A): A, (S, I): I, (S, II): II,
}


def compose(r1, r2) -> Optional[RelationLabel]:
    """Relation implied between a and c by ``r1(a, b)`` and ``r2(b, c)``.

    Both labels must be canonical. Returns None when the pair leaves the
    outcome open (e.g. includes then before).
    """
    r1, r2 = RelationLabel(r1), RelationLabel(r2)
    for r in (r1, r2):
        if r not in CANONICAL_LABELS:
            raise ValueError(f"compose expects canonical labels, got {r.value!r}")
    return _ORIENTED.get((r1, r2))


def compose_oriented(r1, r2) -> Optional[RelationLabel]:
    """Like :func:`compose` but also accepts after and is_included."""
    r1, r2 = RelationLabel(r1), RelationLabel(r2)
    if RelationLabel.VAGUE in (r1, r2):
        raise ValueError("vague relations do not compose")
    return _ORIENTED.get((r1, r2))


def canonical_triple(source, target, label) -> tuple:
    """Canonical form of one triple; simultaneous pairs are ordered by node value."""
    label = RelationLabel(label)
    if label is RelationLabel.VAGUE:
        raise ValueError("vague relations have no canonical form")
    if label in (A, II):
        return (target, source, label.inverse)
    if label is S and target < source:
        return (target, source, S)
    return (source, target, label)


def edge_set(g: TemporalGraph) -> frozenset:
    """Phrase-level canonical triples of a graph's edges."""
    out = set()
    for e in g.edges:
        c = canonical_edge(e)
        out.add(canonical_triple(c.source.phrase, c.target.phrase, c.label))
    return frozenset(out)


def _pair(a, b):
    return (a, b) if a <= b else (b, a)


def find_conflicts(edges: Iterable[tuple]) -> set:
    """Unordered node pairs that carry more than one distinct relation."""
    seen = {}
    bad = set()
    for s, t, r in edges:
        trip = canonical_triple(s, t, r)
        key = _pair(s, t)
        if seen.setdefault(key, trip) != trip:
            bad.add(key)
    return bad


def drop_conflicts(edges: Iterable[tuple]) -> frozenset:
    edges = [canonical_triple(*e) for e in edges]
    bad = find_conflicts(edges)
    if bad:
        log.warning("dropping %d conflicting node pair(s): %s", len(bad), sorted(bad))
    return frozenset(e for e in edges if _pair(e[0], e[1]) not in bad)


@dataclass
class ClosureResult:
    edges: frozenset
    conflicts: set = field(default_factory=set)


def closure_with_report(edges: Iterable[tuple]) -> ClosureResult:
    """Least fixpoint of adding implied edges.

    Work proceeds in rounds. A pair whose candidate inferences disagree
    within a round is recorded as a conflict and never filled. Asserted
    edges are never overridden; an inference contradicting an asserted or
    earlier inferred edge is recorded and discarded.
    """
    asserted = frozenset(canonical_triple(*e) for e in edges)
    rel = {}  # (a, b) -> oriented label, both orientations stored
    for s, t, r in asserted:
        rel[(s, t)] = r
        rel[(t, s)] = r.inverse
    out = {}
    for (a, b), r in rel.items():
        out.setdefault(a, {})[b] = r
    conflicts = set()
    blocked = set()

    while True:
        candidates = {}
        for a in sorted(out):
            for b, r1 in out[a].items():
                for c, r2 in out.get(b, {}).items():
                    if c == a:
                        continue
                    r = _ORIENTED.get((r1, r2))
                    if r is None:
                        continue
                    existing = rel.get((a, c))
                    if existing is not None:
                        if existing is not r:
                            conflicts.add(_pair(a, c))
                        continue
                    key = _pair(a, c)
                    if key in blocked:
                        continue
                    trip = canonical_triple(a, c, r)
                    prev = candidates.setdefault(key, trip)
                    if prev != trip:
                        blocked.add(key)
                        conflicts.add(key)
        added = False
        for key, (s, t, r) in candidates.items():
            if key in blocked:
                continue
            rel[(s, t)] = r
            rel[(t, s)] = r.inverse
            out.setdefault(s, {})[t] = r
            out.setdefault(t, {})[s] = r.inverse
            added = True
        if not added:
            break

    result = set()
    for (s, t), r in rel.items():
        if r in CANONICAL_LABELS and not (r is S and t < s):
            result.add((s, t, r))
    if conflicts:
        log.debug("closure found %d conflicting pair(s)", len(conflicts))
    return ClosureResult(frozenset(result), conflicts)


def closure(edges: Iterable[tuple]) -> frozenset:
    return closure_with_report(edges).edges


def reduction(edges: Iterable[tuple]) -> frozenset:
    """Greedy transitive reduction.

    Edges are visited in sorted order; an edge is dropped when the closure
    of the edges still kept (minus itself) re-derives it. Labelled
    reductions are not unique, the fixed order makes this one reproducible.
    """
    kept = set(canonical_triple(*e) for e in edges)
    for e in sorted(kept, key=_sort_key):
        rest = kept - {e}
        if e in closure(rest):
            kept = rest
    return frozenset(kept)


def _sort_key(e):
    return (e[0], e[1], RelationLabel(e[2]).value)
