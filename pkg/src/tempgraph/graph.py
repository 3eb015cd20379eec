"""Event and relation types for per-document temporal graphs."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

_WS = re.compile(r"\s+")


class RelationLabel(str, enum.Enum):
    BEFORE = "before"
    AFTER = "after"
    INCLUDES = "includes"
    IS_INCLUDED = "is_included"
    SIMULTANEOUS = "simultaneous"
    VAGUE = "vague"

    @property
    def inverse(self) -> "RelationLabel":
        return _INVERSE[self]

    @property
    def is_canonical(self) -> bool:
        return self in CANONICAL_LABELS

    @property
    def words(self) -> str:
        """Natural-language form used in prompts (``is_included`` -> ``is included``)."""
        return self.value.replace("_", " ")

    @classmethod
    def parse(cls, text: str) -> "RelationLabel":
        key = normalize_phrase(text).replace(" ", "_")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown relation label {text!r}") from None

    def __str__(self) -> str:
        return self.value


_INVERSE = {
    RelationLabel.BEFORE: RelationLabel.AFTER,
    RelationLabel.AFTER: RelationLabel.BEFORE,
    RelationLabel.INCLUDES: RelationLabel.IS_INCLUDED,
    RelationLabel.IS_INCLUDED: RelationLabel.INCLUDES,
    RelationLabel.SIMULTANEOUS: RelationLabel.SIMULTANEOUS,
    RelationLabel.VAGUE: RelationLabel.VAGUE,
}

CANONICAL_LABELS = frozenset(
    {RelationLabel.BEFORE, RelationLabel.INCLUDES, RelationLabel.SIMULTANEOUS}
)

RULE = "rule"
STATISTICAL = "statistical"
ORIGINS = (RULE, STATISTICAL)


def normalize_phrase(raw: str) -> str:
    """Lowercase, collapse whitespace runs to one space and trim."""
    return _WS.sub(" ", raw).strip().lower()


@dataclass(frozen=True)
class Event:
    """An augmented event phrase anchored at the verb's document token offset.

    ``phrase`` defaults to the normalized "subject verb object" string.
    Decoded graphs only know the phrase, so the parts may all be empty.
    """

    token_index: int
    verb: str = ""
    subject: str = ""
    object: str = ""
    sentence_index: int = 0
    phrase: str = ""

    def __post_init__(self):
        if self.token_index < 0 or self.sentence_index < 0:
            raise ValueError("token_index and sentence_index must be non-negative")
        phrase = self.phrase or " ".join((self.subject, self.verb, self.object))
        object.__setattr__(self, "phrase", normalize_phrase(phrase))

    @classmethod
    def from_phrase(cls, phrase: str, token_index: int, sentence_index: int = 0) -> "Event":
        return cls(token_index=token_index, sentence_index=sentence_index, phrase=phrase)


@dataclass(frozen=True)
class TemporalEdge:
    source: Event
    target: Event
    label: RelationLabel
    origin: str = RULE
    confidence: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "label", RelationLabel(self.label))
        if self.source.token_index == self.target.token_index:
            raise ValueError(f"self-loop on event at token {self.source.token_index}")
        if self.origin not in ORIGINS:
            raise ValueError(f"unknown edge origin {self.origin!r}")
        if self.origin == RULE:
            object.__setattr__(self, "confidence", 1.0)
        elif not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    @property
    def key(self) -> tuple:
        return (self.source.token_index, self.target.token_index, self.label)

    def sort_key(self) -> tuple:
        s, t = self.source.token_index, self.target.token_index
        return (min(s, t), max(s, t), self.label.value, s)


def canonical_edge(e: TemporalEdge) -> TemporalEdge:
    """Rewrite ``e`` so only before/includes/simultaneous labels remain.

    after and is_included flip direction; simultaneous edges put the
    earlier token first. Vague edges have no canonical form.
    """
    if e.label is RelationLabel.VAGUE:
        raise ValueError("vague edges have no canonical form; prune them first")
    if e.label in (RelationLabel.AFTER, RelationLabel.IS_INCLUDED):
        return TemporalEdge(e.target, e.source, e.label.inverse, e.origin, e.confidence)
    if (
        e.label is RelationLabel.SIMULTANEOUS
        and e.source.token_index > e.target.token_index
    ):
        return TemporalEdge(e.target, e.source, e.label, e.origin, e.confidence)
    return e


@dataclass(frozen=True)
class TemporalGraph:
    """Events and temporal edges of one document (or one community of it).

    Construction sorts events by token offset, drops repeated
    ``(source, target, label)`` triples (first one wins) and lists the
    edges in document order.
    """

    doc_id: str
    events: tuple = ()
    edges: tuple = ()
    _by_token: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        events = tuple(sorted(self.events, key=lambda ev: ev.token_index))
        by_token = {}
        for ev in events:
            if ev.token_index in by_token:
                raise ValueError(f"two events share token_index {ev.token_index}")
            by_token[ev.token_index] = ev
        seen = set()
        edges = []
        for e in self.edges:
            for end in (e.source, e.target):
                if by_token.get(end.token_index) != end:
                    raise ValueError(f"edge endpoint {end.phrase!r} is not a graph event")
            if e.key in seen:
                continue
            seen.add(e.key)
            edges.append(e)
        edges.sort(key=TemporalEdge.sort_key)
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "_by_token", by_token)

    def event_at(self, token_index: int) -> Event:
        return self._by_token[token_index]

    def phrases(self) -> frozenset:
        return frozenset(ev.phrase for ev in self.events)

    def isolated_events(self) -> list:
        linked = {ev.token_index for e in self.edges for ev in (e.source, e.target)}
        return [ev for ev in self.events if ev.token_index not in linked]

    def subgraph(self, token_indices: Iterable[int], doc_id: Optional[str] = None) -> "TemporalGraph":
        keep = set(token_indices)
        return TemporalGraph(
            doc_id=self.doc_id if doc_id is None else doc_id,
            events=[ev for ev in self.events if ev.token_index in keep],
            edges=[
                e
                for e in self.edges
                if e.source.token_index in keep and e.target.token_index in keep
            ],
        )


def graph_stats(g: TemporalGraph) -> tuple:
    """Return ``(node_count, edge_count, degree_ratio)`` with ratio = |E|/|V|."""
    n, m = len(g.events), len(g.edges)
    return n, m, (m / n if n else 0.0)


def graph_to_record(g: TemporalGraph) -> dict:
    return {
        "doc_id": g.doc_id,
        "events": [
            {
                "phrase": ev.phrase,
                "token_index": ev.token_index,
                "sentence_index": ev.sentence_index,
                "subject": ev.subject,
                "verb": ev.verb,
                "object": ev.object,
            }
            for ev in g.events
        ],
        "edges": [
            {
                "source": e.source.token_index,
                "target": e.target.token_index,
                "label": e.label.value,
                "origin": e.origin,
                "confidence": e.confidence,
            }
            for e in g.edges
        ],
    }


def graph_from_record(rec: dict) -> TemporalGraph:
    events = [
        Event(
            token_index=int(ev["token_index"]),
            verb=ev.get("verb", ""),
            subject=ev.get("subject", ""),
            object=ev.get("object", ""),
            sentence_index=int(ev.get("sentence_index", 0)),
            phrase=ev.get("phrase", ""),
        )
        for ev in rec.get("events", [])
    ]
    by_token = {ev.token_index: ev for ev in events}
    edges = []
    for e in rec.get("edges", []):
        try:
            src, tgt = by_token[int(e["source"])], by_token[int(e["target"])]
        except KeyError as exc:
            raise ValueError(f"edge endpoint {exc.args[0]} is not an event") from None
        edges.append(
            TemporalEdge(
                src, tgt, RelationLabel.parse(e["label"]),
                e.get("origin", RULE), float(e.get("confidence", 1.0)),
            )
        )
    return TemporalGraph(str(rec.get("doc_id", "")), events, edges)
