"""From annotated documents to graph-generation and node-generation datasets.

Input documents are pre-tokenized, with raw event and temporal-link
annotations as produced by a dense temporal relation extractor. The
pipeline prunes noisy events and links, expands each verb into a
"subject verb object" phrase, splits every document graph into event
communities and writes one (context text, DOT graph) pair per community.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .communities import graph_communities
from .graph import (
    ORIGINS,
    STATISTICAL,
    Event,
    RelationLabel,
    TemporalEdge,
    TemporalGraph,
)

LOW_IDF_VERBS = ("said", "say", "had", "made", "told")
LIGHT_VERBS = (
    "appear", "be", "become", "do", "have", "seem", "get", "give", "go",
    "keep", "make", "put", "set", "take",
)
REPORTING_VERBS = ("argue", "claim", "say", "suggest", "tell")
DEFAULT_BANNED_VERBS = frozenset(LOW_IDF_VERBS + LIGHT_VERBS + REPORTING_VERBS)


class SchemaError(ValueError):
    """A corpus record does not match the expected layout."""


@dataclass(frozen=True)
class RawEvent:
    verb: str
    sentence_index: int
    token_index: int
    subject: Optional[str] = None
    object: Optional[str] = None


@dataclass(frozen=True)
class RawLink:
    source: int
    target: int
    label: RelationLabel
    origin: str = STATISTICAL
    confidence: float = 1.0


@dataclass(frozen=True)
class AnnotatedDocument:
    """One tokenized document with raw events and temporal links.

    Link endpoints that match no event (e.g. links to time expressions)
    are allowed here and removed by :func:`prune`.
    """

    doc_id: str
    sentences: tuple
    events: tuple = ()
    tlinks: tuple = ()

    def __post_init__(self):
        sentences = tuple(tuple(s) for s in self.sentences)
        object.__setattr__(self, "sentences", sentences)
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "tlinks", tuple(self.tlinks))
        starts = self.sentence_starts()
        seen = set()
        for ev in self.events:
            if not 0 <= ev.sentence_index < len(sentences):
                raise SchemaError(
                    f"{self.doc_id}: event at token {ev.token_index} has "
                    f"sentence_index {ev.sentence_index} out of range"
                )
            lo = starts[ev.sentence_index]
            if not lo <= ev.token_index < lo + len(sentences[ev.sentence_index]):
                raise SchemaError(
                    f"{self.doc_id}: token_index {ev.token_index} is outside "
                    f"sentence {ev.sentence_index}"
                )
            if ev.token_index in seen:
                raise SchemaError(f"{self.doc_id}: duplicate event token_index {ev.token_index}")
            seen.add(ev.token_index)

    def sentence_starts(self) -> list:
        starts, pos = [], 0
        for s in self.sentences:
            starts.append(pos)
            pos += len(s)
        return starts

    def sentence_text(self, i: int) -> str:
        return " ".join(self.sentences[i])

    def text_of(self, sentence_indices: Iterable[int]) -> str:
        return " ".join(self.sentence_text(i) for i in sorted(set(sentence_indices)))

    @classmethod
    def from_record(cls, rec: dict) -> "AnnotatedDocument":
        try:
            events = [
                RawEvent(
                    verb=str(ev["verb"]),
                    sentence_index=int(ev["sentence_index"]),
                    token_index=int(ev["token_index"]),
                    subject=ev.get("subject"),
                    object=ev.get("object"),
                )
                for ev in rec["events"]
            ]
            links = []
            for ln in rec["tlinks"]:
                origin = ln.get("origin", STATISTICAL)
                if origin not in ORIGINS:
                    raise SchemaError(f"unknown link origin {origin!r}")
                confidence = float(ln.get("confidence", 1.0))
                if not 0.0 <= confidence <= 1.0:
                    raise SchemaError(f"confidence {confidence} outside [0, 1]")
                links.append(
                    RawLink(
                        source=int(ln["source"]),
                        target=int(ln["target"]),
                        label=RelationLabel.parse(ln["label"]),
                        origin=origin,
                        confidence=confidence,
                    )
                )
            sentences = rec["sentences"]
            if not isinstance(sentences, list) or not all(isinstance(s, list) for s in sentences):
                raise SchemaError("sentences must be an array of token arrays")
            return cls(str(rec["doc_id"]), sentences, events, links)
        except SchemaError:
            raise
        except KeyError as exc:
            raise SchemaError(f"missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError, AttributeError) as exc:
            raise SchemaError(str(exc)) from None

    def to_record(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "sentences": [list(s) for s in self.sentences],
            "events": [
                {
                    "verb": ev.verb,
                    "sentence_index": ev.sentence_index,
                    "token_index": ev.token_index,
                    "subject": ev.subject,
                    "object": ev.object,
                }
                for ev in self.events
            ],
            "tlinks": [
                {
                    "source": ln.source,
                    "target": ln.target,
                    "label": RelationLabel(ln.label).value,
                    "origin": ln.origin,
                    "confidence": ln.confidence,
                }
                for ln in self.tlinks
            ],
        }


@dataclass(frozen=True)
class PruneConfig:
    banned_verbs: frozenset = DEFAULT_BANNED_VERBS
    min_statistical_confidence: float = 0.50
    drop_vague: bool = True
    require_subject_and_object: bool = True

    def __post_init__(self):
        if not 0.0 <= self.min_statistical_confidence <= 1.0:
            raise ValueError("min_statistical_confidence must lie in [0, 1]")
        object.__setattr__(
            self, "banned_verbs", frozenset(v.lower() for v in self.banned_verbs)
        )

    def to_text(self) -> str:
        cfg = configparser.ConfigParser()
        cfg["prune"] = {
            "min_statistical_confidence": repr(float(self.min_statistical_confidence)),
            "drop_vague": str(self.drop_vague).lower(),
            "require_subject_and_object": str(self.require_subject_and_object).lower(),
            "banned_verbs": "\n" + "\n".join(sorted(self.banned_verbs)),
        }
        buf = io.StringIO()
        cfg.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "PruneConfig":
        cfg = configparser.ConfigParser()
        cfg.read_string(text)
        if not cfg.has_section("prune"):
            return cls()
        sec = cfg["prune"]
        kwargs = {}
        if "banned_verbs" in sec:
            kwargs["banned_verbs"] = frozenset(sec["banned_verbs"].split())
        if "min_statistical_confidence" in sec:
            kwargs["min_statistical_confidence"] = sec.getfloat("min_statistical_confidence")
        for key in ("drop_vague", "require_subject_and_object"):
            if key in sec:
                kwargs[key] = sec.getboolean(key)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "PruneConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def _has_text(span) -> bool:
    return bool(span and str(span).strip())


def prune(doc: AnnotatedDocument, cfg: PruneConfig = PruneConfig()) -> AnnotatedDocument:
    """Drop noisy events and unreliable or unusable links.

    Events go when their verb is banned or (if required) they lack a
    subject or object. Links go when vague, when statistical with
    confidence strictly below the threshold, or when an endpoint is not a
    surviving event (this also removes links to time expressions).
    """
    events = []
    for ev in doc.events:
        if ev.verb.strip().lower() in cfg.banned_verbs:
            continue
        if cfg.require_subject_and_object and not (
            _has_text(ev.subject) and _has_text(ev.object)
        ):
            continue
        events.append(ev)
    alive = {ev.token_index for ev in events}
    links = []
    for ln in doc.tlinks:
        if cfg.drop_vague and ln.label == RelationLabel.VAGUE:
            continue
        if ln.origin == STATISTICAL and ln.confidence < cfg.min_statistical_confidence:
            continue
        if ln.source not in alive or ln.target not in alive or ln.source == ln.target:
            continue
        links.append(ln)
    return replace(doc, events=tuple(events), tlinks=tuple(links))


def augment(doc: AnnotatedDocument) -> list:
    """Turn each raw event into an :class:`Event` with a "subject verb object" phrase."""
    return [
        Event(
            token_index=ev.token_index,
            verb=ev.verb,
            subject=ev.subject or "",
            object=ev.object or "",
            sentence_index=ev.sentence_index,
        )
        for ev in doc.events
    ]


def document_graph(doc: AnnotatedDocument) -> TemporalGraph:
    """Whole-document graph of an already pruned document.

    Events whose phrases coincide are merged into the earliest one, since
    the phrase is the node name once serialized; links are redirected and
    links that become self-loops are dropped.
    """
    events = sorted(augment(doc), key=lambda ev: ev.token_index)
    by_phrase = {}
    alias = {}
    for ev in events:
        keep = by_phrase.setdefault(ev.phrase, ev)
        alias[ev.token_index] = keep
    edges = []
    for ln in doc.tlinks:
        src, tgt = alias.get(ln.source), alias.get(ln.target)
        if src is None or tgt is None or src is tgt:
            continue
        edges.append(TemporalEdge(src, tgt, RelationLabel(ln.label), ln.origin, ln.confidence))
    return TemporalGraph(doc.doc_id, tuple(by_phrase.values()), edges)


@dataclass(frozen=True)
class Task2Pair:
    doc_id: str
    community_id: int
    text: str
    graph: TemporalGraph

    def to_record(self) -> dict:
        from .dot import encode

        return {
            "doc_id": self.doc_id,
            "community_id": self.community_id,
            "text": self.text,
            "dot": encode(self.graph),
        }


def build_task2_pairs(doc: AnnotatedDocument, cfg: PruneConfig = PruneConfig()) -> list:
    """Prune, augment, split into communities and ground each in its sentences.

    Returns ``(text, graph)`` tuples in community order; singleton
    communities are dropped.
    """
    g = document_graph(prune(doc, cfg))
    out = []
    for sub in graph_communities(g):
        text = doc.text_of(ev.sentence_index for ev in sub.events)
        out.append((text, sub))
    return out


@dataclass(frozen=True)
class Task1Example:
    doc_id: str
    context: str
    query_event: str
    relation: RelationLabel
    target_event: str
    context_sentences: tuple = ()
    target_sentence: int = -1

    @property
    def prompt(self) -> str:
        return format_query(self.context, self.query_event, self.relation)

    def to_record(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "prompt": self.prompt,
            "context": self.context,
            "query_event": self.query_event,
            "relation": RelationLabel(self.relation).value,
            "target_event": self.target_event,
        }


def format_query(context: str, query_event: str, relation) -> str:
    return f"In the context of {context}, what happens {RelationLabel(relation).words} {query_event}?"


def context_sentences(n_sentences: int, query_sentence: int, target_sentence: int,
                      include_target_sentence: bool = True) -> tuple:
    """Sentences holding either event plus their immediate neighbours."""
    picked = set()
    for s in (query_sentence, target_sentence):
        picked.update(i for i in (s - 1, s, s + 1) if 0 <= i < n_sentences)
    if not include_target_sentence:
        picked.discard(target_sentence)
    return tuple(sorted(picked))


def build_task1_examples(doc: AnnotatedDocument, cfg: PruneConfig = PruneConfig(),
                         include_target_sentence: bool = True) -> list:
    """One node-generation query per edge of the undivided pruned graph.

    Examples follow the graph's document edge order; queries that share
    a prompt but differ in target are all kept.
    """
    g = document_graph(prune(doc, cfg))
    out = []
    seen = set()
    for e in g.edges:
        key = (e.source.phrase, e.label, e.target.phrase)
        if key in seen:
            continue
        seen.add(key)
        ctx = context_sentences(
            len(doc.sentences), e.source.sentence_index, e.target.sentence_index,
            include_target_sentence,
        )
        out.append(
            Task1Example(
                doc_id=doc.doc_id,
                context=doc.text_of(ctx),
                query_event=e.source.phrase,
                relation=e.label,
                target_event=e.target.phrase,
                context_sentences=ctx,
                target_sentence=e.target.sentence_index,
            )
        )
    return out


@dataclass(frozen=True)
class MaskedSequence:
    """Input and output tokens with a loss mask over their concatenation."""

    input_tokens: tuple
    output_tokens: tuple
    mask: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "input_tokens", tuple(self.input_tokens))
        object.__setattr__(self, "output_tokens", tuple(self.output_tokens))
        object.__setattr__(
            self, "mask", (0,) * len(self.input_tokens) + (1,) * len(self.output_tokens)
        )

    @property
    def tokens(self) -> tuple:
        return self.input_tokens + self.output_tokens


def build_masked_sequence(x: Sequence, y: Sequence) -> MaskedSequence:
    return MaskedSequence(x, y)


def masked_nll(per_position_logprob: Sequence[float], mask: Sequence[int]) -> float:
    """Negative log-likelihood restricted to positions where ``mask`` is 1."""
    if len(per_position_logprob) != len(mask):
        raise ValueError(
            f"{len(per_position_logprob)} log-probabilities for a mask of length {len(mask)}"
        )
    return -math.fsum(lp for lp, m in zip(per_position_logprob, mask) if m)


def masked_loss(batch: Iterable[tuple]) -> float:
    """Sum of :func:`masked_nll` over ``(logprobs, mask)`` pairs."""
    return math.fsum(masked_nll(lp, m) for lp, m in batch)


def task2_sequence(text: str, dot: str) -> MaskedSequence:
    return MaskedSequence(text.split(), dot.split())


def task1_sequence(ex: Task1Example) -> MaskedSequence:
    return MaskedSequence(ex.prompt.split(), ex.target_event.split())


def _doc_key(doc) -> str:
    return doc if isinstance(doc, str) else doc.doc_id


def split_corpus(docs: Sequence, ratios=(0.8, 0.1, 0.1), seed: int = 13) -> tuple:
    """Deterministic document-level train/valid/test split.

    Documents are ranked by a salted SHA-256 of their id, so the split does
    not depend on input order. Each part is returned sorted by id.
    """
    docs = list(docs)
    if not docs:
        raise ValueError("empty corpus")
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be three non-negative numbers summing to 1, got {ratios}")
    ids = [_doc_key(d) for d in docs]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate doc_id in corpus")

    def rank(d):
        return hashlib.sha256(f"{seed}:{_doc_key(d)}".encode("utf-8")).hexdigest()

    ranked = sorted(docs, key=rank)
    n = len(ranked)
    n_train = int(round(ratios[0] * n))
    n_valid = min(int(round(ratios[1] * n)), n - n_train)
    parts = (ranked[:n_train], ranked[n_train:n_train + n_valid], ranked[n_train + n_valid:])
    return tuple(sorted(p, key=_doc_key) for p in parts)


def _truncate2(x: float) -> float:
    return math.floor(x * 100 + 1e-9) / 100


@dataclass(frozen=True)
class ReductionReport:
    relations_before: int
    relations_after: int
    events_before: int
    events_after: int

    @staticmethod
    def _pct(before, after):
        return 100.0 * (before - after) / before if before else 0.0

    @property
    def relation_reduction(self) -> float:
        return self._pct(self.relations_before, self.relations_after)

    @property
    def event_reduction(self) -> float:
        return self._pct(self.events_before, self.events_after)

    def to_record(self) -> dict:
        return {
            "relations_before": self.relations_before,
            "relations_after": self.relations_after,
            "relation_reduction_pct": _truncate2(self.relation_reduction),
            "events_before": self.events_before,
            "events_after": self.events_after,
            "event_reduction_pct": _truncate2(self.event_reduction),
        }

    def format(self) -> str:
        """Plain-text table; percentages are truncated to two decimals."""
        rows = [
            ("#Relations", self.relations_before, self.relations_after, self.relation_reduction),
            ("#Events", self.events_before, self.events_after, self.event_reduction),
        ]
        out = [f"{'':<12}{'Initial':>14}{'Pruned':>14}{'% Reduction':>14}"]
        for name, b, a, pct in rows:
            out.append(f"{name:<12}{b:>14,}{a:>14,}{_truncate2(pct):>14.2f}")
        return "\n".join(out) + "\n"


def corpus_report(before: Iterable[AnnotatedDocument], after: Iterable[AnnotatedDocument]) -> ReductionReport:
    """Relation and event counts before and after pruning."""
    before, after = list(before), list(after)
    return ReductionReport(
        relations_before=sum(len(d.tlinks) for d in before),
        relations_after=sum(len(d.tlinks) for d in after),
        events_before=sum(len(d.events) for d in before),
        events_after=sum(len(d.events) for d in after),
    )


def read_corpus(path) -> list:
    """Read a JSON-lines corpus; raises :class:`SchemaError` naming the bad line."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if not isinstance(rec, dict):
                    raise SchemaError("record is not an object")
                docs.append(AnnotatedDocument.from_record(rec))
            except (json.JSONDecodeError, SchemaError) as exc:
                raise SchemaError(f"line {lineno}: {exc}") from None
    ids = [d.doc_id for d in docs]
    if len(set(ids)) != len(ids):
        raise SchemaError("duplicate doc_id in corpus")
    return docs


def write_jsonl(path, records: Iterable[dict]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            n += 1
    return n


def read_jsonl(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
