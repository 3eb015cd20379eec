"""Deterministic synthetic annotated corpora.

Each document is a sequence of short episodes. An episode covers one or
two adjacent sentences and holds a few events whose relations come from
random time intervals, so the emitted links are mutually consistent.
Noise is injected at controllable rates: banned verbs, events without a
subject or object, vague links, low-confidence statistical links and
links to time expressions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import DEFAULT_BANNED_VERBS, AnnotatedDocument, RawEvent, RawLink
from .graph import RULE, STATISTICAL, RelationLabel

SUBJECTS = (
    "the police", "the suspect", "two men", "the mayor", "a witness", "the gunman",
    "officials", "the army", "protesters", "the jury", "the driver", "rebels",
    "the court", "a soldier", "the crowd", "investigators", "the guard", "a reporter",
    "the victim", "firefighters", "the pilot", "hijackers", "the bomber", "neighbors",
)
VERBS = (
    "arrested", "attacked", "fired", "clashed", "fled", "charged", "detonated",
    "stormed", "released", "killed", "wounded", "captured", "searched", "blocked",
    "evacuated", "convicted", "shot", "hijacked", "seized", "burned", "questioned",
    "identified", "freed", "surrounded", "bombed", "accused", "rescued", "followed",
)
OBJECTS = (
    "the building", "a car", "the station", "two officers", "the embassy", "the plane",
    "the city", "a bus", "the prisoners", "the crowd", "the bridge", "the market",
    "a warehouse", "the convoy", "the hostages", "the border", "the village", "the weapons",
    "the documents", "the airport", "a truck", "the office", "the camp", "the ship",
)
FILLER = (
    ("officials", "declined", "to", "comment", "."),
    ("the", "area", "remained", "tense", "."),
    ("details", "were", "not", "available", "."),
)
TIMEX = ("on", "monday")
BANNED = tuple(sorted(DEFAULT_BANNED_VERBS))


@dataclass(frozen=True)
class SyntheticConfig:
    min_episodes: int = 1
    max_episodes: int = 3
    min_events: int = 2
    max_events: int = 6
    edge_density: float = 0.8
    bridge_rate: float = 0.1
    banned_rate: float = 0.12
    missing_arg_rate: float = 0.08
    vague_rate: float = 0.1
    low_confidence_rate: float = 0.15
    rule_rate: float = 0.3
    timex_rate: float = 0.1


def interval_relation(a, b) -> RelationLabel:
    """Relation of interval ``a`` to ``b``; partial overlaps are vague."""
    if a[1] < b[0]:
        return RelationLabel.BEFORE
    if b[1] < a[0]:
        return RelationLabel.AFTER
    if a == b:
        return RelationLabel.SIMULTANEOUS
    if a[0] <= b[0] and b[1] <= a[1]:
        return RelationLabel.INCLUDES
    if b[0] <= a[0] and a[1] <= b[1]:
        return RelationLabel.IS_INCLUDED
    return RelationLabel.VAGUE


def _event_tokens(rng, cfg, used):
    for _ in range(50):
        subj, verb, obj = rng.choice(SUBJECTS), rng.choice(VERBS), rng.choice(OBJECTS)
        if (subj, verb, obj) not in used:
            break
    used.add((subj, verb, obj))
    if rng.random() < cfg.banned_rate:
        verb = rng.choice(BANNED)
    subject, object_ = subj, obj
    if rng.random() < cfg.missing_arg_rate:
        if rng.random() < 0.5:
            subject = None
        else:
            object_ = None
    return subject, verb, object_


def generate_document(doc_id: str, rng: random.Random, cfg: SyntheticConfig = SyntheticConfig()) -> AnnotatedDocument:
    sentences, events, links = [], [], []
    pos = 0
    clock = 0
    used = set()
    timex_tokens = []
    episodes = []

    def add_sentence(tokens):
        nonlocal pos
        sentences.append(list(tokens))
        pos += len(tokens)

    for ep in range(rng.randint(cfg.min_episodes, cfg.max_episodes)):
        if ep:
            add_sentence(rng.choice(FILLER))
            add_sentence(rng.choice(FILLER))
        n_events = rng.randint(cfg.min_events, cfg.max_events)
        n_sent = 1 if n_events <= 2 else rng.randint(1, 2)
        split = sorted(rng.sample(range(1, n_events), n_sent - 1)) if n_sent > 1 else []
        bounds = [0] + split + [n_events]
        members = []
        for s in range(n_sent):
            tokens = []
            sent_events = []
            if rng.random() < cfg.timex_rate:
                timex_tokens.append(pos + len(tokens) + 1)
                tokens.extend(TIMEX)
                tokens.append(",")
            for k in range(bounds[s], bounds[s + 1]):
                subject, verb, object_ = _event_tokens(rng, cfg, used)
                if k > bounds[s]:
                    tokens.append("and")
                if subject:
                    tokens.extend(subject.split())
                token_index = pos + len(tokens)
                tokens.append(verb)
                if object_:
                    tokens.extend(object_.split())
                if rng.random() < 0.2 and members:
                    span = members[rng.randrange(len(members))][1]
                else:
                    start = clock + rng.randint(-3, 4)
                    span = (start, start + rng.choice((0, 1, 1, 2, 6)))
                clock += rng.randint(1, 3)
                sent_events.append(
                    RawEvent(verb, len(sentences), token_index, subject, object_)
                )
                members.append((token_index, span))
            tokens.append(".")
            events.extend(sent_events)
            add_sentence(tokens)
        episodes.append(members)
        clock += 10

    def add_link(a, b, label):
        if rng.random() < cfg.vague_rate:
            label = RelationLabel.VAGUE
        if rng.random() < cfg.rule_rate:
            links.append(RawLink(a, b, label, RULE, round(rng.uniform(0.05, 1.0), 2)))
        elif rng.random() < cfg.low_confidence_rate:
            links.append(RawLink(a, b, label, STATISTICAL, round(rng.uniform(0.0, 0.49), 2)))
        else:
            links.append(RawLink(a, b, label, STATISTICAL, round(rng.uniform(0.5, 1.0), 2)))

    for members in episodes:
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                if rng.random() < cfg.edge_density:
                    (ta, sa), (tb, sb) = members[i], members[j]
                    add_link(ta, tb, interval_relation(sa, sb))
    for e1, e2 in zip(episodes, episodes[1:]):
        if rng.random() < cfg.bridge_rate:
            (ta, sa), (tb, sb) = rng.choice(e1), rng.choice(e2)
            add_link(ta, tb, interval_relation(sa, sb))
    all_events = [t for members in episodes for t, _ in members]
    for t in timex_tokens:
        links.append(RawLink(rng.choice(all_events), t, RelationLabel.INCLUDES, RULE, 1.0))

    return AnnotatedDocument(doc_id, sentences, events, links)


def generate_corpus(n_docs: int, seed: int = 0, cfg: SyntheticConfig = SyntheticConfig()) -> list:
    """``n_docs`` documents with ids ``doc00000``...; identical for identical seeds."""
    rng = random.Random(seed)
    return [generate_document(f"doc{i:05d}", rng, cfg) for i in range(n_docs)]
