"""End-to-end acceptance checks, one test per criterion.

The terminal summary (see conftest) prints one PASS/FAIL line per test.
"""

import itertools
import json
import random
import time

import pytest

import oracles
from tempgraph.algebra import closure, reduction
from tempgraph.cli import baseline_dot, main
from tempgraph.communities import UndirectedAdjacency, detect_communities, modularity
from tempgraph.corpus import (
    DEFAULT_BANNED_VERBS,
    build_masked_sequence,
    build_task1_examples,
    prune,
    read_corpus,
    read_jsonl,
    task1_sequence,
    task2_sequence,
)
from tempgraph.dot import decode, encode, is_valid_dot
from tempgraph.graph import Event, RelationLabel, TemporalEdge, TemporalGraph
from tempgraph.metrics import evaluate_task2, ged, isomorphic, temporal_awareness

LABELS = ["before", "after", "includes", "is_included", "simultaneous"]
WORDS = "police protesters clashed fired arrested shots the minister resigned court ruled".split()


def _norm(s):
    return " ".join(s.lower().split())


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance")
    assert main(["synth", "--docs", "1000", "--seed", "2024", "--out", str(root / "corpus.jsonl")]) == 0
    t0 = time.perf_counter()
    assert main(["build", str(root / "corpus.jsonl"), "--out", str(root / "ds"), "--masks"]) == 0
    root.joinpath("build_seconds").write_text(repr(time.perf_counter() - t0))
    return root


def _all_pairs(ds):
    return [r for s in ("train", "valid", "test") for r in read_jsonl(ds / f"task2_{s}.jsonl")]


# 1 -----------------------------------------------------------------------

def _random_graph(rng):
    n = rng.randint(0, 20)
    phrases = set()
    while len(phrases) < n:
        words = rng.sample(WORDS, rng.randint(1, 4))
        if rng.random() < 0.05:
            words.append('"quoted"')
        phrases.add(" ".join(words))
    events = [Event.from_phrase(p, i) for i, p in enumerate(sorted(phrases, key=lambda _: rng.random()))]
    edges = []
    if n >= 2:
        for _ in range(rng.randint(0, 3 * n)):
            a, b = rng.sample(events, 2)
            edges.append(TemporalEdge(a, b, rng.choice(LABELS)))
    return TemporalGraph("g", events, edges)


def test_criterion_1_codec_round_trip():
    rng = random.Random(1)
    graphs = [_random_graph(rng) for _ in range(10_000)]
    t0 = time.perf_counter()
    valid = 0
    for g in graphs:
        text = encode(g)
        back = decode(text)
        assert back.phrases() == g.phrases()
        assert {(e.source.phrase, e.target.phrase, e.label) for e in back.edges} == {
            (e.source.phrase, e.target.phrase, e.label) for e in g.edges}
        valid += is_valid_dot(text)
    elapsed = time.perf_counter() - t0
    assert valid == len(graphs)
    assert elapsed < 10, f"round trip took {elapsed:.1f}s"


# 2 -----------------------------------------------------------------------

def test_criterion_2_identity_calibration(corpus_dir):
    gold = corpus_dir / "ds" / "task2_test.jsonl"
    agg = evaluate_task2(gold, gold).aggregate
    assert agg["n_examples"] > 0
    for key in ("bleu", "rouge_l", "v_P", "v_R", "v_F1", "e_P", "e_R", "e_F1", "iso_rate"):
        assert agg[key] == pytest.approx(1.0, abs=1e-9), key
    assert agg["dot_percent"] == 100
    assert agg["ged"] == 0
    assert agg["iso_timeouts"] == 0


# 3 -----------------------------------------------------------------------

def _family():
    def clique(ns):
        return list(itertools.combinations(ns, 2))

    out = []
    for a in range(2, 7):
        for b in range(2, 9 - a):
            left, right = list(range(a)), list(range(a, a + b))
            out.append((a + b, clique(left) + clique(right)))
            out.append((a + b, clique(left) + clique(right) + [(a - 1, a)]))
    for n in range(2, 9):
        out.append((n, [(i, i + 1) for i in range(n - 1)]))
        out.append((n, [(0, i) for i in range(1, n)]))
    return out


def test_criterion_3_modularity_oracle():
    checked = 0
    for n, edges in _family():
        nodes = list(range(n))
        adj = UndirectedAdjacency.from_edges(nodes, edges)
        for blocks in oracles.set_partitions(nodes):
            part = {u: k for k, b in enumerate(blocks) for u in b}
            assert abs(modularity(adj, part) - oracles.brute_modularity(nodes, edges, part)) <= 1e-9
            checked += 1
    assert checked > 10_000

    rng = random.Random(3)
    for _ in range(1000):
        n = rng.randint(2, 30)
        pairs = [p for p in itertools.combinations(range(n), 2) if rng.random() < rng.random()]
        if not pairs:
            pairs = [(0, 1)]
        adj = UndirectedAdjacency.from_edges(range(n), pairs)
        assert modularity(adj, {u: 0 for u in range(n)}) == 0

    adj = UndirectedAdjacency.from_edges(range(6), [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    part = detect_communities(adj)
    assert modularity(adj, part) == 0.5
    assert part == {0: 0, 1: 0, 2: 0, 3: 1, 4: 1, 5: 1}


# 4 -----------------------------------------------------------------------

def _plain(triples):
    return {(s, t, RelationLabel(r).value) for s, t, r in triples}


def test_criterion_4_temporal_algebra():
    rng = random.Random(4)
    for _ in range(10_000):
        edges = oracles.random_consistent_set(rng, max_nodes=6)
        c = closure(edges)
        assert _plain(c) == oracles.naive_closure(edges)
        assert closure(c) == c
        r = reduction(edges)
        assert _plain(closure(r)) == _plain(c)

    gold = {("a", "b", "before"), ("b", "c", "before")}
    pred = {("a", "b", "before"), ("a", "c", "before")}
    p, r, f = temporal_awareness(gold, pred)
    assert abs(p - 1.0) <= 1e-9 and abs(r - 0.5) <= 1e-9 and abs(f - 2 / 3) <= 1e-9


# 5 -----------------------------------------------------------------------

def _recount(docs):
    """Surviving events and links per document, computed from raw records."""
    rel_b = rel_a = ev_b = ev_a = 0
    survivors = {}
    for d in docs:
        keep = {ev.token_index: ev for ev in d.events
                if ev.verb.strip().lower() not in DEFAULT_BANNED_VERBS
                and (ev.subject or "").strip() and (ev.object or "").strip()}
        links = [ln for ln in d.tlinks
                 if RelationLabel(ln.label).value != "vague"
                 and (ln.origin == "rule" or ln.confidence >= 0.5)
                 and ln.source in keep and ln.target in keep and ln.source != ln.target]
        rel_b += len(d.tlinks)
        rel_a += len(links)
        ev_b += len(d.events)
        ev_a += len(keep)
        survivors[d.doc_id] = (keep, links)
    return (rel_b, rel_a, ev_b, ev_a), survivors


def test_criterion_5_pruning_contract(corpus_dir):
    docs = read_corpus(corpus_dir / "corpus.jsonl")
    raw = [ln for d in docs for ln in d.tlinks]
    # the corpus really does carry the noise being pruned
    assert any(ev.verb.lower() in DEFAULT_BANNED_VERBS for d in docs for ev in d.events)
    assert any(RelationLabel(ln.label).value == "vague" for ln in raw)
    assert any(ln.origin == "statistical" and ln.confidence < 0.5 for ln in raw)
    assert any(not ev.subject or not ev.object for d in docs for ev in d.events)

    counts, survivors = _recount(docs)
    phrase = {}
    for doc_id, (keep, links) in survivors.items():
        phrase[doc_id] = {_norm(f"{ev.subject} {ev.verb} {ev.object}") for ev in keep.values()}

    by_doc = {d.doc_id: d for d in docs}
    pairs = _all_pairs(corpus_dir / "ds")
    assert pairs
    for rec in pairs:
        g = decode(rec["dot"])
        d = by_doc[rec["doc_id"]]
        keep, links = survivors[d.doc_id]
        allowed = {}
        for ln in links:
            s = _norm(f"{keep[ln.source].subject} {keep[ln.source].verb} {keep[ln.source].object}")
            t = _norm(f"{keep[ln.target].subject} {keep[ln.target].verb} {keep[ln.target].object}")
            lab = RelationLabel(ln.label)
            allowed.setdefault((s, t), set()).add(lab)
            allowed.setdefault((t, s), set()).add(lab.inverse)
        for ev in g.events:
            assert ev.phrase in phrase[d.doc_id]
            words = ev.phrase.split()
            assert len(words) >= 3
        for e in g.edges:
            assert e.label.value != "vague"
            assert e.label in allowed.get((e.source.phrase, e.target.phrase), set())

    stats = json.loads((corpus_dir / "ds" / "stats.json").read_text())["pruning"]
    rel_b, rel_a, ev_b, ev_a = counts
    assert (stats["relations_before"], stats["relations_after"]) == (rel_b, rel_a)
    assert (stats["events_before"], stats["events_after"]) == (ev_b, ev_a)
    assert stats["relation_reduction_pct"] == int(10_000 * (rel_b - rel_a) / rel_b) / 100
    assert stats["event_reduction_pct"] == int(10_000 * (ev_b - ev_a) / ev_b) / 100

    seconds = float((corpus_dir / "build_seconds").read_text())
    assert seconds < 60, f"build took {seconds:.1f}s"


# 6 -----------------------------------------------------------------------

def _labelled_graph(rng, pool, max_nodes=5, max_edges=4):
    names = rng.sample(pool, rng.randint(0, max_nodes))
    events = [Event.from_phrase(p, i) for i, p in enumerate(names)]
    edges = []
    if len(events) >= 2:
        for _ in range(rng.randint(0, max_edges)):
            a, b = rng.sample(events, 2)
            edges.append(TemporalEdge(a, b, rng.choice(LABELS)))
    return TemporalGraph("g", events, edges)


def _canon_triples(g):
    return {oracles.canon(e.source.phrase, e.target.phrase, e.label) for e in g.edges}


def _digraph(rng, n, p):
    events = [Event.from_phrase(f"v{i}", i) for i in range(n)]
    edges = [TemporalEdge(events[i], events[j], "before")
             for i in range(n) for j in range(n) if i != j and rng.random() < p]
    return TemporalGraph("g", events, edges)


def _relabel(g, rng):
    perm = list(range(len(g.events)))
    rng.shuffle(perm)
    events = [Event.from_phrase(f"w{perm[i]}", perm[i]) for i in range(len(g.events))]
    index = {ev.token_index: i for i, ev in enumerate(g.events)}
    edges = [TemporalEdge(events[index[e.source.token_index]], events[index[e.target.token_index]],
                          rng.choice(LABELS)) for e in g.edges]
    return TemporalGraph("h", events, edges)


def _arcs(g):
    return {(e.source.phrase, e.target.phrase) for e in g.edges}


def test_criterion_6_ged_and_iso_oracles():
    rng = random.Random(6)
    pool = ["a", "b", "c", "d", "e", "f"]
    for _ in range(500):
        g1, g2 = _labelled_graph(rng, pool), _labelled_graph(rng, pool)
        want = oracles.edit_search(g1.phrases(), _canon_triples(g1), g2.phrases(), _canon_triples(g2))
        assert ged(g1, g2) == want

    for _ in range(500):
        g = _digraph(rng, rng.randint(1, 12), rng.uniform(0.1, 0.6))
        assert isomorphic(g, _relabel(g, rng)) == 1

    positives = 0
    for _ in range(500):
        n = rng.randint(1, 6)
        a = _digraph(rng, n, 0.4)
        b = _relabel(a, rng) if rng.random() < 0.3 else _digraph(rng, n, 0.4)
        if rng.random() < 0.5 and b.edges:
            # move one arc so degree sequences often still agree
            kept = list(b.edges)[1:]
            free = [(s, t) for s in b.events for t in b.events
                    if s != t and (s.phrase, t.phrase) not in _arcs(b)]
            if free:
                s, t = rng.choice(free)
                kept.append(TemporalEdge(s, t, "before"))
            b = TemporalGraph("h", b.events, kept)
        want = oracles.permutation_isomorphic(
            [ev.phrase for ev in a.events], _arcs(a), [ev.phrase for ev in b.events], _arcs(b))
        got = isomorphic(a, b)
        assert got == int(want)
        positives += got
    assert 0 < positives < 500


# 7 -----------------------------------------------------------------------

def _context_rule(n, qs, ts, with_target):
    picked = {i for s in (qs, ts) for i in (s - 1, s, s + 1) if 0 <= i < n}
    if not with_target:
        picked -= {ts}
    return sorted(picked)


def test_criterion_7_task1_shape(corpus_dir):
    docs = read_corpus(corpus_dir / "corpus.jsonl")
    n_examples = 0
    for d in docs:
        pruned = prune(d)
        # sentence of each phrase: its earliest surviving event
        sentence_of = {}
        for ev in sorted(pruned.events, key=lambda e: e.token_index):
            sentence_of.setdefault(_norm(f"{ev.subject} {ev.verb} {ev.object}"), ev.sentence_index)
        for with_target in (True, False):
            for ex in build_task1_examples(d, include_target_sentence=with_target):
                qs, ts = sentence_of[ex.query_event], sentence_of[ex.target_event]
                want = _context_rule(len(d.sentences), qs, ts, with_target)
                assert ex.context == " ".join(" ".join(d.sentences[i]) for i in want)
                assert ex.prompt == (f"In the context of {ex.context}, what happens "
                                     f"{RelationLabel(ex.relation).value.replace('_', ' ')} "
                                     f"{ex.query_event}?")
                if not with_target:
                    assert ts not in ex.context_sentences
                seq = task1_sequence(ex)
                assert sum(seq.mask) == len(ex.target_event.split())
                n_examples += 1
    assert n_examples > 1000

    ds = corpus_dir / "ds"
    masks = {(r["doc_id"], r["community_id"]): r["mask"]
             for s in ("train", "valid", "test") for r in read_jsonl(ds / f"task2_masks_{s}.jsonl")}
    for rec in _all_pairs(ds):
        y = rec["dot"].split()
        mask = masks[(rec["doc_id"], rec["community_id"])]
        assert sum(mask) == len(y)
        assert mask == [0] * len(rec["text"].split()) + [1] * len(y)
        assert list(task2_sequence(rec["text"], rec["dot"]).mask) == mask
    assert sum(build_masked_sequence(["a"] * 5, ["b"] * 3).mask) == 3


# 8 -----------------------------------------------------------------------

def _is_before_chain(g):
    return all(e.label.value == "before" for e in g.edges) and len(g.edges) == len(g.events) - 1


def test_criterion_8_baseline_sanity(corpus_dir):
    gold = _all_pairs(corpus_dir / "ds")
    assert any(not _is_before_chain(decode(r["dot"])) for r in gold)
    pred = [{"doc_id": r["doc_id"], "community_id": r["community_id"],
             "text": baseline_dot(r["text"], r["dot"])} for r in gold]
    agg = evaluate_task2(gold, pred).aggregate
    assert agg["dot_percent"] == 100
    assert agg["v_F1"] == pytest.approx(1.0, abs=1e-12)
    assert 0 < agg["e_F1"] < 1
    print(f"baseline e_F1 = {agg['e_F1']:.4f}")
    gold_nodes = {(r["doc_id"], r["community_id"]): decode(r["dot"]).phrases() for r in gold}
    for r in pred:
        assert decode(r["text"]).phrases() == gold_nodes[(r["doc_id"], r["community_id"])]
