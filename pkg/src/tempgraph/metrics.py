"""Scores for generated events and generated graphs.

String metrics compare raw text, structure metrics compare unlabelled
topology and size, semantic metrics compare node phrases and temporal
relations. Nodes of a predicted graph are matched to gold nodes by
normalized phrase.
"""

from __future__ import annotations

import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .algebra import closure, drop_conflicts, edge_set, reduction
from .dot import DotDecodeError, decode
from .graph import TemporalGraph, graph_stats, normalize_phrase

log = logging.getLogger(__name__)

BLEU_EPSILON = 1e-9
ROUGE_BETA = 1.2
EXACT_ISO_NODES = 12
ISO_BUDGET = 200_000


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, reference: str, max_order: int = 4) -> float:
    """Sentence-level BLEU on whitespace tokens.

    Orders for which the candidate has no n-grams are skipped (so short
    identical strings score 1); zero match counts are replaced by
    ``BLEU_EPSILON``. Brevity penalty ``exp(1 - r/c)`` applies when the
    candidate is shorter than the reference.
    """
    cand, ref = candidate.split(), reference.split()
    if not cand or not ref:
        return 0.0
    log_p = []
    for n in range(1, max_order + 1):
        c_grams = _ngrams(cand, n)
        total = sum(c_grams.values())
        if total == 0:
            break
        r_grams = _ngrams(ref, n)
        match = sum(min(k, r_grams[g]) for g, k in c_grams.items())
        log_p.append(math.log(max(match, BLEU_EPSILON) / total))
    c, r = len(cand), len(ref)
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return bp * math.exp(sum(log_p) / len(log_p))


def _lcs(a, b):
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str, beta: float = ROUGE_BETA) -> float:
    cand, ref = candidate.split(), reference.split()
    if not cand or not ref:
        return 0.0
    lcs = _lcs(cand, ref)
    if lcs == 0:
        return 0.0
    p, r = lcs / len(cand), lcs / len(ref)
    return (1 + beta ** 2) * p * r / (r + beta ** 2 * p)


def task1_accuracy(predicted: str, gold) -> int:
    """1 if the prediction equals any of the gold target phrases."""
    if isinstance(gold, str):
        gold = [gold]
    pred = normalize_phrase(predicted)
    return int(any(pred == normalize_phrase(g) for g in gold))


def _f1(p, r):
    return 2 * p * r / (p + r) if p + r else 0.0


def _ratio(hit, denom, other_empty):
    if denom:
        return hit / denom
    return 1.0 if other_empty else 0.0


def node_scores(gold: TemporalGraph, pred: TemporalGraph) -> tuple:
    """Node precision/recall/F1 over normalized phrases."""
    v, v_hat = gold.phrases(), pred.phrases()
    hit = len(v & v_hat)
    p = _ratio(hit, len(v_hat), not v)
    r = _ratio(hit, len(v), not v_hat)
    return p, r, _f1(p, r)


def temporal_awareness(gold, pred) -> tuple:
    """Edge precision/recall/F1 over closed and reduced relation sets.

    Precision checks the reduced prediction against the closed gold set;
    recall checks the reduced gold set against the closed prediction.
    Arguments are graphs or sets of canonical triples. Pairs carrying
    conflicting labels are dropped (with a warning) before scoring.
    """
    gold_e = drop_conflicts(edge_set(gold) if isinstance(gold, TemporalGraph) else gold)
    pred_e = drop_conflicts(edge_set(pred) if isinstance(pred, TemporalGraph) else pred)
    pred_red, gold_red = reduction(pred_e), reduction(gold_e)
    p = _ratio(len(pred_red & closure(gold_e)), len(pred_red), not gold_e)
    r = _ratio(len(closure(pred_e) & gold_red), len(gold_red), not pred_e)
    return p, r, _f1(p, r)


def ged(gold: TemporalGraph, pred: TemporalGraph) -> int:
    """Edit distance with nodes anchored by phrase and edges by canonical triple.

    Each node or edge addition/removal costs 1; removing a node requires
    removing its edges first, which the edge term already counts.
    """
    return len(gold.phrases() ^ pred.phrases()) + len(edge_set(gold) ^ edge_set(pred))


def _topology(g: TemporalGraph):
    index = {ev.token_index: i for i, ev in enumerate(g.events)}
    n = len(index)
    succ = [set() for _ in range(n)]
    pred = [set() for _ in range(n)]
    for e in g.edges:
        s, t = index[e.source.token_index], index[e.target.token_index]
        succ[s].add(t)
        pred[t].add(s)
    return succ, pred


def isomorphism_check(g1: TemporalGraph, g2: TemporalGraph, budget: Optional[int] = None) -> tuple:
    """Unlabelled directed isomorphism by backtracking.

    Parallel edges with different labels count as one arc. Graphs with at
    most ``EXACT_ISO_NODES`` nodes are searched exhaustively; larger ones
    stop after ``budget`` search states (default ``ISO_BUDGET``).

    Returns ``(is_isomorphic, timed_out)``; a timeout reports False.
    """
    s1, p1 = _topology(g1)
    s2, p2 = _topology(g2)
    n = len(s1)
    if n != len(s2) or sum(map(len, s1)) != sum(map(len, s2)):
        return False, False
    deg1 = [(len(s1[i]), len(p1[i])) for i in range(n)]
    deg2 = [(len(s2[i]), len(p2[i])) for i in range(n)]
    if sorted(deg1) != sorted(deg2):
        return False, False
    if n > EXACT_ISO_NODES and budget is None:
        budget = ISO_BUDGET

    # Match nodes connected to already-ordered ones first, busiest first.
    order = []
    placed = set()
    while len(order) < n:
        frontier = [
            i for i in range(n)
            if i not in placed and (s1[i] | p1[i]) & placed
        ] or [i for i in range(n) if i not in placed]
        nxt = max(frontier, key=lambda i: (len((s1[i] | p1[i]) & placed), sum(deg1[i]), -i))
        order.append(nxt)
        placed.add(nxt)

    by_deg = {}
    for j in range(n):
        by_deg.setdefault(deg2[j], []).append(j)
    mapping = {}
    used = set()
    states = 0

    class _Timeout(Exception):
        pass

    def feasible(u, v):
        for u2, v2 in mapping.items():
            if (u2 in s1[u]) != (v2 in s2[v]) or (u2 in p1[u]) != (v2 in p2[v]):
                return False
        return True

    def search(k):
        nonlocal states
        if k == n:
            return True
        states += 1
        if budget is not None and states > budget:
            raise _Timeout
        u = order[k]
        for v in by_deg[deg1[u]]:
            if v in used or not feasible(u, v):
                continue
            mapping[u] = v
            used.add(v)
            if search(k + 1):
                return True
            del mapping[u]
            used.discard(v)
        return False

    try:
        return search(0), False
    except _Timeout:
        return False, True


def isomorphic(gold: TemporalGraph, pred: TemporalGraph) -> int:
    return int(isomorphism_check(gold, pred)[0])


@dataclass
class EvalReport:
    """Per-example scores plus their macro averages."""

    task: int
    examples: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    missing: list = field(default_factory=list)
    unmatched: list = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "task": self.task,
            "aggregate": self.aggregate,
            "missing": self.missing,
            "unmatched": self.unmatched,
            "examples": self.examples,
        }

    def format_table(self) -> str:
        a = self.aggregate
        pct = lambda k: f"{100 * a[k]:.2f}"  # noqa: E731
        lines = [f"examples: {a.get('n_examples', 0)}  missing predictions: {len(self.missing)}"]
        if self.task == 1:
            lines += [
                f"{'BLEU':>8}{'ROUGE':>8}{'ACC':>8}",
                f"{pct('bleu'):>8}{pct('rouge_l'):>8}{pct('accuracy'):>8}",
            ]
            return "\n".join(lines) + "\n"
        lines += [
            "Graph string metrics",
            f"{'BLEU':>8}{'RG':>8}{'DOT%':>8}",
            f"{pct('bleu'):>8}{pct('rouge_l'):>8}{a['dot_percent']:>8.2f}",
            "Graph structure metrics",
            f"{'':<6}{'|V|':>8}{'|E|':>8}{'d(V)':>8}{'GED':>8}{'ISO':>8}",
            f"{'true':<6}{a['gold_V']:>8.2f}{a['gold_E']:>8.2f}{a['gold_dV']:>8.2f}"
            f"{0:>8.2f}{100:>8.2f}",
            f"{'pred':<6}{a['pred_V']:>8.2f}{a['pred_E']:>8.2f}{a['pred_dV']:>8.2f}"
            f"{a['ged']:>8.2f}{pct('iso_rate'):>8}",
            "Graph semantic metrics",
            f"{'v_P':>8}{'v_R':>8}{'v_F1':>8}{'e_P':>8}{'e_R':>8}{'e_F1':>8}",
            "".join(f"{pct(k):>8}" for k in ("v_P", "v_R", "v_F1", "e_P", "e_R", "e_F1")),
        ]
        if a.get("iso_timeouts"):
            lines.append(f"isomorphism search timed out on {a['iso_timeouts']} example(s)")
        return "\n".join(lines) + "\n"


TASK2_SCORES = (
    "bleu", "rouge_l", "dot_valid", "v_P", "v_R", "v_F1", "e_P", "e_R", "e_F1",
    "ged", "iso", "gold_V", "gold_E", "gold_dV", "pred_V", "pred_E", "pred_dV",
)


def score_task2_example(gold_dot: str, pred_text: str) -> dict:
    """All graph metrics for one example; unparseable predictions score as empty graphs."""
    gold = decode(gold_dot)
    try:
        pred = decode(pred_text)
        valid = True
    except DotDecodeError:
        pred = TemporalGraph("")
        valid = False
    v_p, v_r, v_f = node_scores(gold, pred)
    e_p, e_r, e_f = temporal_awareness(gold, pred)
    iso, timed_out = isomorphism_check(gold, pred)
    gv, ge, gd = graph_stats(gold)
    pv, pe, pd = graph_stats(pred)
    return {
        "bleu": bleu(pred_text, gold_dot),
        "rouge_l": rouge_l(pred_text, gold_dot),
        "dot_valid": int(valid),
        "v_P": v_p, "v_R": v_r, "v_F1": v_f,
        "e_P": e_p, "e_R": e_r, "e_F1": e_f,
        "ged": ged(gold, pred),
        "iso": int(iso),
        "iso_timeout": int(timed_out),
        "gold_V": gv, "gold_E": ge, "gold_dV": gd,
        "pred_V": pv, "pred_E": pe, "pred_dV": pd,
    }


def _mean(values):
    values = list(values)
    return math.fsum(values) / len(values) if values else 0.0


def _load(src):
    if isinstance(src, (str, os.PathLike)):
        from .corpus import read_jsonl

        return read_jsonl(src)
    return list(src)


def evaluate_task2(gold, pred) -> EvalReport:
    """Score predicted graph strings against the gold pairs.

    ``gold`` holds ``{doc_id, community_id, text, dot}`` records and
    ``pred`` holds ``{doc_id, community_id, text}`` (or ``dot``, which
    wins when present); either may be a path
    to a JSON-lines file. Gold examples without a prediction are scored
    against an empty string and listed in ``missing``.
    """
    gold, pred = _load(gold), _load(pred)
    preds = {}
    for rec in pred:
        # a gold pairs file used as predictions carries the graph under "dot"
        text = rec["dot"] if "dot" in rec else rec.get("text")
        preds[(str(rec["doc_id"]), int(rec["community_id"]))] = text or ""
    report = EvalReport(task=2)
    keys = set()
    for rec in sorted(gold, key=lambda r: (str(r["doc_id"]), int(r["community_id"]))):
        key = (str(rec["doc_id"]), int(rec["community_id"]))
        keys.add(key)
        if key not in preds:
            report.missing.append({"doc_id": key[0], "community_id": key[1]})
        row = {"doc_id": key[0], "community_id": key[1]}
        row.update(score_task2_example(rec["dot"], preds.get(key, "")))
        report.examples.append(row)
    report.unmatched = [
        {"doc_id": d, "community_id": c} for d, c in sorted(set(preds) - keys)
    ]
    if report.missing:
        log.warning("%d gold example(s) have no prediction", len(report.missing))
    ex = report.examples
    agg = {k: _mean(r[k] for r in ex) for k in TASK2_SCORES}
    agg["dot_percent"] = 100.0 * agg.pop("dot_valid")
    agg["iso_rate"] = agg.pop("iso")
    agg["iso_timeouts"] = sum(r["iso_timeout"] for r in ex)
    agg["n_examples"] = len(ex)
    agg["n_missing"] = len(report.missing)
    report.aggregate = agg
    return report


def evaluate_task1(gold, pred) -> EvalReport:
    """Score generated target events.

    Gold records sharing ``(doc_id, prompt)`` form one query whose answer
    set is all their target events; string metrics take the best match.
    Predictions are ``{doc_id, prompt, text}`` records.
    """
    gold, pred = _load(gold), _load(pred)
    answers = {}
    for rec in gold:
        answers.setdefault((str(rec["doc_id"]), rec["prompt"]), []).append(rec["target_event"])
    preds = {(str(r["doc_id"]), r["prompt"]): r.get("text") or "" for r in pred}
    report = EvalReport(task=1)
    for key in sorted(answers):
        golds = answers[key]
        if key not in preds:
            report.missing.append({"doc_id": key[0], "prompt": key[1]})
        text = normalize_phrase(preds.get(key, ""))
        report.examples.append({
            "doc_id": key[0],
            "prompt": key[1],
            "bleu": max(bleu(text, g) for g in golds),
            "rouge_l": max(rouge_l(text, g) for g in golds),
            "accuracy": task1_accuracy(text, golds),
        })
    report.unmatched = [{"doc_id": d, "prompt": p} for d, p in sorted(set(preds) - set(answers))]
    report.aggregate = {k: _mean(r[k] for r in report.examples) for k in ("bleu", "rouge_l", "accuracy")}
    report.aggregate["n_examples"] = len(report.examples)
    report.aggregate["n_missing"] = len(report.missing)
    return report
