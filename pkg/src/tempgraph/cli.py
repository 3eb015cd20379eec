"""Command-line entry point.

Exit codes: 0 success, 1 bad input (schema, parse, empty corpus),
2 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .communities import graph_communities
from .corpus import (
    PruneConfig,
    SchemaError,
    Task2Pair,
    build_task1_examples,
    build_task2_pairs,
    corpus_report,
    prune,
    read_corpus,
    read_jsonl,
    split_corpus,
    task2_sequence,
    write_jsonl,
)
from .dot import DotDecodeError, decode, encode
from .graph import Event, RelationLabel, TemporalEdge, TemporalGraph, graph_from_record, graph_stats, graph_to_record
from .metrics import evaluate_task1, evaluate_task2
from .synthetic import generate_corpus

EXIT_OK, EXIT_INPUT, EXIT_IO = 0, 1, 2
SPLITS = ("train", "valid", "test")


class InputError(Exception):
    pass


def _err(msg):
    print(f"tempgraph: {msg}", file=sys.stderr)


def _json_dump(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _load_config(path):
    if path is None:
        return PruneConfig()
    try:
        return PruneConfig.from_file(path)
    except (ValueError, KeyError) as exc:
        raise InputError(f"{path}: bad prune config: {exc}") from None


def process_document(doc, cfg):
    """Everything ``build`` needs from one document (pure, picklable)."""
    pruned = prune(doc, cfg)
    pairs = [
        Task2Pair(doc.doc_id, k, text, sub).to_record()
        for k, (text, sub) in enumerate(build_task2_pairs(doc, cfg))
    ]
    task1 = [ex.to_record() for ex in build_task1_examples(doc, cfg, True)]
    task1_noctx = [ex.to_record() for ex in build_task1_examples(doc, cfg, False)]
    return {
        "doc_id": doc.doc_id,
        "events": (len(doc.events), len(pruned.events)),
        "relations": (len(doc.tlinks), len(pruned.tlinks)),
        "tokens": sum(len(s) for s in doc.sentences),
        "pairs": pairs,
        "task1": task1,
        "task1_noctx": task1_noctx,
    }


def _process_all(docs, cfg, jobs):
    if jobs <= 1 or len(docs) < 2:
        return [process_document(d, cfg) for d in docs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        chunk = max(1, len(docs) // (4 * jobs))
        return list(pool.map(process_document, docs, [cfg] * len(docs), chunksize=chunk))


def _pair_stats(pairs):
    stats = [graph_stats(decode(p["dot"])) for p in pairs]
    n = len(stats)
    return {
        "graphs": n,
        "mean_V": sum(s[0] for s in stats) / n if n else 0.0,
        "mean_E": sum(s[1] for s in stats) / n if n else 0.0,
        "mean_dV": sum(s[2] for s in stats) / n if n else 0.0,
    }


def cmd_build(args):
    cfg = _load_config(args.config)
    docs = read_corpus(args.corpus)
    if not docs:
        raise InputError("empty corpus")
    docs.sort(key=lambda d: d.doc_id)
    results = _process_all(docs, cfg, args.jobs)
    train, valid, test = split_corpus([d.doc_id for d in docs], tuple(args.ratios), args.seed)
    split_of = {d: name for name, ids in zip(SPLITS, (train, valid, test)) for d in ids}

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    counts = {"task1": {}, "task1_noctx": {}, "task2": {}}
    for name in SPLITS:
        part = [r for r in results if split_of[r["doc_id"]] == name]
        counts["task2"][name] = write_jsonl(out / f"task2_{name}.jsonl", (p for r in part for p in r["pairs"]))
        counts["task1"][name] = write_jsonl(out / f"task1_{name}.jsonl", (e for r in part for e in r["task1"]))
        counts["task1_noctx"][name] = write_jsonl(
            out / f"task1_noctx_{name}.jsonl", (e for r in part for e in r["task1_noctx"])
        )
        if args.masks:
            write_jsonl(out / f"task2_masks_{name}.jsonl", (
                {"doc_id": p["doc_id"], "community_id": p["community_id"],
                 "mask": list(task2_sequence(p["text"], p["dot"]).mask)}
                for r in part for p in r["pairs"]
            ))
    _json_dump(out / "splits.json", {"seed": args.seed, "ratios": list(args.ratios),
                                     "train": train, "valid": valid, "test": test})
    _write_text(out / "prune.cfg", cfg.to_text())

    reduction = _reduction_from_results(results)
    all_pairs = [p for r in results for p in r["pairs"]]
    stats = {
        "documents": len(docs),
        "pruning": reduction.to_record(),
        "examples": counts,
        "task2_graphs": _pair_stats(all_pairs),
        "mean_tokens_per_document": sum(r["tokens"] for r in results) / len(results),
    }
    _json_dump(out / "stats.json", stats)
    _write_text(out / "stats.txt", _stats_text(stats, reduction))
    print(_stats_text(stats, reduction), end="")
    return EXIT_OK


def _reduction_from_results(results):
    from .corpus import ReductionReport

    return ReductionReport(
        relations_before=sum(r["relations"][0] for r in results),
        relations_after=sum(r["relations"][1] for r in results),
        events_before=sum(r["events"][0] for r in results),
        events_after=sum(r["events"][1] for r in results),
    )


def _stats_text(stats, reduction):
    lines = [f"documents: {stats['documents']}", "", "Pruning", reduction.format().rstrip(), "",
             "Examples per split", f"{'Task':<14}" + "".join(f"{s:>10}" for s in SPLITS)]
    for task in ("task1", "task1_noctx", "task2"):
        lines.append(f"{task:<14}" + "".join(f"{stats['examples'][task][s]:>10}" for s in SPLITS))
    g = stats["task2_graphs"]
    lines += ["", f"task2 graphs: {g['graphs']}  mean |V| {g['mean_V']:.2f}  "
              f"mean |E| {g['mean_E']:.2f}  mean d(V) {g['mean_dV']:.2f}"]
    return "\n".join(lines) + "\n"


def baseline_dot(text: str, gold_dot: str) -> str:
    """Gold events in document order, chained with ``before``.

    Document order is the position of each phrase in ``text``; phrases not
    found keep their order of appearance in the gold DOT, after the others.
    """
    gold = decode(gold_dot)
    events = list(gold.events)
    lowered = text.lower()

    def position(ev):
        at = lowered.find(ev.phrase)
        return (0, at, ev.token_index) if at >= 0 else (1, 0, ev.token_index)

    events.sort(key=position)
    events = [Event.from_phrase(ev.phrase, i) for i, ev in enumerate(events)]
    edges = [TemporalEdge(a, b, RelationLabel.BEFORE) for a, b in zip(events, events[1:])]
    return encode(TemporalGraph(gold.doc_id, events, edges))


def cmd_baseline(args):
    pairs = read_jsonl(args.pairs)
    preds = []
    for p in pairs:
        try:
            dot = baseline_dot(p["text"], p["dot"])
        except DotDecodeError as exc:
            raise InputError(f"{p.get('doc_id')}/{p.get('community_id')}: {exc}") from None
        preds.append({"doc_id": p["doc_id"], "community_id": p["community_id"], "text": dot})
    write_jsonl(args.out, preds)
    return EXIT_OK


def cmd_eval(args):
    gold, pred = read_jsonl(args.gold), read_jsonl(args.pred)
    try:
        report = evaluate_task1(gold, pred) if args.task == 1 else evaluate_task2(gold, pred)
    except (KeyError, DotDecodeError) as exc:
        raise InputError(f"bad gold or prediction record: {exc}") from None
    for rec in report.missing:
        _err(f"no prediction for {json.dumps(rec, ensure_ascii=False)}")
    for rec in report.unmatched:
        _err(f"prediction without gold example: {json.dumps(rec, ensure_ascii=False)}")
    if args.out:
        _json_dump(args.out, report.to_record())
    print(report.format_table(), end="")
    return EXIT_OK


def _read_text(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _decode_file(path):
    try:
        return decode(_read_text(path))
    except DotDecodeError as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_communities(args):
    g = _decode_file(args.dot)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    subs = graph_communities(g)
    for k, sub in enumerate(subs):
        _write_text(out / f"community_{k}.dot", encode(sub))
    print(f"{len(subs)} communit{'y' if len(subs) == 1 else 'ies'} written to {out}")
    return EXIT_OK


def _emit(text, out):
    if out:
        _write_text(out, text)
    else:
        sys.stdout.write(text)


def cmd_encode(args):
    try:
        g = graph_from_record(json.loads(_read_text(args.graph)))
        text = encode(g)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{args.graph}: {exc}") from None
    _emit(text, args.out)
    return EXIT_OK


def cmd_decode(args):
    g = _decode_file(args.dot)
    _emit(json.dumps(graph_to_record(g), indent=2, ensure_ascii=False) + "\n", args.out)
    return EXIT_OK


def cmd_stats(args):
    records = read_jsonl(args.input)
    if records and "dot" in records[0]:
        try:
            s = _pair_stats(records)
        except DotDecodeError as exc:
            raise InputError(str(exc)) from None
        text = (f"graphs: {s['graphs']}\nmean |V|: {s['mean_V']:.2f}\n"
                f"mean |E|: {s['mean_E']:.2f}\nmean d(V): {s['mean_dV']:.2f}\n")
    else:
        cfg = _load_config(args.config)
        docs = read_corpus(args.input)
        if not docs:
            raise InputError("empty corpus")
        text = corpus_report(docs, [prune(d, cfg) for d in docs]).format()
    _emit(text, args.out)
    return EXIT_OK


def cmd_synth(args):
    docs = generate_corpus(args.docs, seed=args.seed)
    write_jsonl(args.out, (d.to_record() for d in docs))
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="tempgraph", description="Temporal event graph datasets and metrics.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build Task 1 / Task 2 datasets from an annotated corpus")
    p.add_argument("corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="prune config file (defaults built in)")
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--ratios", type=float, nargs=3, default=(0.8, 0.1, 0.1),
                   metavar=("TRAIN", "VALID", "TEST"))
    p.add_argument("--masks", action="store_true", help="also write Task 2 loss-mask sidecars")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("baseline", help="chain gold events with 'before' as a trivial prediction")
    p.add_argument("pairs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("eval", help="score predictions against gold examples")
    p.add_argument("gold")
    p.add_argument("pred")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--task", type=int, choices=(1, 2), default=2)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("communities", help="split one DOT graph into event communities")
    p.add_argument("dot")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_communities)

    p = sub.add_parser("encode", help="JSON graph record to DOT")
    p.add_argument("graph")
    p.add_argument("--out")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="DOT to JSON graph record")
    p.add_argument("dot")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("stats", help="pruning table for a corpus, or graph sizes for a pairs file")
    p.add_argument("input")
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="write a deterministic synthetic annotated corpus")
    p.add_argument("--docs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, SchemaError, json.JSONDecodeError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
