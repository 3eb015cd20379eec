# # How far does copying the nodes get you?
#
# The baseline keeps every gold event and links them in text order with
# "before". Node scores are perfect by construction; edge scores show how
# much of the structure a plain chain misses.

from tempgraph import generate_corpus
from tempgraph.cli import baseline_dot
from tempgraph.corpus import Task2Pair, build_task2_pairs
from tempgraph.metrics import evaluate_task2

docs = generate_corpus(300, seed=11)
gold = [
    Task2Pair(d.doc_id, k, text, g).to_record()
    for d in docs
    for k, (text, g) in enumerate(build_task2_pairs(d))
]
pred = [
    {"doc_id": r["doc_id"], "community_id": r["community_id"],
     "text": baseline_dot(r["text"], r["dot"])}
    for r in gold
]

print(evaluate_task2(gold, pred).format_table())

# The gold file against itself is the ceiling.

print(evaluate_task2(gold, gold).format_table())
