# # From annotated documents to training pairs
#
# A synthetic corpus stands in for extractor output. It carries the usual
# noise: banned verbs, vague links, low-confidence links and events with a
# missing argument.

from tempgraph import generate_corpus
from tempgraph.corpus import (
    build_task1_examples,
    build_task2_pairs,
    corpus_report,
    prune,
    split_corpus,
    task2_sequence,
)
from tempgraph.dot import encode

docs = generate_corpus(200, seed=7)
print(corpus_report(docs, [prune(d) for d in docs]).format())

doc = next(d for d in docs if build_task2_pairs(d))
print(" ".join(" ".join(s) for s in doc.sentences))

# Graph generation: one (text, graph) pair per event community.

for text, graph in build_task2_pairs(doc):
    print(text)
    print(encode(graph))

# Event generation: one query per edge. The second form drops the sentence
# that mentions the answer.

for with_target in (True, False):
    ex = build_task1_examples(doc, include_target_sentence=with_target)[0]
    print(ex.prompt, "->", ex.target_event)

# Loss only covers the graph tokens.

text, graph = build_task2_pairs(doc)[0]
seq = task2_sequence(text, encode(graph))
print(len(seq.tokens), "tokens,", sum(seq.mask), "in the loss")

train, valid, test = split_corpus([d.doc_id for d in docs])
print(len(train), len(valid), len(test))
