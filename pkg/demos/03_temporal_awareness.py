# # Scoring relations up to temporal entailment
#
# Two edge sets can say the same thing in different words: a<b and b<c
# already imply a<c. Edge precision and recall therefore compare a reduced
# set on one side with a closed set on the other.

from tempgraph.algebra import closure, reduction
from tempgraph.metrics import temporal_awareness

gold = {("a", "b", "before"), ("b", "c", "before")}
pred = {("a", "b", "before"), ("a", "c", "before")}

print(sorted((s, t, r.value) for s, t, r in closure(gold)))
print(sorted((s, t, r.value) for s, t, r in reduction(closure(gold))))

# Every predicted edge follows from the gold graph, so precision is perfect.
# The prediction never commits to b<c, so half of the gold core is missed.

p, r, f = temporal_awareness(gold, pred)
print(f"e_P={p:.4f} e_R={r:.4f} e_F1={f:.4f}")

# Containment chains compose too; "includes then before" stays open.

print(sorted((s, t, r.value) for s, t, r in closure({("x", "y", "includes"), ("y", "z", "includes")})))
print(sorted((s, t, r.value) for s, t, r in closure({("x", "y", "includes"), ("y", "z", "before")})))
