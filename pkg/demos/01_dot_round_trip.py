# # Graphs as DOT text
#
# A temporal graph is a set of events (short "subject verb object" phrases)
# joined by labelled relations. Generation models read and write it as DOT.

from tempgraph import Event, TemporalEdge, TemporalGraph, decode, encode, is_valid_dot

clash = Event.from_phrase("crowd gathered downtown", 4)
arrest = Event.from_phrase("police arrested two men", 11)
charge = Event.from_phrase("prosecutors charged the men", 20)
quiet = Event.from_phrase("the mayor stayed silent", 31)

g = TemporalGraph(
    "demo",
    [clash, arrest, charge, quiet],
    [TemporalEdge(clash, arrest, "before"), TemporalEdge(charge, arrest, "after")],
)

text = encode(g)
print(text)

# Isolated events are written as bare node statements, ahead of the edges.
# Decoding gives back the same phrases and relations.

back = decode(text)
print(back.phrases() == g.phrases())
print([(e.source.phrase, e.label.value, e.target.phrase) for e in back.edges])

# The decoder is lenient about layout, which helps when scoring model output.

print(is_valid_dot("digraph { a -> b [label=before] }"))
print(is_valid_dot('digraph g { "a" -> "b" }'))
