# # Splitting a document graph into event communities
#
# Long documents produce large graphs. Greedy modularity merging breaks them
# into tightly linked groups, each small enough to be one training target.

from tempgraph import Event, TemporalEdge, TemporalGraph, encode, graph_communities
from tempgraph.communities import UndirectedAdjacency, detect_communities, modularity

phrases = [
    "storm hit coast", "residents fled homes", "power failed citywide",
    "council met tuesday", "council approved budget", "mayor signed budget",
    "reporter wrote story",
]
ev = [Event.from_phrase(p, 10 * i) for i, p in enumerate(phrases)]
edges = [
    TemporalEdge(ev[0], ev[1], "before"),
    TemporalEdge(ev[0], ev[2], "before"),
    TemporalEdge(ev[1], ev[2], "simultaneous"),
    TemporalEdge(ev[3], ev[4], "includes"),
    TemporalEdge(ev[4], ev[5], "before"),
    TemporalEdge(ev[3], ev[5], "before"),
    TemporalEdge(ev[2], ev[3], "before"),
]
g = TemporalGraph("news", ev, edges)

adj = UndirectedAdjacency.from_graph(g)
part = detect_communities(adj)
print(part)
print("Q =", round(modularity(adj, part), 4))
print("Q with everything together =", modularity(adj, {t: 0 for t in adj.nodes}))

# The edge between the two groups is cut and the lone event is dropped.

for sub in graph_communities(g):
    print(encode(sub))
