"""Modularity and greedy agglomerative event communities.

Community detection ignores edge labels and directions: two events are
adjacent when any temporal relation links them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import TemporalGraph


@dataclass(frozen=True)
class UndirectedAdjacency:
    """Symmetric 0/1 adjacency over a graph's events.

    ``nodes[i]`` is the token offset of the event in row/column ``i``.
    """

    nodes: tuple
    matrix: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=np.int64)
        if a.shape != (len(self.nodes), len(self.nodes)):
            raise ValueError("adjacency shape does not match node count")
        if not np.array_equal(a, a.T) or np.any(np.diag(a)) or np.any((a != 0) & (a != 1)):
            raise ValueError("adjacency must be symmetric 0/1 with an empty diagonal")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def m(self) -> int:
        return int(self.matrix.sum()) // 2

    @property
    def degrees(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @classmethod
    def from_graph(cls, g: TemporalGraph) -> "UndirectedAdjacency":
        nodes = tuple(ev.token_index for ev in g.events)
        index = {t: i for i, t in enumerate(nodes)}
        a = np.zeros((len(nodes), len(nodes)), dtype=np.int64)
        for e in g.edges:
            i, j = index[e.source.token_index], index[e.target.token_index]
            a[i, j] = a[j, i] = 1
        return cls(nodes, a)

    @classmethod
    def from_edges(cls, nodes, pairs) -> "UndirectedAdjacency":
        nodes = tuple(nodes)
        index = {t: i for i, t in enumerate(nodes)}
        a = np.zeros((len(nodes), len(nodes)), dtype=np.int64)
        for u, v in pairs:
            i, j = index[u], index[v]
            if i != j:
                a[i, j] = a[j, i] = 1
        return cls(nodes, a)


def modularity(adj: UndirectedAdjacency, part: dict) -> float:
    """Q = (1/2m) * sum over same-community ordered pairs of A_ij - p_i p_j / 2m.

    ``part`` maps every node (token offset) to a community id.
    """
    m2 = 2 * adj.m
    if m2 == 0:
        raise ValueError("modularity is undefined for a graph without edges")
    try:
        labels = np.array([part[t] for t in adj.nodes], dtype=object)
    except KeyError as exc:
        raise ValueError(f"node {exc.args[0]} has no community") from None
    same = labels[:, None] == labels[None, :]
    p = adj.degrees
    # integer numerator keeps the all-in-one partition at exactly 0
    num = int(adj.matrix[same].sum()) * m2 - int(np.outer(p, p)[same].sum())
    return num / (m2 * m2)


def detect_communities(adj: UndirectedAdjacency) -> dict:
    """Greedy modularity agglomeration (Clauset-Newman-Moore style).

    Starts from singletons and repeatedly merges the adjacent pair with
    the largest gain until no merge gains. Gains are compared exactly in
    integer units of 1/(2m)^2. Ties go to the pair whose community minima
    (by token offset), taken smaller first, sort lowest.

    Returns a map from token offset to community id; ids are numbered by
    each community's smallest token offset.
    """
    m2 = 2 * adj.m
    if m2 == 0:
        raise ValueError("community detection needs at least one edge")
    n = len(adj.nodes)
    deg = {i: int(d) for i, d in enumerate(adj.degrees)}
    links = {i: {} for i in range(n)}  # community -> neighbour community -> edge count
    rows, cols = np.nonzero(adj.matrix)
    for i, j in zip(rows.tolist(), cols.tolist()):
        links[i][j] = 1
    members = {i: [adj.nodes[i]] for i in range(n)}
    lowest = {i: adj.nodes[i] for i in range(n)}

    while True:
        best = None
        for c, nbrs in links.items():
            for d, e_cd in nbrs.items():
                if d <= c:
                    continue
                # (2m)^2 * dQ = 2 * (2m * e_cd - D_c * D_d)
                gain = 2 * (m2 * e_cd - deg[c] * deg[d])
                tie = tuple(sorted((lowest[c], lowest[d])))
                cand = (-gain, tie, c, d)
                if best is None or cand < best:
                    best = cand
        if best is None or best[0] >= 0:
            break
        _, _, c, d = best
        for x, e_dx in links.pop(d).items():
            links[x].pop(d)
            if x != c:
                links[c][x] = links[c].get(x, 0) + e_dx
                links[x][c] = links[x].get(c, 0) + e_dx
        deg[c] += deg.pop(d)
        members[c].extend(members.pop(d))
        lowest[c] = min(lowest[c], lowest.pop(d))

    order = sorted(members.values(), key=min)
    return {t: k for k, group in enumerate(order) for t in group}


def induced_subgraphs(g: TemporalGraph, part: dict) -> list:
    """One subgraph per non-singleton community, ordered by smallest token offset."""
    groups = {}
    for ev in g.events:
        groups.setdefault(part[ev.token_index], []).append(ev.token_index)
    out = [ids for ids in groups.values() if len(ids) > 1]
    out.sort(key=min)
    return [g.subgraph(ids) for ids in out]


def graph_communities(g: TemporalGraph) -> list:
    """Detect communities on ``g`` and return the induced subgraphs."""
    if not g.edges:
        return []
    adj = UndirectedAdjacency.from_graph(g)
    return induced_subgraphs(g, detect_communities(adj))
