"""Feature graphs: construction, scale-free generation, centrality, merging."""

from __future__ import annotations

from collections import deque

import numpy as np

from ._validation import check_rng


class FeatureGraph:
    """A graph over feature indices ``0..node_count-1`` with a set-valued edge list.

    Undirected edges are canonicalized to ``(min, max)`` so duplicates and
    orientation collapse; directed edges are kept as given. Self-loops are
    allowed and occupy a single diagonal adjacency entry.
    """

    def __init__(self, node_count: int, edges=(), directed: bool = False):
        node_count = int(node_count)
        if node_count < 1:
            raise ValueError(f"node_count must be positive, got {node_count}")
        self.node_count = node_count
        self.directed = bool(directed)
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValueError(f"edge ({u}, {v}) is out of range for {node_count} nodes")
            if not self.directed and u > v:
                u, v = v, u
            canon.add((u, v))
        self.edges = frozenset(canon)

    def __eq__(self, other):
        return (
            isinstance(other, FeatureGraph)
            and self.node_count == other.node_count
            and self.directed == other.directed
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.node_count, self.directed, self.edges))

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"FeatureGraph({self.node_count} nodes, {len(self.edges)} {kind} edges)"

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def adjacency(self) -> np.ndarray:
        """Dense 0/1 adjacency matrix; symmetric when undirected."""
        a = np.zeros((self.node_count, self.node_count))
        for u, v in self.edges:
            a[u, v] = 1.0
            if not self.directed:
                a[v, u] = 1.0
        return a

    def neighbors(self, node: int) -> set:
        """Nodes adjacent to ``node``, ignoring direction; self-loops excluded."""
        if not 0 <= node < self.node_count:
            raise ValueError(f"node {node} is out of range")
        out = set()
        for u, v in self.edges:
            if u == node and v != node:
                out.add(v)
            elif v == node and u != node:
                out.add(u)
        return out


def add_self_loops(graph: FeatureGraph) -> np.ndarray:
    """Adjacency with the diagonal forced to one (A + I clamped to {0, 1})."""
    a = graph.adjacency()
    np.fill_diagonal(a, 1.0)
    return a


def generate_ba_graph(node_count: int, attach_count: int, rng) -> FeatureGraph:
    """Scale-free graph grown from an ``attach_count``-clique by preferential attachment.

    Every node beyond the seed clique attaches to ``attach_count`` distinct
    existing nodes, each drawn with probability proportional to current degree
    (sampling uniformly from a both-endpoints-per-edge list). With m = 1 the
    seed node starts with degree zero, so the first newcomer attaches to it
    uniformly. The result is connected with exactly
    ``C(m, 2) + (node_count - m) * m`` edges.
    """
    p, m = int(node_count), int(attach_count)
    if not 1 <= m < p:
        raise ValueError(f"attach_count must satisfy 1 <= m < node_count, got m={m}, p={p}")
    rng = check_rng(rng)
    edges = set()
    endpoints: list[int] = []
    for u in range(m):
        for v in range(u + 1, m):
            edges.add((u, v))
            endpoints.extend((u, v))
    for new in range(m, p):
        targets: set[int] = set()
        while len(targets) < m:
            if endpoints:
                targets.add(endpoints[int(rng.integers(len(endpoints)))])
            else:
                targets.add(int(rng.integers(new)))
        for target in sorted(targets):
            edges.add((target, new))
            endpoints.extend((target, new))
    return FeatureGraph(p, edges, directed=False)


def closeness_centrality(graph: FeatureGraph) -> np.ndarray:
    """Component-scaled closeness for undirected graphs.

    For node v reaching k-1 others at total hop distance D:
    ``C(v) = ((k-1)/(p-1)) * ((k-1)/D)``. Isolated nodes score zero; self-loops
    are ignored.
    """
    if graph.directed:
        raise ValueError("closeness centrality is defined here for undirected graphs")
    p = graph.node_count
    scores = np.zeros(p)
    if p == 1:
        return scores
    adjacency = [[] for _ in range(p)]
    for u, v in graph.edges:
        if u == v:
            continue
        adjacency[u].append(v)
        adjacency[v].append(u)
    for source in range(p):
        dist = np.full(p, -1)
        dist[source] = 0
        queue = deque([source])
        total = 0
        reached = 1
        while queue:
            node = queue.popleft()
            for nxt in adjacency[node]:
                if dist[nxt] < 0:
                    dist[nxt] = dist[node] + 1
                    total += dist[nxt]
                    reached += 1
                    queue.append(nxt)
        if reached > 1:
            scores[source] = ((reached - 1) / (p - 1)) * ((reached - 1) / total)
    return scores


def merge_graphs(graphs) -> FeatureGraph:
    """Union of edge sets; node counts and directedness must match."""
    graphs = list(graphs)
    if not graphs:
        raise ValueError("need at least one graph to merge")
    node_count = graphs[0].node_count
    directed = graphs[0].directed
    merged: set = set()
    for g in graphs:
        if g.node_count != node_count:
            raise ValueError("cannot merge graphs with different node counts")
        if g.directed != directed:
            raise ValueError("cannot merge directed with undirected graphs")
        merged |= g.edges
    return FeatureGraph(node_count, merged, directed=directed)


def one_hop_expand(graph: FeatureGraph, nodes) -> set:
    """The given node set plus every direct neighbor of its members."""
    nodes = {int(v) for v in nodes}
    for v in nodes:
        if not 0 <= v < graph.node_count:
            raise ValueError(f"node {v} is out of range")
    expanded = set(nodes)
    for v in nodes:
        expanded |= graph.neighbors(v)
    return expanded
