"""Simple undirected graphs: edge-list parsing, degrees, eigenvector centrality."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DENSE_LIMIT = 4096


class EdgeListError(ValueError):
    """Raised when an edge-list file cannot be parsed."""


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph on nodes 0..n-1.

    Edges are stored deduplicated as sorted (u, v) pairs with u < v. The dense
    adjacency matrix is the authoritative representation for eigensolves.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: np.ndarray = field(repr=False, compare=False)
    neighbors: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    @staticmethod
    def from_edges(n: int, edges) -> "Graph":
        if n <= 0:
            raise ValueError("node count must be positive")
        if n > DENSE_LIMIT:
            raise ValueError(f"node count {n} exceeds dense limit {DENSE_LIMIT}")
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) outside node range 0..{n - 1}")
            canon.add((min(u, v), max(u, v)))
        edge_tuple = tuple(sorted(canon))
        adj = np.zeros((n, n))
        for u, v in edge_tuple:
            adj[u, v] = 1.0
            adj[v, u] = 1.0
        adj.setflags(write=False)
        nbrs = tuple(tuple(int(j) for j in np.flatnonzero(adj[i])) for i in range(n))
        return Graph(n=n, edges=edge_tuple, adjacency=adj, neighbors=nbrs)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1).astype(int)


def parse_edge_list(text: str) -> Graph:
    """Parse edge-list text: one "u v" pair per line, '#' comments.

    An optional first data line "n <count>" forces the node count; otherwise
    the node count is max index + 1. Duplicate and reversed edges deduplicate
    silently; self-loops are rejected with their line number.
    """
    edges = []
    forced_n = None
    saw_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if not saw_data and tokens[0] == "n":
            if len(tokens) != 2:
                raise EdgeListError(f"line {lineno}: header must be 'n <count>'")
            try:
                forced_n = int(tokens[1])
            except ValueError:
                raise EdgeListError(f"line {lineno}: non-integer node count {tokens[1]!r}") from None
            if forced_n <= 0:
                raise EdgeListError(f"line {lineno}: node count must be positive")
            saw_data = True
            continue
        saw_data = True
        if len(tokens) != 2:
            raise EdgeListError(f"line {lineno}: expected two node indices, got {len(tokens)} tokens")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListError(f"line {lineno}: non-integer node index in {line!r}") from None
        if u < 0 or v < 0:
            raise EdgeListError(f"line {lineno}: negative node index")
        if u == v:
            raise EdgeListError(f"line {lineno}: self-loop at node {u}")
        edges.append((u, v))
    if not saw_data:
        raise EdgeListError("empty edge list")
    max_idx = max((max(u, v) for u, v in edges), default=-1)
    n = max_idx + 1 if forced_n is None else forced_n
    if forced_n is not None and forced_n < max_idx + 1:
        raise EdgeListError(f"header node count {forced_n} below max index {max_idx}")
    if n == 0:
        raise EdgeListError("no nodes")
    return Graph.from_edges(n, edges)


def serialize_edge_list(g: Graph) -> str:
    """Canonical edge-list text: header plus sorted "u v" lines (u < v)."""
    lines = [f"n {g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def load_edge_list(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def save_edge_list(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_edge_list(g))


def eigenvector_centrality(g: Graph, tol: float = 1e-10, max_iter: int = 100000) -> np.ndarray:
    """Dominant adjacency eigenvector, entrywise nonnegative, unit 2-norm.

    Power iteration on A + I from the all-ones vector: the shift breaks the
    +/-lambda1 oscillation on bipartite graphs, and a nonnegative start keeps
    every iterate nonnegative. Nodes outside the components carrying the
    dominant eigenvalue decay to centrality 0.
    """
    if g.m == 0:
        raise ValueError("eigenvector centrality undefined on an edgeless graph")
    a = g.adjacency
    x = np.ones(g.n) / np.sqrt(g.n)
    for _ in range(max_iter):
        y = a @ x + x
        x = y / np.linalg.norm(y)
        lam = float(x @ (a @ x))
        if np.max(np.abs(a @ x - lam * x)) <= tol * max(lam, 1.0):
            break
    # every iterate is nonnegative (nonnegative matrix, nonnegative start),
    # so the sum-of-entries >= 0 sign convention holds by construction
    return x
