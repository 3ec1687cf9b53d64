"""Standard graph families used by the test suite and the acceptance runner."""

from __future__ import annotations

import networkx as nx
import numpy as np

from .graph import WeightedGraph


def complete(n: int, weight: float = 1.0) -> WeightedGraph:
    u, v = np.triu_indices(n, 1)
    return WeightedGraph(n, u, v, np.full(len(u), weight))


def path(n: int, weights=None) -> WeightedGraph:
    u = np.arange(n - 1)
    w = np.ones(n - 1) if weights is None else np.asarray(weights, dtype=float)
    return WeightedGraph(n, u, u + 1, w)


def cycle(n: int) -> WeightedGraph:
    return WeightedGraph.from_edges(n, [(i, (i + 1) % n, 1.0) for i in range(n)])


def star(leaves: int) -> WeightedGraph:
    return WeightedGraph(leaves + 1, np.zeros(leaves, dtype=int), np.arange(1, leaves + 1), np.ones(leaves))


def grid(rows: int, cols: int) -> WeightedGraph:
    edges = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                edges.append((i, i + 1, 1.0))
            if r + 1 < rows:
                edges.append((i, i + cols, 1.0))
    return WeightedGraph.from_edges(rows * cols, edges)


def dumbbell(n: int) -> WeightedGraph:
    """Two complete graphs on ``n // 2`` vertices joined by one bridge edge."""
    half = n // 2
    a, b = np.triu_indices(half, 1)
    u = np.concatenate([a, a + half, [half - 1]])
    v = np.concatenate([b, b + half, [half]])
    return WeightedGraph.from_arrays(n, u, v, np.ones(len(u)))


def random_regular(n: int, d: int, seed: int) -> WeightedGraph:
    """Connected random ``d``-regular graph (retries until connected)."""
    for attempt in range(100):
        h = nx.random_regular_graph(d, n, seed=seed * 1000 + attempt)
        if nx.is_connected(h):
            return WeightedGraph.from_edges(n, [(a, b, 1.0) for a, b in h.edges()])
    raise RuntimeError("could not draw a connected regular graph")


def log_uniform(gen: np.random.Generator, size: int, ratio: float) -> np.ndarray:
    """Weights log-uniform on ``[1, ratio]``."""
    return np.exp(gen.uniform(0.0, np.log(ratio), size=size))


def random_tree(n: int, gen: np.random.Generator, ratio: float = 1.0) -> WeightedGraph:
    """Random recursive tree: vertex ``i`` attaches to a uniform earlier vertex."""
    child = np.arange(1, n)
    parent = np.array([gen.integers(0, i) for i in child], dtype=np.int64)
    return WeightedGraph.from_arrays(n, parent, child, log_uniform(gen, n - 1, ratio))


def random_connected(n: int, gen: np.random.Generator, p: float = 0.1, ratio: float = 1.0) -> WeightedGraph:
    """Random spanning tree plus independent ``G(n, p)`` edges; weights log-uniform on ``[1, ratio]``."""
    child = np.arange(1, n)
    parent = np.array([gen.integers(0, i) for i in child], dtype=np.int64)
    a, b = np.triu_indices(n, 1)
    keep = gen.random(len(a)) < p
    u = np.concatenate([parent, a[keep]])
    v = np.concatenate([child, b[keep]])
    key = np.unique(np.minimum(u, v) * n + np.maximum(u, v))
    return WeightedGraph.from_arrays(n, key // n, key % n, log_uniform(gen, len(key), ratio))


def random_sparse(n: int, m: int, gen: np.random.Generator) -> WeightedGraph:
    """Connected graph with about ``m`` edges: a random tree plus uniform random pairs.

    Vectorized for large ``n``; duplicate pairs are dropped so the final
    edge count can fall slightly short of ``m``.
    """
    child = np.arange(1, n, dtype=np.int64)
    parent = np.floor(gen.random(n - 1) * child).astype(np.int64)
    extra = m - (n - 1)
    a = gen.integers(0, n, size=extra)
    b = gen.integers(0, n, size=extra)
    ok = a != b
    u = np.concatenate([parent, a[ok]])
    v = np.concatenate([child, b[ok]])
    key = np.unique(np.minimum(u, v) * n + np.maximum(u, v))
    return WeightedGraph(n, key // n, key % n, log_uniform(gen, len(key), 10.0))
