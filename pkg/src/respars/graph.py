"""Weighted undirected graphs, edge-list I/O, incidence and Laplacian matrices."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import GraphFormatError

_HEADER = re.compile(r"^#\s*n\s*=\s*(\d+)(?:\s+m\s*=\s*(\d+))?\s*$")


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """A simple weighted undirected graph on vertices ``0..n-1``.

    Edges are stored as three parallel read-only arrays with ``u < v`` for
    every edge and no repeated pairs. The position of an edge in these
    arrays is its edge id. Use :meth:`from_edges` to build one from raw
    input; the constructor only validates.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise GraphFormatError(f"vertex count must be >= 1, got {self.n}")
        u = np.ascontiguousarray(self.u, dtype=np.int64)
        v = np.ascontiguousarray(self.v, dtype=np.int64)
        w = np.ascontiguousarray(self.w, dtype=np.float64)
        if not (u.shape == v.shape == w.shape) or u.ndim != 1:
            raise GraphFormatError("edge arrays must be 1-D and of equal length")
        if len(u):
            if not np.all(u < v):
                raise GraphFormatError("edges must be canonical (u < v, no self-loops)")
            if u.min() < 0 or v.max() >= self.n:
                raise GraphFormatError("vertex id out of range")
            if not np.all(np.isfinite(w)) or not np.all(w > 0):
                raise GraphFormatError("edge weights must be positive and finite")
            key = u * self.n + v
            if len(np.unique(key)) != len(key):
                raise GraphFormatError("duplicate edges; use WeightedGraph.from_edges to merge")
        for arr in (u, v, w):
            arr.flags.writeable = False
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)

    @classmethod
    def from_edges(cls, n: int | None, edges: Iterable[tuple[int, int, float]]) -> "WeightedGraph":
        """Canonicalize and merge a raw edge list.

        Parallel edges are merged by summing their weights and edges are
        sorted by ``(u, v)``. If ``n`` is None it is inferred as
        ``1 + max vertex id``.
        """
        rows = list(edges)
        if rows:
            arr = np.array(rows, dtype=np.float64).reshape(-1, 3)
            a = arr[:, 0]
            b = arr[:, 1]
            if not (np.all(a == np.floor(a)) and np.all(b == np.floor(b))):
                raise GraphFormatError("vertex ids must be integers")
            return cls.from_arrays(n, a.astype(np.int64), b.astype(np.int64), arr[:, 2])
        return cls.from_arrays(n, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0))

    @classmethod
    def from_arrays(cls, n: int | None, a, b, w) -> "WeightedGraph":
        """Vectorized counterpart of :meth:`from_edges`."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        w = np.asarray(w, dtype=np.float64)
        if len(a) == 0:
            if n is None:
                raise GraphFormatError("empty edge list and no vertex count")
            return cls(n, a, b, w)
        if np.any(a == b):
            i = int(np.flatnonzero(a == b)[0])
            raise GraphFormatError(f"self-loop at vertex {a[i]}")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise GraphFormatError("nonpositive or non-finite weight")
        if min(a.min(), b.min()) < 0:
            raise GraphFormatError("negative vertex id")
        top = int(max(a.max(), b.max()))
        if n is None:
            n = top + 1
        elif top >= n:
            raise GraphFormatError(f"vertex id {top} overflows declared n={n}")
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        key = lo * n + hi
        uniq, inverse = np.unique(key, return_inverse=True)
        merged = np.bincount(inverse, weights=w, minlength=len(uniq))
        return cls(n, uniq // n, uniq % n, merged)

    @property
    def m(self) -> int:
        return len(self.w)

    @property
    def edges(self) -> Iterator[tuple[int, int, float]]:
        for a, b, c in zip(self.u.tolist(), self.v.tolist(), self.w.tolist()):
            yield a, b, c

    @property
    def weight_ratio(self) -> float:
        """``w_max / w_min`` (1.0 for an edgeless graph)."""
        if self.m == 0:
            return 1.0
        return float(self.w.max() / self.w.min())

    def degrees(self) -> np.ndarray:
        """Unweighted vertex degrees."""
        return np.bincount(self.u, minlength=self.n) + np.bincount(self.v, minlength=self.n)

    def scaled(self, c: float) -> "WeightedGraph":
        return WeightedGraph(self.n, self.u, self.v, self.w * c)

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(a, b): i for i, (a, b) in enumerate(zip(self.u.tolist(), self.v.tolist()))}

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
            and np.array_equal(self.w, other.w)
        )

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={self.m})"


def _parse_weight(tok: str, lineno: int) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise GraphFormatError(f"line {lineno}: cannot parse weight {tok!r}") from None
    if not math.isfinite(x):
        raise GraphFormatError(f"line {lineno}: non-finite weight {tok!r}")
    if x <= 0:
        raise GraphFormatError(f"line {lineno}: nonpositive weight {x}")
    return x


def _parse_vertex(tok: str, lineno: int) -> int:
    try:
        x = int(tok)
    except ValueError:
        raise GraphFormatError(f"line {lineno}: bad vertex id {tok!r}") from None
    if x < 0:
        raise GraphFormatError(f"line {lineno}: negative vertex id {x}")
    return x


def loads_graph(text: str) -> WeightedGraph:
    """Parse an edge-list document.

    Format: an optional header ``# n=<int> m=<int>`` before the first edge,
    then one ``u v w`` line per edge. ``#`` starts a comment anywhere on a
    line. The ``m`` in the header is informational and not checked, since
    files with parallel edges count them before merging.
    """
    n = None
    a: list[int] = []
    b: list[int] = []
    w: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            hm = _HEADER.match(line)
            if hm and not a and n is None:
                n = int(hm.group(1))
                if n < 1:
                    raise GraphFormatError(f"line {lineno}: header n must be >= 1")
            continue
        line = line.split("#", 1)[0]
        parts = line.split()
        if len(parts) != 3:
            raise GraphFormatError(f"line {lineno}: expected 'u v w', got {raw!r}")
        x = _parse_vertex(parts[0], lineno)
        y = _parse_vertex(parts[1], lineno)
        if x == y:
            raise GraphFormatError(f"line {lineno}: self-loop at vertex {x}")
        if n is not None and max(x, y) >= n:
            raise GraphFormatError(f"line {lineno}: vertex id {max(x, y)} >= n={n}")
        a.append(x)
        b.append(y)
        w.append(_parse_weight(parts[2], lineno))
    if not a and n is None:
        raise GraphFormatError("document has no edges and no '# n=' header")
    return WeightedGraph.from_arrays(n, a, b, w)


def load_graph(source: str | TextIO) -> WeightedGraph:
    """Read a graph from a path or an open text stream."""
    if hasattr(source, "read"):
        return loads_graph(source.read())
    with open(source, encoding="utf-8") as fh:
        return loads_graph(fh.read())


def dumps_graph(g: WeightedGraph) -> str:
    """Serialize with a header and 17 significant digits per weight."""
    lines = [f"# n={g.n} m={g.m}"]
    lines.extend(f"{a} {b} {c:.17g}" for a, b, c in g.edges)
    return "\n".join(lines) + "\n"


def save_graph(g: WeightedGraph, path_or_stream) -> None:
    text = dumps_graph(g)
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text)
    else:
        with open(path_or_stream, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def laplacian(g: WeightedGraph) -> sp.csr_matrix:
    """``L = D - A`` as a canonical CSR matrix."""
    n = g.n
    rows = np.concatenate([g.u, g.v, g.u, g.v])
    cols = np.concatenate([g.v, g.u, g.u, g.v])
    data = np.concatenate([-g.w, -g.w, g.w, g.w])
    L = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    L.sum_duplicates()
    L.sort_indices()
    return L


def incidence(g: WeightedGraph) -> sp.csr_matrix:
    """Signed ``m x n`` incidence matrix, ``-1`` at the tail ``u`` and ``+1`` at the head ``v > u``."""
    m = g.m
    indptr = np.arange(0, 2 * m + 1, 2, dtype=np.int64)
    indices = np.empty(2 * m, dtype=np.int64)
    indices[0::2] = g.u
    indices[1::2] = g.v
    data = np.tile([-1.0, 1.0], m)
    return sp.csr_matrix((data, indices, indptr), shape=(m, g.n))


def adjacency(g: WeightedGraph) -> sp.csr_matrix:
    A = sp.coo_matrix(
        (np.concatenate([g.w, g.w]), (np.concatenate([g.u, g.v]), np.concatenate([g.v, g.u]))),
        shape=(g.n, g.n),
    )
    return A.tocsr()


def is_connected(g: WeightedGraph) -> bool:
    if g.n == 1:
        return True
    ncomp, _ = connected_components(adjacency(g), directed=False)
    return ncomp == 1
