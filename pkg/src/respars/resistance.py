"""Approximate and exact effective resistances.

The approximate oracle stores a ``k x n`` matrix ``Zt`` whose rows are
``L^+ y_i`` for the rows ``y_i`` of ``Q W^{1/2} B``, with ``Q`` a random
``+-1/sqrt(k)`` sign matrix. The squared distance between two columns of
``Zt`` approximates the effective resistance between the two vertices.

Binary oracle file layout (all little-endian)::

    offset  size  field
    0       4     magic b"RSPO"
    4       1     format version (currently 1)
    5       3     zero padding
    8       8     n        uint64
    16      8     k        uint64
    24      8     epsilon  float64
    32      8     delta    float64
    40      8     seed     uint64
    48      8*k*n Zt, row-major float64

Per-row solver statistics are not persisted.
"""

from __future__ import annotations

import math
import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import DisconnectedGraphError, GraphFormatError, PreconditionError, SolverError
from .graph import WeightedGraph, is_connected, laplacian
from .linalg import DEFAULT_SAFETY, check_dense_limit, pinv_dense, solve_block

ORACLE_MAGIC = b"RSPO"
ORACLE_VERSION = 1
_HEADER = struct.Struct("<4sB3xQQddQ")
# Rows solved together; fixed so results never depend on worker count.
BLOCK_ROWS = 16
# Element budget for the per-chunk column differences in batched queries.
_QUERY_BUDGET = 1 << 21


def jl_dimension(n: int, epsilon: float) -> int:
    """``ceil(24 ln n / epsilon^2)``."""
    if n < 2:
        raise PreconditionError(f"need n >= 2, got {n}")
    if not (0 < epsilon <= 1):
        raise PreconditionError(f"epsilon must be in (0, 1], got {epsilon}")
    return math.ceil(24.0 * math.log(n) / epsilon**2)


def default_delta(g: WeightedGraph, epsilon: float) -> float:
    """Energy-norm solver accuracy that provably suffices for a ``(1 +- eps)^2`` oracle.

    ``(eps/3) * sqrt(2 (1-eps) w_min / ((1+eps) n^3 w_max))``
    """
    if not (0 < epsilon < 1):
        raise PreconditionError(f"epsilon must be in (0, 1), got {epsilon}")
    if g.m == 0:
        raise PreconditionError("graph has no edges")
    n = g.n
    ratio = float(g.w.min()) / float(g.w.max())
    return (epsilon / 3.0) * math.sqrt(2.0 * (1.0 - epsilon) * ratio / ((1.0 + epsilon) * n**3))


@dataclass(frozen=True)
class RowStats:
    iterations: int
    residual: float


@dataclass(frozen=True, eq=False)
class ResistanceOracle:
    """Built oracle. ``ztilde`` is the ``k x n`` sketch matrix."""

    columns: np.ndarray  # n x k, C-contiguous: column j of Zt is row j here
    epsilon: float
    delta: float
    seed: int
    solve_stats: tuple[RowStats, ...] = field(default=(), repr=False)

    def __post_init__(self):
        self.columns.flags.writeable = False

    @property
    def ztilde(self) -> np.ndarray:
        return self.columns.T

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def k(self) -> int:
        return self.columns.shape[1]

    def _check(self, *vs):
        for x in vs:
            if not (0 <= x < self.n):
                raise IndexError(f"vertex {x} out of range for n={self.n}")

    def query(self, u: int, v: int) -> float:
        """``||Zt (chi_u - chi_v)||^2`` in O(k)."""
        self._check(u, v)
        if u == v:
            return 0.0
        d = self.columns[u] - self.columns[v]
        return float(d @ d)

    def query_pairs(self, us, vs) -> np.ndarray:
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        if len(us) and (min(us.min(), vs.min()) < 0 or max(us.max(), vs.max()) >= self.n):
            raise IndexError("vertex out of range")
        out = np.empty(len(us))
        step = max(1, _QUERY_BUDGET // max(self.k, 1))
        for s in range(0, len(us), step):
            d = self.columns[us[s : s + step]]
            d -= self.columns[vs[s : s + step]]
            out[s : s + step] = np.einsum("ij,ij->i", d, d)
        return out

    def all_edge_resistances(self, g: WeightedGraph) -> np.ndarray:
        if g.n != self.n:
            raise PreconditionError(f"oracle built for n={self.n}, graph has n={g.n}")
        return self.query_pairs(g.u, g.v)

    def save(self, path) -> None:
        zt = np.ascontiguousarray(self.ztilde, dtype="<f8")
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(ORACLE_MAGIC, ORACLE_VERSION, self.n, self.k, self.epsilon, self.delta, self.seed))
            fh.write(zt.tobytes())

    @classmethod
    def load(cls, path) -> "ResistanceOracle":
        with open(path, "rb") as fh:
            head = fh.read(_HEADER.size)
            if len(head) != _HEADER.size:
                raise GraphFormatError("truncated oracle file")
            magic, version, n, k, eps, delta, seed = _HEADER.unpack(head)
            if magic != ORACLE_MAGIC:
                raise GraphFormatError("not an oracle file (bad magic)")
            if version != ORACLE_VERSION:
                raise GraphFormatError(f"unsupported oracle format version {version}")
            body = fh.read()
        if len(body) != 8 * n * k:
            raise GraphFormatError(f"oracle body has {len(body)} bytes, expected {8 * n * k}")
        zt = np.frombuffer(body, dtype="<f8").reshape(k, n).astype(np.float64)
        return cls(np.ascontiguousarray(zt.T), eps, delta, seed)


def _sketch_rows(g: WeightedGraph, seed: int, k: int, rows: range) -> np.ndarray:
    """Rows of ``Y = Q W^{1/2} B`` for the given row indices, streamed over edges."""
    scale = np.sqrt(g.w) / math.sqrt(k)
    Y = np.empty((len(rows), g.n))
    for j, i in enumerate(rows):
        bits = rng.stream(seed, rng.ORACLE, i).integers(0, 2, size=g.m, dtype=np.int8)
        coeff = np.where(bits == 1, scale, -scale)
        # b_e = chi_v - chi_u with head v
        Y[j] = np.bincount(g.v, weights=coeff, minlength=g.n) - np.bincount(g.u, weights=coeff, minlength=g.n)
    return Y


def build_oracle(
    g: WeightedGraph,
    epsilon: float,
    delta: float,
    seed: int,
    *,
    k: int | None = None,
    safety: float = DEFAULT_SAFETY,
    max_iter: int | None = None,
    workers: int = 1,
) -> ResistanceOracle:
    """Build the sketch ``Zt`` of ``W^{1/2} B L^+``.

    The solver is asked for relative residual ``delta / safety``. Output is
    a deterministic function of ``(g, epsilon, delta, seed, k, safety)``;
    ``workers`` only changes wall time.
    """
    if delta <= 0:
        raise PreconditionError("delta must be positive")
    if safety <= 0:
        raise PreconditionError("safety must be positive")
    if not is_connected(g):
        raise DisconnectedGraphError("effective resistances need a connected graph")
    n = g.n
    if n == 1:
        return ResistanceOracle(np.zeros((1, 0)), epsilon, delta, seed)
    if k is None:
        k = jl_dimension(n, epsilon)
    elif k < 1:
        raise PreconditionError("k must be >= 1")
    if not (1 / math.sqrt(n) < epsilon <= 1):
        warnings.warn(f"epsilon={epsilon} outside the guaranteed range (1/sqrt(n), 1]", stacklevel=2)
    L = laplacian(g)
    diag = L.diagonal()
    tol = delta / safety
    if max_iter is None:
        max_iter = max(1000, 10 * n)

    cols = np.empty((n, k))
    stats: list[RowStats | None] = [None] * k

    def run(start: int) -> None:
        rows = range(start, min(start + BLOCK_ROWS, k))
        Y = _sketch_rows(g, seed, k, rows)
        X, iters, rel = solve_block(L, Y, tol, max_iter, diag=diag)
        cols[:, rows.start : rows.stop] = X.T
        for j, i in enumerate(rows):
            stats[i] = RowStats(int(iters[j]), float(rel[j]))

    starts = range(0, k, BLOCK_ROWS)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(run, starts))
    else:
        for s in starts:
            run(s)

    target = max(tol, 1e-13)
    for i, st in enumerate(stats):
        if not st.residual <= target:
            raise SolverError(
                f"row {i}: solver stopped at relative residual {st.residual:.3e} > {target:.3e} "
                f"after {st.iterations} iterations",
                row=i,
            )
    return ResistanceOracle(cols, epsilon, delta, seed, tuple(stats))


def query(oracle: ResistanceOracle, u: int, v: int) -> float:
    return oracle.query(u, v)


def all_edge_resistances(oracle: ResistanceOracle, g: WeightedGraph) -> np.ndarray:
    return oracle.all_edge_resistances(g)


def exact_pinv(g: WeightedGraph) -> np.ndarray:
    if not is_connected(g):
        raise DisconnectedGraphError("effective resistances need a connected graph")
    check_dense_limit(g.n)
    return pinv_dense(laplacian(g))


def _pair_resistance(P: np.ndarray, us, vs) -> np.ndarray:
    d = np.diagonal(P)
    return d[us] + d[vs] - 2.0 * P[us, vs]


def exact_resistances(g: WeightedGraph) -> np.ndarray:
    """``b_e L^+ b_e^T`` for every edge, from the dense grounded factorization."""
    return _pair_resistance(exact_pinv(g), g.u, g.v)


def exact_pair_resistances(g: WeightedGraph, us, vs) -> np.ndarray:
    return _pair_resistance(exact_pinv(g), np.asarray(us), np.asarray(vs))


def exact_all_pairs(g: WeightedGraph) -> np.ndarray:
    """Dense ``n x n`` matrix of effective resistances."""
    P = exact_pinv(g)
    d = np.diagonal(P)
    return d[:, None] + d[None, :] - 2.0 * P
