"""Sparsification by importance sampling of edges.

Each of ``q`` independent draws picks edge ``e`` with probability ``p_e``;
an edge drawn ``c_e`` times gets weight ``c_e * w_e / (q * p_e)`` in the
output. With ``p_e`` proportional to ``w_e * R_e`` this gives a spectral
sparsifier.

The sample count is ``q = c0 * n ln n / eps^2`` with a tunable
oversampling constant ``c0`` (default 4).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import DisconnectedGraphError, PreconditionError
from .graph import WeightedGraph, is_connected
from .linalg import DEFAULT_SAFETY
from .resistance import build_oracle, default_delta, exact_resistances

RESISTANCE = "resistance"
DEGREE_BOUNDED = "degree_bounded"
MODES = (RESISTANCE, DEGREE_BOUNDED)

PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class SampleConfig:
    epsilon: float = 0.5
    q: int | None = None
    c0: float = 4.0
    seed: int = 0
    mode: str = RESISTANCE
    delta_override: float | None = None
    exact: bool = False
    oracle_epsilon: float | None = None
    safety: float = DEFAULT_SAFETY

    def __post_init__(self):
        if not (0 < self.epsilon <= 1):
            raise PreconditionError(f"epsilon must be in (0, 1], got {self.epsilon}")
        if self.c0 <= 0:
            raise PreconditionError("c0 must be positive")
        if self.q is not None and self.q < 1:
            raise PreconditionError("q must be positive")
        if self.mode not in MODES:
            raise PreconditionError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.delta_override is not None and self.delta_override <= 0:
            raise PreconditionError("delta must be positive")
        if self.seed < 0:
            raise PreconditionError("seed must be non-negative")


@dataclass(frozen=True, eq=False)
class SparsifierResult:
    graph: WeightedGraph
    q_used: int
    distinct_edges: int
    probabilities: np.ndarray | None
    mode: str
    seed: int


def _floored(r_approx, m: int) -> np.ndarray:
    r = np.asarray(r_approx, dtype=np.float64)
    if r.shape != (m,):
        raise ValueError(f"expected {m} resistances, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise PreconditionError("resistances must be finite")
    top = r.max() if m else 0.0
    if top <= 0:
        raise PreconditionError("resistance vector is all zero")
    return np.maximum(r, PROB_FLOOR * top)


def resistance_probabilities(g: WeightedGraph, r_approx) -> np.ndarray:
    """``p_e = w_e r_e / sum_f w_f r_f``."""
    mass = g.w * _floored(r_approx, g.m)
    return mass / mass.sum()


def mixed_probabilities(g: WeightedGraph, r_approx) -> np.ndarray:
    """Average of the resistance distribution and ``1 / (n min(deg u, deg v))``, renormalized."""
    deg = g.degrees()
    local = 1.0 / (g.n * np.minimum(deg[g.u], deg[g.v]))
    p = 0.5 * (resistance_probabilities(g, r_approx) + local)
    return p / p.sum()


class AliasTable:
    """Walker/Vose alias table: O(m) build, O(1) per draw."""

    def __init__(self, p):
        p = np.asarray(p, dtype=np.float64)
        if p.ndim != 1 or len(p) == 0:
            raise ValueError("need a non-empty 1-D probability vector")
        if np.any(p < 0) or not np.isfinite(p).all():
            raise ValueError("probabilities must be finite and non-negative")
        m = len(p)
        scaled = (p * (m / p.sum())).tolist()
        prob = [1.0] * m
        alias = list(range(m))
        small = [i for i, x in enumerate(scaled) if x < 1.0]
        large = [i for i, x in enumerate(scaled) if x >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = (scaled[g] + scaled[s]) - 1.0
            (small if scaled[g] < 1.0 else large).append(g)
        # leftovers are 1 up to rounding
        self.prob = np.array(prob)
        self.alias = np.array(alias, dtype=np.int64)

    def __len__(self):
        return len(self.prob)

    def draw(self, gen: np.random.Generator, size: int) -> np.ndarray:
        m = len(self.prob)
        slot = gen.integers(0, m, size=size)
        keep = gen.random(size) < self.prob[slot]
        return np.where(keep, slot, self.alias[slot])


def sample_sparsifier(g: WeightedGraph, p, q: int, seed: int, mode: str = RESISTANCE) -> SparsifierResult:
    """Draw ``q`` edges i.i.d. from ``p`` with replacement and reweight."""
    if q < 1:
        raise PreconditionError("q must be positive")
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (g.m,):
        raise ValueError(f"expected {g.m} probabilities, got shape {p.shape}")
    if g.m == 0:
        return SparsifierResult(g, q, 0, p, mode, seed)
    table = AliasTable(p)
    draws = table.draw(rng.stream(seed, rng.SAMPLE), q)
    counts = np.bincount(draws, minlength=g.m)
    hit = np.flatnonzero(counts)
    scale = counts[hit] / (q * p[hit])
    h = WeightedGraph(g.n, g.u[hit], g.v[hit], g.w[hit] * scale)
    return SparsifierResult(h, q, len(hit), p, mode, seed)


def default_q(n: int, epsilon: float, c0: float = 4.0) -> int:
    """``ceil(c0 * n * ln(n) / epsilon^2)``."""
    if n < 2:
        raise PreconditionError(f"need n >= 2, got {n}")
    if not (0 < epsilon <= 1):
        raise PreconditionError(f"epsilon must be in (0, 1], got {epsilon}")
    if c0 <= 0:
        raise PreconditionError("c0 must be positive")
    return math.ceil(c0 * n * math.log(n) / epsilon**2)


def degree_bounded_min_q(n: int) -> int:
    """Smallest q allowed in degree-bounded mode: ``ceil(8 n ln n)``."""
    return math.ceil(8 * n * math.log(n))


def resolve_delta(g: WeightedGraph, cfg: SampleConfig) -> float:
    if cfg.delta_override is not None:
        return cfg.delta_override
    eps = cfg.oracle_epsilon or cfg.epsilon
    # the sufficiency bound degenerates at eps = 1; fall back to its eps = 1/2 value
    return default_delta(g, eps if eps < 1 else 0.5)


def edge_resistances(g: WeightedGraph, cfg: SampleConfig) -> np.ndarray:
    """Resistances used for sampling: exact (dense) or from the sketch oracle."""
    if cfg.exact:
        return exact_resistances(g)
    eps = cfg.oracle_epsilon or cfg.epsilon
    oracle = build_oracle(g, eps, resolve_delta(g, cfg), cfg.seed, safety=cfg.safety)
    return oracle.all_edge_resistances(g)


def sparsify(g: WeightedGraph, cfg: SampleConfig, r_approx=None) -> SparsifierResult:
    """End-to-end: resistances, mode-dependent probabilities, sampling.

    ``r_approx`` may be passed to reuse precomputed edge resistances.
    """
    if not is_connected(g):
        raise DisconnectedGraphError("sparsify needs a connected graph")
    if g.n == 1:
        return SparsifierResult(g, cfg.q or 0, 0, np.empty(0), cfg.mode, cfg.seed)
    if cfg.epsilon <= 1 / math.sqrt(g.n):
        warnings.warn(f"epsilon={cfg.epsilon} outside the guaranteed range (1/sqrt(n), 1]", stacklevel=2)
    q = cfg.q if cfg.q is not None else default_q(g.n, cfg.epsilon, cfg.c0)
    if r_approx is None:
        r_approx = edge_resistances(g, cfg)
    if cfg.mode == DEGREE_BOUNDED:
        q = max(q, degree_bounded_min_q(g.n))
        p = mixed_probabilities(g, r_approx)
    else:
        p = resistance_probabilities(g, r_approx)
    return sample_sparsifier(g, p, q, cfg.seed, cfg.mode)
