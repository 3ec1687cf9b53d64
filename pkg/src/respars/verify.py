"""Dense desk-scale certification of a sparsifier against its source graph."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import rng
from .errors import DisconnectedGraphError, PreconditionError
from .graph import WeightedGraph, incidence, is_connected, laplacian
from .linalg import check_dense_limit
from .resistance import ResistanceOracle, exact_all_pairs, exact_pinv, exact_resistances

IDENTITY_TOL = 1e-8


def _same_vertices(g: WeightedGraph, h: WeightedGraph) -> None:
    if g.n != h.n:
        raise PreconditionError(f"vertex sets differ: n={g.n} vs n={h.n}")


def _range_basis(g: WeightedGraph):
    """Eigenpairs of ``L`` restricted to the complement of the all-ones vector."""
    L = laplacian(g).toarray()
    lam, U = np.linalg.eigh(L)
    # drop the eigenvector closest to the constant direction
    ones = np.full(g.n, 1 / math.sqrt(g.n))
    drop = int(np.argmax(np.abs(ones @ U)))
    keep = np.delete(np.arange(g.n), drop)
    return lam[keep], U[:, keep]


def pencil_eigenvalues(g: WeightedGraph, h: WeightedGraph) -> np.ndarray:
    """Sorted eigenvalues of ``L^{+/2} Lh L^{+/2}`` on the image of ``L``."""
    _same_vertices(g, h)
    if not is_connected(g):
        raise DisconnectedGraphError("reference graph must be connected")
    check_dense_limit(g.n)
    if g.n == 1:
        return np.ones(0)
    lam, U = _range_basis(g)
    Lh = laplacian(h).toarray()
    S = U / np.sqrt(lam)
    M = S.T @ Lh @ S
    return np.linalg.eigvalsh(0.5 * (M + M.T))


def spectral_bounds(g: WeightedGraph, h: WeightedGraph) -> tuple[float, float]:
    """Tightest ``(a, b)`` with ``a x'Lx <= x'Lh x <= b x'Lx`` for all ``x``."""
    ev = pencil_eigenvalues(g, h)
    if len(ev) == 0:
        return 1.0, 1.0
    return float(ev[0]), float(ev[-1])


def pi_matrix(g: WeightedGraph) -> np.ndarray:
    """``W^{1/2} B L^+ B^T W^{1/2}``, dense ``m x m``."""
    P = exact_pinv(g)
    B = incidence(g).toarray()
    WB = np.sqrt(g.w)[:, None] * B
    return WB @ P @ WB.T


def pi_matrix_report(g: WeightedGraph) -> dict[str, float]:
    """Residuals of the four projection identities (each should be ~0)."""
    Pi = pi_matrix(g)
    R = exact_resistances(g)
    diag = np.diagonal(Pi)
    if g.m == 0:
        return dict(idempotence=0.0, trace=float(abs(0 - (g.n - 1))), diagonal=0.0, column_norm=0.0)
    return dict(
        idempotence=float(np.max(np.abs(Pi @ Pi - Pi))),
        trace=float(abs(np.trace(Pi) - (g.n - 1))),
        diagonal=float(np.max(np.abs(diag - g.w * R))),
        column_norm=float(np.max(np.abs(diag - np.sum(Pi * Pi, axis=0)))),
    )


def pi_matrix_checks(g: WeightedGraph, tol: float = IDENTITY_TOL) -> bool:
    return all(val <= tol for val in pi_matrix_report(g).values())


def _cut_weights(g: WeightedGraph, X: np.ndarray) -> np.ndarray:
    """Cut weight of each 0/1 row of ``X``."""
    crossing = X[:, g.u] != X[:, g.v]
    return crossing.astype(np.float64) @ g.w


def cut_check(g: WeightedGraph, h: WeightedGraph, trials: int = 1000, seed: int = 0) -> float:
    """Worst ``|cut_H / cut_G - 1|`` over random cuts and all singleton cuts."""
    _same_vertices(g, h)
    n = g.n
    gen = rng.stream(seed, rng.VERIFY)
    X = np.vstack([gen.integers(0, 2, size=(trials, n), dtype=np.int8), np.eye(n, dtype=np.int8)])
    worst = 0.0
    for s in range(0, len(X), 512):
        chunk = X[s : s + 512]
        cg = _cut_weights(g, chunk)
        ch = _cut_weights(h, chunk)
        live = cg > 0
        if live.any():
            worst = max(worst, float(np.max(np.abs(ch[live] / cg[live] - 1.0))))
    return worst


def degree_bound_check(g: WeightedGraph, h: WeightedGraph) -> float:
    """``max_v sum_{e at v, e in H} (w~_e / w_e) / deg_G(v)``."""
    _same_vertices(g, h)
    if h.m == 0:
        return 0.0
    index = g.edge_index()
    try:
        ids = np.array([index[(a, b)] for a, b in zip(h.u.tolist(), h.v.tolist())], dtype=np.int64)
    except KeyError as exc:
        raise PreconditionError(f"edge {exc.args[0]} of H is not an edge of G") from None
    ratio = h.w / g.w[ids]
    load = np.bincount(h.u, weights=ratio, minlength=g.n) + np.bincount(h.v, weights=ratio, minlength=g.n)
    deg = g.degrees()
    live = deg > 0
    return float(np.max(load[live] / deg[live]))


def resistance_error(g: WeightedGraph, oracle: ResistanceOracle) -> float:
    """Worst relative error of oracle answers over all vertex pairs."""
    R = exact_all_pairs(g)
    iu, iv = np.triu_indices(g.n, 1)
    approx = oracle.query_pairs(iu, iv)
    exact = R[iu, iv]
    return float(np.max(np.abs(approx / exact - 1.0))) if len(exact) else 0.0


def sparsifier_resistance_error(g: WeightedGraph, h: WeightedGraph) -> float:
    """Worst ``|R^H_e / R^G_e - 1|`` over the edges of ``G``; inf if ``H`` is disconnected."""
    if g.m == 0:
        return 0.0
    if not is_connected(h):
        return math.inf
    rg = exact_resistances(g)
    P = exact_pinv(h)
    d = np.diagonal(P)
    rh = d[g.u] + d[g.v] - 2.0 * P[g.u, g.v]
    return float(np.max(np.abs(rh / rg - 1.0)))


@dataclass(frozen=True)
class VerificationReport:
    epsilon: float
    rayleigh_min: float
    rayleigh_max: float
    cut_worst_ratio: float
    resistance_worst_ratio: float
    degree_bound_max: float
    passed: bool

    def to_text(self) -> str:
        rows = [(k, v) for k, v in asdict(self).items()]
        return "".join(f"{k}={_fmt(v)}\n" for k, v in rows)

    def to_json(self) -> str:
        d = asdict(self)
        d = {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}
        return json.dumps(d, sort_keys=True)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def certify(g: WeightedGraph, h: WeightedGraph, epsilon: float) -> bool:
    lo, hi = spectral_bounds(g, h)
    return 1 - epsilon <= lo and hi <= 1 + epsilon


def verify(
    g: WeightedGraph,
    h: WeightedGraph,
    epsilon: float,
    trials: int = 1000,
    seed: int = 0,
    oracle: ResistanceOracle | None = None,
) -> VerificationReport:
    """Measure ``h`` against ``g``. ``passed`` is the spectral certificate at ``epsilon``.

    ``resistance_worst_ratio`` compares ``oracle`` against exact all-pairs
    resistances when an oracle is given, and otherwise compares the exact
    edge resistances of ``h`` against those of ``g``.
    """
    lo, hi = spectral_bounds(g, h)
    res = resistance_error(g, oracle) if oracle is not None else sparsifier_resistance_error(g, h)
    return VerificationReport(
        epsilon=epsilon,
        rayleigh_min=lo,
        rayleigh_max=hi,
        cut_worst_ratio=cut_check(g, h, trials, seed),
        resistance_worst_ratio=res,
        degree_bound_max=degree_bound_check(g, h),
        passed=bool(1 - epsilon <= lo and hi <= 1 + epsilon),
    )
