"""Scaling probe: oracle build + sparsify on a random sparse graph.

Prints one JSON object with timings and peak resident memory. Run it in a
fresh process (``python -m respars.bench --n 100000 --m 1000000``) so the
memory figure is not polluted by earlier work.
"""

from __future__ import annotations

import argparse
import json
import resource
import sys
import time

import numpy as np

from .generators import random_sparse
from .resistance import build_oracle, jl_dimension
from .sparsify import SampleConfig, resolve_delta, sparsify


def _peak_rss_bytes() -> int:
    # VmHWM is per address space; ru_maxrss survives exec and would report the parent's peak
    try:
        with open("/proc/self/status") as fh:
            for line in fh:
                if line.startswith("VmHWM:"):
                    return int(line.split()[1]) * 1024
    except OSError:
        pass
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    # kilobytes on Linux, bytes on macOS
    return peak if sys.platform == "darwin" else peak * 1024


def run(n: int, m: int, epsilon: float = 1.0, seed: int = 0) -> dict:
    baseline = _peak_rss_bytes()
    g = random_sparse(n, m, np.random.default_rng(seed))
    cfg = SampleConfig(epsilon=epsilon, seed=seed)
    delta = resolve_delta(g, cfg)

    t0 = time.perf_counter()
    oracle = build_oracle(g, epsilon, delta, seed)
    t1 = time.perf_counter()
    r = oracle.all_edge_resistances(g)
    t2 = time.perf_counter()
    res = sparsify(g, cfg, r_approx=r)
    t3 = time.perf_counter()
    return {
        "n": g.n,
        "m": g.m,
        "k": jl_dimension(g.n, epsilon),
        "delta": delta,
        "max_iterations": max(s.iterations for s in oracle.solve_stats),
        "oracle_s": t1 - t0,
        "edge_query_s": t2 - t1,
        "sample_s": t3 - t2,
        "total_s": t3 - t0,
        "q": res.q_used,
        "distinct_edges": res.distinct_edges,
        "weighted_trace": float((g.w * r).sum()),
        "baseline_rss": baseline,
        "peak_rss": _peak_rss_bytes(),
    }


def main(argv=None) -> None:
    p = argparse.ArgumentParser(prog="python -m respars.bench")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    print(json.dumps(run(args.n, args.m, args.epsilon, args.seed)))


if __name__ == "__main__":
    main()
