"""Command-line front end.

Exit codes: 0 ok, 1 usage, 2 I/O or parse error, 3 precondition violated
(disconnected graph, epsilon out of range, dense limit), 4 verification
failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from contextlib import contextmanager

import numpy as np

from . import rng
from .errors import DisconnectedGraphError, GraphFormatError, PreconditionError, ResparsError
from .graph import dumps_graph, is_connected, load_graph
from .resistance import ResistanceOracle, build_oracle, default_delta
from .sparsify import DEGREE_BOUNDED, RESISTANCE, SampleConfig, edge_resistances, sparsify
from .verify import certify, pi_matrix_report, verify

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_PRECONDITION = 3
EXIT_VERIFY = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _mode(text: str) -> str:
    table = {"resistance": RESISTANCE, "degree-bounded": DEGREE_BOUNDED, "degree_bounded": DEGREE_BOUNDED}
    if text not in table:
        raise argparse.ArgumentTypeError("mode must be 'resistance' or 'degree-bounded'")
    return table[text]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="respars", description="Spectral sparsification by effective-resistance sampling.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=True):
        sp.add_argument("--input", required=True, help="edge-list file ('-' for stdin)")
        if seed:
            sp.add_argument("--seed", type=int, help="RNG seed (drawn from entropy and printed if absent)")

    s = sub.add_parser("sparsify", help="sample a spectral sparsifier")
    common(s)
    s.add_argument("--output", help="write the sparsifier here (default stdout)")
    s.add_argument("--epsilon", type=float, default=0.5)
    s.add_argument("--q", type=int)
    s.add_argument("--c0", type=float, default=4.0)
    s.add_argument("--delta", type=float, help="solver accuracy (default: sufficiency bound)")
    s.add_argument("--mode", type=_mode, default=RESISTANCE)
    s.add_argument("--exact", action="store_true", help="use dense exact resistances")
    s.add_argument("--verify-retry", type=int, default=0, metavar="K",
                   help="resample up to K times until the dense spectral check passes")

    r = sub.add_parser("resistances", help="approximate effective resistances")
    common(r)
    r.add_argument("--epsilon", type=float, default=0.5)
    r.add_argument("--delta", type=float)
    r.add_argument("--oracle", help="load a saved oracle instead of building one")
    r.add_argument("--save-oracle", help="persist the built oracle here")
    r.add_argument("--output", help="write lines here (default stdout)")
    what = r.add_mutually_exclusive_group(required=True)
    what.add_argument("--all-edges", action="store_true")
    what.add_argument("--pairs", help="file of 'u v' lines")

    v = sub.add_parser("verify", help="certify a sparsifier against its source graph")
    common(v)
    v.add_argument("--sparsifier", required=True, help="edge-list file of H")
    v.add_argument("--epsilon", type=float, default=0.5)
    v.add_argument("--trials", type=int, default=1000)
    v.add_argument("--json", action="store_true", help="emit JSON instead of key=value lines")

    st = sub.add_parser("stats", help="print n, m, weight ratio and connectivity")
    common(st, seed=False)

    pc = sub.add_parser("pi-check", help="check the projection-matrix identities")
    common(pc, seed=False)
    return p


@contextmanager
def _out(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _read_graph(path):
    return load_graph(sys.stdin if path == "-" else path)


def _seed(args) -> int:
    if args.seed is None:
        args.seed = rng.fresh_seed()
        print(f"seed={args.seed}", file=sys.stderr)
    if args.seed < 0:
        raise PreconditionError("seed must be non-negative")
    return args.seed


def _check_epsilon(eps: float) -> None:
    if not (0 < eps <= 1):
        raise PreconditionError(f"epsilon must be in (0, 1], got {eps}")


def cmd_sparsify(args) -> int:
    g = _read_graph(args.input)
    seed = _seed(args)
    _check_epsilon(args.epsilon)
    started = time.perf_counter()
    base = SampleConfig(epsilon=args.epsilon, q=args.q, c0=args.c0, seed=seed, mode=args.mode,
                        delta_override=args.delta, exact=args.exact)
    result = None
    certified = None
    r_exact = None
    for attempt in range(max(1, args.verify_retry)):
        s = seed if attempt == 0 else int(rng.stream(seed, rng.RETRY, attempt).integers(0, 2**63 - 1))
        cfg = dataclasses.replace(base, seed=s)
        if args.exact and r_exact is None and g.n > 1:
            r_exact = edge_resistances(g, cfg)
        result = sparsify(g, cfg, r_approx=r_exact)
        if args.verify_retry <= 0:
            break
        certified = certify(g, result.graph, args.epsilon)
        if certified:
            break
    elapsed = time.perf_counter() - started
    with _out(args.output) as fh:
        fh.write(dumps_graph(result.graph))
    print(f"q={result.q_used}", file=sys.stderr)
    print(f"distinct_edges={result.distinct_edges}", file=sys.stderr)
    print(f"seed_used={result.seed}", file=sys.stderr)
    print(f"wall_time_s={elapsed:.3f}", file=sys.stderr)
    if certified is not None:
        print(f"certified={'true' if certified else 'false'}", file=sys.stderr)
        if not certified:
            return EXIT_VERIFY
    return EXIT_OK


def _read_pairs(path, n):
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphFormatError(f"{path}:{lineno}: expected 'u v'")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(f"{path}:{lineno}: bad vertex id") from None
            if not (0 <= a < n and 0 <= b < n):
                raise GraphFormatError(f"{path}:{lineno}: vertex out of range")
            pairs.append((a, b))
    return pairs


def cmd_resistances(args) -> int:
    g = _read_graph(args.input)
    if args.oracle:
        oracle = ResistanceOracle.load(args.oracle)
        if oracle.n != g.n:
            raise PreconditionError(f"oracle has n={oracle.n}, graph has n={g.n}")
    else:
        seed = _seed(args)
        _check_epsilon(args.epsilon)
        if not is_connected(g):
            raise DisconnectedGraphError("effective resistances need a connected graph")
        if args.delta is not None:
            delta = args.delta
        else:
            delta = default_delta(g, args.epsilon if args.epsilon < 1 else 0.5)
        oracle = build_oracle(g, args.epsilon, delta, seed)
        if args.save_oracle:
            oracle.save(args.save_oracle)
    if args.all_edges:
        us, vs = g.u, g.v
    else:
        pairs = _read_pairs(args.pairs, g.n)
        us = np.array([a for a, _ in pairs], dtype=np.int64)
        vs = np.array([b for _, b in pairs], dtype=np.int64)
    vals = oracle.query_pairs(us, vs)
    with _out(args.output) as fh:
        for a, b, x in zip(us.tolist(), vs.tolist(), vals.tolist()):
            fh.write(f"{a} {b} {x:.17g}\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    g = _read_graph(args.input)
    h = load_graph(args.sparsifier)
    seed = _seed(args)
    _check_epsilon(args.epsilon)
    report = verify(g, h, args.epsilon, trials=args.trials, seed=seed)
    sys.stdout.write(report.to_json() + "\n" if args.json else report.to_text())
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_stats(args) -> int:
    g = _read_graph(args.input)
    sys.stdout.write(
        f"n={g.n}\nm={g.m}\nweight_ratio={g.weight_ratio!r}\nconnected={'true' if is_connected(g) else 'false'}\n"
    )
    return EXIT_OK


def cmd_pi_check(args) -> int:
    g = _read_graph(args.input)
    report = pi_matrix_report(g)
    for key, val in report.items():
        print(f"{key}={val!r}")
    ok = all(v <= 1e-8 for v in report.values())
    print(f"pass={'true' if ok else 'false'}")
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {
    "sparsify": cmd_sparsify,
    "resistances": cmd_resistances,
    "verify": cmd_verify,
    "stats": cmd_stats,
    "pi-check": cmd_pi_check,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (OSError, GraphFormatError) as exc:
        print(f"respars: {exc}", file=sys.stderr)
        return EXIT_IO
    except PreconditionError as exc:
        print(f"respars: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ResparsError as exc:
        print(f"respars: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
