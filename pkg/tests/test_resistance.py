import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from respars import (
    DisconnectedGraphError,
    GraphFormatError,
    PreconditionError,
    ResistanceOracle,
    WeightedGraph,
    all_edge_resistances,
    build_oracle,
    default_delta,
    exact_resistances,
    jl_dimension,
    query,
)
from respars import generators as gen
from respars import resistance as res_mod
from respars.resistance import exact_all_pairs, exact_pair_resistances

from conftest import pinv_resistance


class TestJlDimension:
    def test_unit_log(self):
        assert jl_dimension(math.e, 1.0) == 24
        assert jl_dimension(3, 1.0) == 27

    def test_n100(self):
        assert jl_dimension(100, 0.5) == 443

    @pytest.mark.parametrize("eps", [0.0, -0.1, 1.5])
    def test_epsilon_range(self, eps):
        with pytest.raises(PreconditionError):
            jl_dimension(10, eps)


class TestDefaultDelta:
    def test_two_vertices(self):
        assert default_delta(gen.path(2), 0.5) == pytest.approx(0.0481125224324688, rel=1e-12)

    def test_monotone_in_weight_ratio(self):
        deltas = [default_delta(gen.path(3, [1.0, big]), 0.5) for big in (1.0, 10.0, 1e3, 1e6)]
        assert all(a > b for a, b in zip(deltas, deltas[1:]))

    def test_scale_invariant(self):
        g = gen.path(4, [1.0, 3.0, 7.0])
        assert default_delta(g.scaled(2.0), 0.3) == pytest.approx(default_delta(g, 0.3), rel=1e-15)

    def test_epsilon_one_rejected(self):
        with pytest.raises(PreconditionError):
            default_delta(gen.path(3), 1.0)


class TestExactResistances:
    def test_single_edge(self):
        np.testing.assert_allclose(exact_resistances(WeightedGraph.from_edges(2, [(0, 1, 4.0)])), [0.25])

    def test_triangle(self, triangle):
        np.testing.assert_allclose(exact_resistances(triangle), [2 / 3] * 3, rtol=1e-14)

    @pytest.mark.parametrize("n", [4, 10, 25])
    def test_complete(self, n):
        np.testing.assert_allclose(exact_resistances(gen.complete(n)), 2 / n, rtol=1e-12)

    def test_matches_svd_pinv(self, rng):
        g = gen.random_connected(15, rng, p=0.3, ratio=1e3)
        R = exact_resistances(g)
        for e, (u, v, _) in enumerate(g.edges):
            assert R[e] == pytest.approx(pinv_resistance(g, u, v), rel=1e-9)

    def test_matches_pinv_apply(self, rng):
        from respars import laplacian, pinv_apply_exact

        g = gen.random_connected(20, rng, p=0.2)
        L = laplacian(g)
        R = exact_resistances(g)
        for e, (u, v, _) in enumerate(g.edges):
            chi = np.zeros(g.n)
            chi[u], chi[v] = 1.0, -1.0
            assert R[e] == pytest.approx(chi @ pinv_apply_exact(L, chi), rel=1e-12)

    def test_disconnected(self):
        with pytest.raises(DisconnectedGraphError):
            exact_resistances(WeightedGraph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]))

    @pytest.mark.parametrize("seed", range(8))
    def test_trace_identity(self, seed):
        r = np.random.default_rng(seed)
        g = gen.random_connected(int(r.integers(3, 80)), r, p=0.1, ratio=1e4)
        assert (g.w * exact_resistances(g)).sum() == pytest.approx(g.n - 1, rel=1e-8)

    @pytest.mark.parametrize("seed", range(8))
    def test_lower_bound(self, seed):
        r = np.random.default_rng(50 + seed)
        g = gen.random_connected(int(r.integers(3, 40)), r, p=0.2, ratio=1e3)
        R = exact_all_pairs(g)
        iu = np.triu_indices(g.n, 1)
        assert np.all(R[iu] >= 2 / (g.n * g.w.max()) * (1 - 1e-12))

    @given(st.floats(1e-3, 1e3))
    @settings(max_examples=25, deadline=None)
    def test_scale_covariance(self, c):
        g = gen.random_connected(12, np.random.default_rng(3), p=0.3, ratio=50.0)
        np.testing.assert_allclose(exact_resistances(g.scaled(c)), exact_resistances(g) / c, rtol=1e-8)

    def test_pairs(self, p3):
        np.testing.assert_allclose(exact_pair_resistances(p3, [0, 1, 2], [2, 1, 0]), [2.0, 0.0, 2.0], atol=1e-14)


def _within(approx, exact, eps):
    return np.all((1 - eps) * exact <= approx) and np.all(approx <= (1 + eps) * exact)


class TestOracle:
    def test_single_edge(self):
        g = gen.path(2)
        for seed in range(5):
            o = build_oracle(g, 0.5, 1e-8, seed)
            assert 0.5 <= o.query(0, 1) <= 1.5

    def test_complete_graph(self):
        g = gen.complete(10)
        o = build_oracle(g, 0.3, 1e-8, 11)
        iu, iv = np.triu_indices(10, 1)
        vals = o.query_pairs(iu, iv)
        assert _within(vals, np.full(len(vals), 0.2), 0.3)

    def test_path_series(self):
        o = build_oracle(gen.path(5), 0.5, 1e-8, 2)
        assert 2.0 <= o.query(0, 4) <= 6.0

    def test_query_properties(self, p3):
        o = build_oracle(p3, 0.5, 1e-8, 0)
        assert o.query(1, 1) == 0.0
        assert o.query(0, 2) == o.query(2, 0)
        assert 1.0 <= query(o, 0, 2) <= 3.0
        with pytest.raises(IndexError):
            o.query(0, 3)

    def test_shape_and_orthogonality(self, rng):
        g = gen.random_connected(30, rng, p=0.2)
        o = build_oracle(g, 0.5, 1e-6, 9)
        assert o.ztilde.shape == (jl_dimension(30, 0.5), 30)
        assert o.k == jl_dimension(30, 0.5)
        assert np.max(np.abs(o.ztilde.sum(axis=1))) <= 1e-10
        assert len(o.solve_stats) == o.k
        assert all(s.residual <= 1e-8 for s in o.solve_stats)

    def test_k_override(self, p3):
        assert build_oracle(p3, 0.5, 1e-8, 0, k=7).k == 7

    def test_tree_edges(self, rng):
        g = gen.random_tree(40, rng, ratio=100.0)
        o = build_oracle(g, 0.5, 1e-8, 4)
        assert _within(all_edge_resistances(o, g), 1 / g.w, 0.5)

    def test_weighted_trace(self, rng):
        g = gen.random_connected(40, rng, p=0.15, ratio=10.0)
        o = build_oracle(g, 0.5, 1e-8, 5)
        total = (g.w * o.all_edge_resistances(g)).sum()
        assert 0.5 * (g.n - 1) <= total <= 1.5 * (g.n - 1)

    def test_disconnected(self):
        with pytest.raises(DisconnectedGraphError):
            build_oracle(WeightedGraph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]), 0.5, 1e-6, 0)

    def test_warns_outside_range(self):
        with pytest.warns(UserWarning, match="guaranteed range"):
            build_oracle(gen.complete(100), 0.05, 1e-6, 0, k=4)

    def test_deterministic(self, rng):
        g = gen.random_connected(25, rng, p=0.2, ratio=1e3)
        a = build_oracle(g, 0.5, 1e-8, 123)
        b = build_oracle(g, 0.5, 1e-8, 123)
        assert a.ztilde.tobytes() == b.ztilde.tobytes()
        c = build_oracle(g, 0.5, 1e-8, 124)
        assert a.ztilde.tobytes() != c.ztilde.tobytes()

    def test_workers_do_not_change_output(self, rng):
        g = gen.random_connected(30, rng, p=0.2)
        a = build_oracle(g, 0.5, 1e-8, 7, workers=1)
        b = build_oracle(g, 0.5, 1e-8, 7, workers=4)
        assert a.ztilde.tobytes() == b.ztilde.tobytes()

    def test_rows_do_not_depend_on_k(self, rng):
        # row i's sign stream is keyed by (seed, i), so the first block of rows
        # is identical whatever the total k
        g = gen.random_connected(20, rng, p=0.3)
        a = build_oracle(g, 0.5, 1e-8, 7, k=res_mod.BLOCK_ROWS)
        b = build_oracle(g, 0.5, 1e-8, 7, k=3 * res_mod.BLOCK_ROWS)
        scale = math.sqrt(b.k / a.k)
        np.testing.assert_allclose(a.ztilde, scale * b.ztilde[: a.k], rtol=1e-6, atol=1e-12)

    def test_sign_matrix_distribution(self):
        g = gen.complete(30)
        k = 64
        Y = res_mod._sketch_rows(g, 5, k, range(k))
        assert Y.shape == (k, 30)
        np.testing.assert_allclose(Y.sum(axis=1), 0.0, atol=1e-12)
        bits = [res_mod.rng.stream(5, res_mod.rng.ORACLE, i).integers(0, 2, size=g.m, dtype=np.int8) for i in range(k)]
        frac = np.mean(bits)
        assert abs(frac - 0.5) < 4 * math.sqrt(0.25 / (k * g.m))

    def test_solver_failure_names_row(self):
        g = gen.path(300, np.exp(np.linspace(0, 12, 299)))
        with pytest.raises(res_mod.SolverError) as info:
            build_oracle(g, 0.5, 1e-12, 0, safety=1.0, max_iter=5)
        assert info.value.row == 0

    def test_probabilistic_accuracy(self):
        passed = 0
        for seed in range(10):
            r = np.random.default_rng(1000 + seed)
            g = gen.random_connected(int(r.integers(10, 40)), r, p=0.2, ratio=100.0)
            o = build_oracle(g, 0.5, 1e-10, seed, safety=1.0)
            R = exact_all_pairs(g)
            iu, iv = np.triu_indices(g.n, 1)
            passed += _within(o.query_pairs(iu, iv), R[iu, iv], 0.5)
        assert passed >= 9


class TestPersistence:
    def test_roundtrip(self, tmp_path, rng):
        g = gen.random_connected(20, rng, p=0.2)
        o = build_oracle(g, 0.4, 1e-7, 2**62 + 5)
        path = tmp_path / "o.bin"
        o.save(path)
        back = ResistanceOracle.load(path)
        assert back.ztilde.tobytes() == o.ztilde.tobytes()
        assert (back.n, back.k, back.epsilon, back.delta, back.seed) == (o.n, o.k, 0.4, 1e-7, 2**62 + 5)
        assert back.query(3, 7) == o.query(3, 7)

    def test_header_layout(self, tmp_path, p3):
        o = build_oracle(p3, 1.0, 1e-6, 9, k=2)
        path = tmp_path / "o.bin"
        o.save(path)
        raw = path.read_bytes()
        assert raw[:4] == b"RSPO"
        assert raw[4] == 1
        assert len(raw) == 48 + 8 * 2 * 3
        np.testing.assert_array_equal(np.frombuffer(raw[48:], "<f8").reshape(2, 3), o.ztilde)

    @pytest.mark.parametrize("mutate, match", [
        (lambda b: b"XXXX" + b[4:], "magic"),
        (lambda b: b[:4] + b"\x02" + b[5:], "version"),
        (lambda b: b[:-8], "expected"),
        (lambda b: b[:10], "truncated"),
    ])
    def test_corrupt(self, tmp_path, p3, mutate, match):
        o = build_oracle(p3, 1.0, 1e-6, 9, k=2)
        path = tmp_path / "o.bin"
        o.save(path)
        path.write_bytes(mutate(path.read_bytes()))
        with pytest.raises(GraphFormatError, match=match):
            ResistanceOracle.load(path)
