import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from strategies import graphs
from sublinear_graphs import multi_edge_sampler as mes
from sublinear_graphs.access_oracle import AccessModel, Oracle
from sublinear_graphs.biased_sampler import preprocess, verify_success_event
from sublinear_graphs.errors import ContractError, DomainError, EmptyGraphError, UnsatisfiableError
from sublinear_graphs.generators import complete, star
from sublinear_graphs.graph_core import Graph
from sublinear_graphs.multi_edge_sampler import (
    BernoulliPlan, EdgeSampleSet, bernoulli_samples, sample_heavy_edges, sample_light_edges,
    sample_with_replacement, sample_without_replacement, wor_from_universe,
)


def _slots(g, edges):
    edges = np.asarray(edges).reshape(-1, 2)
    return np.asarray(g.slot_of(edges[:, 0], edges[:, 1]), dtype=np.int64).reshape(-1)


class TestWorFromUniverse:
    def test_edges(self):
        rng = np.random.default_rng(0)
        assert wor_from_universe(5, 5, rng).tolist() == [0, 1, 2, 3, 4]
        assert wor_from_universe(5, 0, rng).size == 0
        with pytest.raises(DomainError):
            wor_from_universe(3, 4, rng)

    def test_all_pairs_equally_likely(self):
        rng = np.random.default_rng(1)
        N = 100_000
        subsets = list(itertools.combinations(range(6), 2))
        idx = {s: i for i, s in enumerate(subsets)}
        c = np.zeros(15)
        for _ in range(N):
            c[idx[tuple(wor_from_universe(6, 2, rng).tolist())]] += 1
        sd = math.sqrt(N * (1 / 15) * (14 / 15))
        assert np.all(np.abs(c - N / 15) < 5 * sd)

    @given(st.integers(0, 40), st.data())
    def test_is_subset(self, u, data):
        k = data.draw(st.integers(0, u))
        out = wor_from_universe(u, k, np.random.default_rng(u * 41 + k))
        assert len(set(out.tolist())) == k and all(0 <= x < u for x in out.tolist())


def test_plan():
    plan = BernoulliPlan.make(100, 0.1, 10, 0.1)
    assert plan.theta == math.ceil(math.sqrt(math.log(100) * math.log(1000) / 1.0))
    assert not plan.dense and BernoulliPlan.make(100, 0.95, 1, 0.1).dense


class TestLight:
    def test_zero_rate_is_empty(self, k3):
        o = Oracle(k3, "hash_ordered", seed=0)
        assert len(sample_light_edges(o, 3, 1e-15)) == 0

    def test_dense_rate_rejected(self, k3):
        with pytest.raises(ContractError):
            sample_light_edges(Oracle(k3, "hash_ordered"), 3, 0.95)

    def test_heavy_only_graph_is_empty(self):
        o = Oracle(complete(8), "hash_ordered", seed=0)
        assert all(len(sample_light_edges(o, 3, 0.5)) == 0 for _ in range(50))

    def test_k3_rates_and_covariance(self, k3):
        o = Oracle(k3, "hash_ordered", seed=1)
        N = 10_000
        X = np.zeros((N, 6))
        for i in range(N):
            X[i, _slots(k3, sample_light_edges(o, 3, 0.5).edges)] = 1
        sd = math.sqrt(0.25 / N)
        assert np.all(np.abs(X.mean(axis=0) - 0.5) < 5 * sd)
        c = np.cov(X, rowvar=False)[~np.eye(6, dtype=bool)]
        assert np.all(np.abs(c) < 5 * 0.25 / math.sqrt(N))


class TestHeavy:
    def test_no_heavy_vertices(self):
        g = star(5)
        o = Oracle(g, "hash_ordered", seed=0)
        s = preprocess(o, 10, 0.1)
        assert len(sample_heavy_edges(s, 10, 0.5)) == 0

    def test_threshold_mismatch(self, k4):
        s = preprocess(Oracle(k4, "hash_ordered"), 2, 0.1)
        with pytest.raises(ContractError):
            sample_heavy_edges(s, 3, 0.1)

    def test_star_centre_binomial(self):
        g = star(100)
        o = Oracle(g, "hash_ordered", seed=2)
        s = preprocess(o, 10, 0.1)
        assert verify_success_event(s, g)
        assert min(1, 2 * 10 * 0.05) == 1
        N = 10_000
        sizes = np.array([len(sample_heavy_edges(s, 10, 0.05)) for _ in range(N)])
        assert abs(sizes.mean() - 5) < 5 * math.sqrt(4.75 / N)
        # sd of a sample variance ~ sqrt((mu4 - sigma^4)/N); for Bin(100, .05) mu4 ~ 3 sigma^4
        assert abs(sizes.var() - 4.75) < 5 * math.sqrt(2 * 4.75**2 / N) * 1.2
        emp = np.bincount(sizes, minlength=20)[:12] / N
        pmf = stats.binom.pmf(np.arange(12), 100, 0.05)
        assert np.all(np.abs(emp - pmf) < 5 * np.sqrt(pmf * (1 - pmf) / N) + 1e-12)


class TestBernoulli:
    def test_full_rate_returns_everything(self, k4):
        o = Oracle(k4, "hash_ordered", seed=0)
        for S in bernoulli_samples(o, 1.0, 3, 0.1):
            assert S.as_set() == set(map(tuple, k4.directed_edges().tolist()))

    def test_dense_path_fresh_sets(self):
        g = complete(10)
        o = Oracle(g, "hash_ordered", seed=0)
        sets = bernoulli_samples(o, 0.95, 200, 0.1)
        sizes = np.array([len(S) for S in sets])
        assert abs(sizes.mean() - 0.95 * 90) < 5 * math.sqrt(90 * 0.95 * 0.05 / 200)
        assert len({frozenset(S.as_set()) for S in sets}) > 100

    def test_single_preprocess(self, monkeypatch):
        calls = []
        real = mes.preprocess

        def spy(*a, **kw):
            calls.append(1)
            return real(*a, **kw)
        monkeypatch.setattr(mes, "preprocess", spy)
        bernoulli_samples(Oracle(complete(15), "hash_ordered", seed=0), 0.1, 25, 0.1)
        assert len(calls) == 1

    @settings(max_examples=30)
    @given(graphs(min_n=2, max_n=16), st.floats(0.01, 1.0), st.integers(0, 1000))
    def test_sets_are_valid_and_disjoint(self, g, p, seed):
        o = Oracle(g, "hash_ordered", seed=seed)
        for S in bernoulli_samples(o, p, 3, 0.1):
            keys = [tuple(e) for e in S.edges.tolist()]
            assert len(keys) == len(set(keys))
            assert all(g.has_edge(u, v) for u, v in keys)

    def test_light_heavy_split_by_source_degree(self):
        g = star(40)
        o = Oracle(g, "hash_ordered", seed=4)
        plan_theta = 5
        s = preprocess(o, plan_theta, 0.1)
        light = sample_light_edges(o, plan_theta, 0.3)
        heavy = sample_heavy_edges(s, plan_theta, 0.3)
        assert np.all(g.degrees[light.edges[:, 0]] < plan_theta)
        assert np.all(g.degrees[heavy.edges[:, 0]] >= plan_theta)
        assert not light.as_set() & heavy.as_set()

    def test_adapter_transparency_k20(self):
        g = complete(20)
        for seed in range(5):
            native = bernoulli_samples(Oracle(g, "hash_ordered", seed=seed), 0.1, 20, 0.05)
            simulated = bernoulli_samples(Oracle(g, AccessModel.indexed(), seed=seed), 0.1, 20, 0.05)
            assert [S.edges.tolist() for S in native] == [S.edges.tolist() for S in simulated]

    def test_edge_sample_set(self):
        s = EdgeSampleSet([[0, 1], [1, 2]], "light")
        assert (0, 1) in s and (2, 1) not in s and len(s) == 2
        assert [tuple(e) for e in s] == [(0, 1), (1, 2)]
        assert len(EdgeSampleSet.union(s, EdgeSampleSet([[2, 0]]))) == 3


class TestWithoutReplacement:
    def test_all_edges(self, k4):
        o = Oracle(k4, "hash_ordered", seed=0)
        e = sample_without_replacement(o, 12, 0.1)
        assert sorted(map(tuple, e.tolist())) == sorted(map(tuple, k4.directed_edges().tolist()))

    def test_too_many(self, k3):
        with pytest.raises(UnsatisfiableError):
            sample_without_replacement(Oracle(k3, "hash_ordered", seed=0), 7, 0.1)

    def test_single_draw_marginal(self):
        g = star(4)
        o = Oracle(g, "hash_ordered", seed=1)
        N = 8000
        c = np.bincount(np.concatenate([_slots(g, sample_without_replacement(o, 1, 0.1)) for _ in range(N)]),
                        minlength=8)
        assert np.all(np.abs(c - N / 8) < 5 * math.sqrt(N * (1 / 8) * (7 / 8)))

    def test_escalation_doubles(self, monkeypatch, k4):
        ps = []
        real = mes.bernoulli_samples

        def spy(o, p, *a, **kw):
            ps.append(p)
            return real(o, p, *a, **kw)
        monkeypatch.setattr(mes, "bernoulli_samples", spy)
        sample_without_replacement(Oracle(k4, "hash_ordered", seed=0), 12, 0.1)
        assert ps[0] == pytest.approx(1 / 16)
        assert all(b == pytest.approx(min(1, 2 * a)) for a, b in zip(ps, ps[1:]))
        assert ps[-1] == 1.0


class TestWithReplacement:
    def test_single_edge_graph(self):
        g = Graph.from_edges(2, [(0, 1)])
        o = Oracle(g, "hash_ordered", seed=0)
        e = np.concatenate([sample_with_replacement(o, 5, 0.1) for _ in range(400)])
        assert set(map(tuple, e.tolist())) == {(0, 1), (1, 0)}
        assert abs(np.mean(e[:, 0] == 0) - 0.5) < 5 * math.sqrt(0.25 / len(e))

    def test_marginal(self):
        g = star(3)
        o = Oracle(g, "hash_ordered", seed=1)
        N = 6000
        c = np.bincount(np.concatenate([_slots(g, sample_with_replacement(o, 1, 0.1)) for _ in range(N)]),
                        minlength=6)
        assert np.all(np.abs(c - N / 6) < 5 * math.sqrt(N * (1 / 6) * (5 / 6)))

    def test_empty(self):
        with pytest.raises(EmptyGraphError):
            sample_with_replacement(Oracle(Graph.from_edges(4, []), "hash_ordered"), 2, 0.1)

    def test_indexed_model_via_simulation(self, k4):
        o = Oracle(k4, AccessModel.indexed(), seed=0)
        e = sample_with_replacement(o, 4, 0.1)
        assert all(k4.has_edge(u, v) for u, v in e.tolist())
        assert o.counters.hash == 0 and o.counters.ith_neighbor > 0
