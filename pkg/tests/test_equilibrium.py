import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opiniongame import Graph, laplacians, nash_direct, nash_iterative, node_cost, social_cost, social_opt
from opiniongame.equilibrium import (
    nash_node_weighted,
    node_costs,
    opt_node_weighted,
    reduce_fixed_opinions,
)
from opiniongame.errors import GraphError, UnderdeterminedError
from opiniongame.generators import gen_path3, gen_random, gen_star
from oracles import best_response_nash, loop_cost, lstsq_optimum
from strategies import graph_and_vector, graphs


class TestCosts:
    def test_path3_node_cost(self):
        assert node_cost(gen_path3(), [0.25, 0.5, 0.75], 0) == pytest.approx(1 / 8, abs=1e-15)

    def test_edgeless_zero(self):
        g = Graph(n=3, opinions=[0.1, 0.2, 0.3])
        assert social_cost(g, g.opinions) == 0.0

    def test_star_leaf_cost(self):
        g = gen_star(9)
        y = nash_direct(g).opinions
        assert node_cost(g, y, 3) == pytest.approx(0.5, abs=1e-12)

    def test_path3_social_costs(self):
        g = gen_path3()
        assert social_cost(g, [0.25, 0.5, 0.75]) == pytest.approx(3 / 8, abs=1e-15)
        assert social_cost(g, [1 / 3, 0.5, 2 / 3]) == pytest.approx(1 / 3, abs=1e-15)

    @given(graph_and_vector())
    @settings(max_examples=80, deadline=None)
    def test_matrix_identity(self, gz):
        g, z = gz
        s = g.opinions
        A = laplacians(g).A
        expected = np.sum((z - s) ** 2) + z @ A @ z
        got = social_cost(g, z)
        assert got == pytest.approx(expected, rel=1e-10, abs=1e-12)
        assert got == pytest.approx(loop_cost(g.n, g.edges, g.directed, s, z), rel=1e-10, abs=1e-12)


class TestNash:
    def test_path3(self):
        r = nash_direct(gen_path3())
        np.testing.assert_allclose(r.opinions, [0.25, 0.5, 0.75], atol=1e-15)
        assert r.social_cost == pytest.approx(0.375, abs=1e-15)
        assert r.iterations == 0 and r.residual <= 1e-10

    def test_star(self):
        r = nash_direct(gen_star(9))
        assert r.opinions[0] == 1.0
        np.testing.assert_allclose(r.opinions[1:], 0.5, atol=1e-15)
        assert r.social_cost == pytest.approx(4.0, abs=1e-12)

    def test_edgeless(self):
        g = Graph(n=3, opinions=[0.3, -1, 2])
        r = nash_direct(g)
        np.testing.assert_array_equal(r.opinions, g.opinions)
        assert r.social_cost == 0.0

    def test_iterative_path3(self):
        r = nash_iterative(gen_path3(), tol=1e-12)
        np.testing.assert_allclose(r.opinions, [0.25, 0.5, 0.75], atol=1e-10)
        assert r.converged

    def test_iterative_edgeless_one_step(self):
        r = nash_iterative(Graph(n=2, opinions=[0, 1]))
        assert r.iterations == 1 and r.converged

    def test_iterative_random(self):
        g = gen_random(8, 0.4, seed=11)
        np.testing.assert_allclose(nash_iterative(g).opinions, nash_direct(g).opinions, atol=1e-8)

    def test_iterative_limit_flag(self):
        g = gen_random(10, 0.8, seed=2)
        r = nash_iterative(g, tol=1e-15, max_iter=3)
        assert not r.converged and r.iterations == 3

    def test_iterative_bad_tol(self):
        with pytest.raises(ValueError):
            nash_iterative(gen_path3(), tol=0.0)

    @given(graphs(max_n=10))
    @settings(max_examples=60, deadline=None)
    def test_fixed_point_and_best_response_oracle(self, g):
        y = nash_direct(g).opinions
        W, s = g.weights, g.opinions
        avg = (s + W @ y) / (1.0 + W.sum(axis=1))
        np.testing.assert_allclose(y, avg, atol=1e-10)
        np.testing.assert_allclose(y, best_response_nash(g.n, g.edges, g.directed, s), atol=1e-9)

    @given(graphs(max_n=10), st.floats(-3, 3), st.floats(0.1, 4))
    @settings(max_examples=50, deadline=None)
    def test_shift_and_scale(self, g, c, k):
        y, x = nash_direct(g), social_opt(g)
        gs = g.with_opinions(g.opinions + c)
        np.testing.assert_allclose(nash_direct(gs).opinions, y.opinions + c, atol=1e-10)
        np.testing.assert_allclose(social_opt(gs).opinions, x.opinions + c, atol=1e-10)
        assert nash_direct(gs).social_cost == pytest.approx(y.social_cost, rel=1e-8, abs=1e-10)
        gk = g.with_opinions(k * g.opinions)
        np.testing.assert_allclose(nash_direct(gk).opinions, k * y.opinions, atol=1e-10)
        assert social_opt(gk).social_cost == pytest.approx(k**2 * x.social_cost, rel=1e-8, abs=1e-10)

    @pytest.mark.parametrize("seed", range(6))
    def test_iterative_matches_direct(self, seed):
        g = gen_random(50, 0.1, seed=seed)
        np.testing.assert_allclose(nash_iterative(g).opinions, nash_direct(g).opinions, atol=1e-8)


class TestOptimum:
    def test_path3(self):
        r = social_opt(gen_path3())
        np.testing.assert_allclose(r.opinions, [1 / 3, 0.5, 2 / 3], atol=1e-15)
        assert r.social_cost == pytest.approx(1 / 3, abs=1e-15)

    def test_star(self):
        x = social_opt(gen_star(9)).opinions
        assert x[0] == pytest.approx(0.2, abs=1e-12)
        np.testing.assert_allclose(x[1:], 0.1, atol=1e-12)

    def test_constant(self):
        g = gen_random(6, 0.5, seed=1).with_opinions(np.full(6, 0.7))
        r = social_opt(g)
        np.testing.assert_allclose(r.opinions, 0.7, atol=1e-14)
        assert r.social_cost == pytest.approx(0.0, abs=1e-20)

    @given(graphs(max_n=10))
    @settings(max_examples=60, deadline=None)
    def test_optimality(self, g):
        x = social_opt(g)
        np.testing.assert_allclose(x.opinions, lstsq_optimum(g.n, g.edges, g.directed, g.opinions), atol=1e-9)
        assert x.social_cost <= nash_direct(g).social_cost + 1e-12
        assert x.social_cost == pytest.approx(social_cost(g, x.opinions), rel=1e-10, abs=1e-14)

    def test_optimality_random_probes(self):
        rng = np.random.default_rng(3)
        for seed in range(10):
            g = gen_random(7, 0.4, seed=seed)
            c = social_opt(g).social_cost
            for _ in range(100):
                assert c <= social_cost(g, rng.uniform(-1, 2, 7)) + 1e-12

    @given(graphs(max_n=10, directed=False))
    @settings(max_examples=60, deadline=None)
    def test_undirected_upper_bound_two(self, g):
        assert nash_direct(g).social_cost <= 2 * social_opt(g).social_cost + 1e-9


class TestNodeWeights:
    def test_unit_weights_reduce(self):
        g = gen_random(6, 0.5, seed=4)
        gw = g.replace(node_weights=np.ones(6))
        np.testing.assert_allclose(nash_node_weighted(gw).opinions, nash_direct(g).opinions, atol=1e-14)
        np.testing.assert_allclose(opt_node_weighted(gw).opinions, social_opt(g).opinions, atol=1e-14)

    def test_requires_weights(self):
        with pytest.raises(GraphError):
            nash_node_weighted(gen_path3())

    def test_two_node_pathology(self):
        eps = 1e-6
        g = Graph(n=2, edges=((0, 1, 1.0),), opinions=[0.0, 1.0], node_weights=[1.0, eps])
        assert nash_node_weighted(g).social_cost == pytest.approx(0.5, abs=1e-12)
        assert opt_node_weighted(g).social_cost <= eps

    def test_balance_equations(self):
        rng = np.random.default_rng(8)
        g = gen_random(7, 0.5, seed=8).replace(node_weights=rng.uniform(0.1, 5, 7))
        y = nash_node_weighted(g).opinions
        w, W, s = g.node_weights, g.weights, g.opinions
        bal = w * (y - s) + (W * (y[:, None] - y[None, :])).sum(axis=1)
        assert np.abs(bal).max() <= 1e-12

    def test_weighted_cost(self):
        g = Graph(n=2, edges=((0, 1, 2.0),), opinions=[0.0, 1.0], node_weights=[3.0, 0.5])
        z = np.array([0.2, 0.9])
        assert social_cost(g, z) == pytest.approx(loop_cost(2, g.edges, True, g.opinions, z, g.node_weights))

    def test_unanchored_component(self):
        g = Graph(n=4, edges=((0, 1, 1.0), (2, 3, 1.0)), opinions=[0, 1, 0, 1], node_weights=[1, 1, 0, 0],
                  directed=False)
        with pytest.raises(UnderdeterminedError) as exc:
            opt_node_weighted(g)
        assert exc.value.component == [2, 3]

    def test_zero_weight_anchored_via_neighbour(self):
        g = Graph(n=3, edges=((0, 1, 1.0), (1, 2, 1.0)), opinions=[0, 5, 1], node_weights=[1, 0, 1],
                  directed=False)
        np.testing.assert_allclose(opt_node_weighted(g).opinions[1], 0.5, atol=1e-12)


class TestFixedOpinions:
    def test_single_neighbour(self):
        g = Graph(n=2, edges=((0, 1, 1.0),), opinions=[0.0, 0.7], fixed={1})
        red = reduce_fixed_opinions(g)
        assert red.graph.opinions[0] == pytest.approx(0.7)
        assert red.graph.node_weights[0] == 1.0
        assert red.offset == pytest.approx(0.0, abs=1e-15)

    def test_two_neighbours(self):
        g = Graph(n=3, edges=((2, 0, 1.0), (2, 1, 1.0)), opinions=[0.0, 1.0, 0.3], fixed={0, 1})
        red = reduce_fixed_opinions(g)
        assert red.graph.opinions[0] == pytest.approx(0.5)
        assert red.graph.node_weights[0] == 2.0
        assert red.offset == pytest.approx(0.5)

    def test_requires_fixed(self):
        with pytest.raises(GraphError):
            reduce_fixed_opinions(gen_path3())

    @pytest.mark.parametrize("seed", range(8))
    def test_random_reduction(self, seed):
        rng = np.random.default_rng(seed)
        n = 9
        base = gen_random(n, 0.45, seed=seed, directed=bool(seed % 2))
        fixed = set(rng.choice(n, size=3, replace=False).tolist())
        # anchor every free node to some fixed node so the instance is well posed
        extra = tuple((i, int(rng.choice(sorted(fixed))), 1.0) for i in range(n) if i not in fixed)
        g = base.replace(edges=base.edges + extra, fixed=fixed)
        red = reduce_fixed_opinions(g)
        F = red.free_nodes
        y = nash_direct(g).opinions
        np.testing.assert_allclose(nash_direct(red.graph).opinions, y[F], atol=1e-10)
        assert red.offset >= 0
        for z in [y, social_opt(g).opinions, rng.normal(size=n)]:
            z = np.array(z)
            z[sorted(fixed)] = g.opinions[sorted(fixed)]
            assert social_cost(g, z) == pytest.approx(social_cost(red.graph, z[F]) + red.offset, rel=1e-9, abs=1e-9)
        # the optimum of the reduced instance is the optimum of the original on free nodes
        np.testing.assert_allclose(social_opt(red.graph).opinions, social_opt(g).opinions[F], atol=1e-10)

    def test_fixed_node_costs_excluded(self):
        g = Graph(n=2, edges=((0, 1, 1.0), (1, 0, 1.0)), opinions=[0.0, 1.0], fixed={1})
        c = node_costs(g, [0.5, 1.0])
        assert c[1] == 0.0 and c[0] == pytest.approx(0.25)
