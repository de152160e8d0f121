import numpy as np
import pytest

from dolearn.admg import Admg, GraphError
from dolearn.scm import (
    CausalBayesNet,
    CbnNode,
    NonStandardForm,
    StateSpaceTooLarge,
    check_strong_positivity,
    exact_interventional,
    exact_observational,
    latent_project,
    random_admg,
    random_net_for,
    sample_observational,
)
from dolearn.verify import exact_tv


def coin(name, p1=0.5, parents=(), rows=None, hidden=False, card=2):
    if rows is None:
        rows = [[1 - p1, p1]]
    return CbnNode(name, card, parents, np.array(rows, dtype=float), hidden=hidden)


def bow_net(y_rows):
    """U -> X, U -> Y, X -> Y with a fair hidden coin and X = U."""
    return CausalBayesNet([
        coin("U", hidden=True),
        CbnNode("X", 2, ("U",), np.array([[1.0, 0.0], [0.0, 1.0]])),
        CbnNode("Y", 2, ("X", "U"), np.array(y_rows, dtype=float)),
    ])


class TestConstruction:
    def test_bad_row_sum(self):
        with pytest.raises(GraphError):
            CbnNode("A", 2, (), np.array([[0.5, 0.6]]))

    def test_bad_row_count(self):
        with pytest.raises(GraphError):
            CausalBayesNet([
                coin("A"),
                CbnNode("B", 2, ("A",), np.array([[0.5, 0.5]])),
            ])

    def test_unknown_parent(self):
        with pytest.raises(GraphError):
            CausalBayesNet([CbnNode("B", 2, ("A",), np.eye(2))])


class TestSampling:
    def test_deterministic_net_forces_assignment(self):
        net = CausalBayesNet([
            coin("A", rows=[[0.0, 1.0]]),
            CbnNode("B", 2, ("A",), np.array([[0.0, 1.0], [1.0, 0.0]])),
        ])
        s = sample_observational(net, seed=0, m=50)
        assert (s.column("A") == 1).all()
        assert (s.column("B") == 0).all()

    def test_single_coin_frequency(self):
        net = CausalBayesNet([coin("A", p1=0.3)])
        s = sample_observational(net, seed=42, m=100_000)
        freq = s.column("A").mean()
        assert abs(freq - 0.3) < 0.01

    def test_seed_determinism(self):
        net = random_net_for(random_admg(1, 4), seed=5)
        a = sample_observational(net, seed=9, m=500)
        b = sample_observational(net, seed=9, m=500)
        assert (a.values == b.values).all()

    def test_hidden_columns_dropped(self):
        net = bow_net([[1, 0], [0, 1], [0, 1], [1, 0]])
        s = sample_observational(net, seed=1, m=10)
        assert s.names == ("X", "Y")


class TestExactObservational:
    def test_independent_coins_uniform(self):
        net = CausalBayesNet([coin("A"), coin("B")])
        t = exact_observational(net)
        assert np.allclose(t.probs, 0.25)

    def test_bow_all_uniform_cpts(self):
        net = CausalBayesNet([
            coin("U", hidden=True),
            CbnNode("X", 2, ("U",), np.full((2, 2), 0.5)),
            CbnNode("Y", 2, ("X", "U"), np.full((4, 2), 0.5)),
        ])
        assert np.allclose(exact_observational(net).probs, 0.25)

    def test_total_is_one(self):
        net = random_net_for(random_admg(3, 5), seed=8)
        assert abs(exact_observational(net).total - 1.0) < 1e-12

    def test_state_ceiling(self):
        nodes = [coin(f"A{i}", card=4, rows=[[0.25] * 4]) for i in range(13)]
        with pytest.raises(StateSpaceTooLarge):
            exact_observational(CausalBayesNet(nodes))


class TestExactInterventional:
    def test_chain_no_confounding_matches_conditional(self):
        net = CausalBayesNet([
            coin("X", p1=0.7),
            CbnNode("Y", 2, ("X",), np.array([[0.9, 0.1], [0.2, 0.8]])),
        ])
        t = exact_interventional(net, {"X": 1})
        assert np.allclose(t.probs, [0.2, 0.8])

    def test_bow_confounding_witness(self):
        # Y = X xor U: observationally Y is constant 0, but do(X=1) flips half
        net = bow_net([[1, 0], [0, 1], [0, 1], [1, 0]])
        obs_y = exact_observational(net).marginal_to({"Y"})
        do_y = exact_interventional(net, {"X": 1})
        assert np.allclose(obs_y.probs, [1.0, 0.0])
        assert np.allclose(do_y.probs, [0.5, 0.5])

    def test_empty_intervention_equals_observational(self):
        net = random_net_for(random_admg(11, 5), seed=2)
        a = exact_observational(net)
        b = exact_interventional(net, {})
        assert a.names == b.names
        assert np.array_equal(a.probs, b.probs)


class TestLatentProjection:
    def test_bow(self):
        net = bow_net([[1, 0], [0, 1], [0, 1], [1, 0]])
        assert latent_project(net) == Admg.build(["X", "Y"], [("X", "Y")], [("X", "Y")])

    def test_no_hiddens(self):
        net = CausalBayesNet([coin("A"), CbnNode("B", 2, ("A",), np.eye(2))])
        g = latent_project(net)
        assert g.bidirected == frozenset()

    def test_fig3a_realization_roundtrip(self, fig3a):
        assert latent_project(random_net_for(fig3a, seed=3)) == fig3a

    def test_random_roundtrip(self):
        for seed in range(6):
            g = random_admg(seed, 5, n_bidirected=2)
            assert latent_project(random_net_for(g, seed=seed)) == g

    def test_nonstandard_three_children(self):
        net = CausalBayesNet([
            coin("U", hidden=True),
            CbnNode("A", 2, ("U",), np.eye(2)),
            CbnNode("B", 2, ("U",), np.eye(2)),
            CbnNode("C", 2, ("U",), np.eye(2)),
        ])
        with pytest.raises(NonStandardForm):
            latent_project(net)

    def test_nonstandard_hidden_with_parent(self):
        net = CausalBayesNet([
            coin("A"),
            CbnNode("U", 2, ("A",), np.eye(2), hidden=True),
            CbnNode("B", 2, ("U",), np.eye(2)),
            CbnNode("C", 2, ("U",), np.eye(2)),
        ])
        with pytest.raises(NonStandardForm):
            latent_project(net)


class TestStrongPositivity:
    def test_uniform_independent(self):
        net = CausalBayesNet([coin("A"), CbnNode("B", 2, ("A",), np.full((2, 2), 0.5))])
        ok, reports = check_strong_positivity(net, [["B"]], alpha=0.2)
        assert ok
        assert reports[0].min_probability == pytest.approx(0.25)

    def test_zero_probability_event_fails(self):
        net = CausalBayesNet([coin("A", p1=1.0), coin("B")])
        ok, reports = check_strong_positivity(net, [["A"], ["B"]], alpha=1e-6)
        assert not ok
        assert reports[0].min_probability == 0.0
        assert reports[0].worst_event == {"A": 0}

    def test_fig3a_bounded_cpts(self, fig3a):
        net = random_net_for(fig3a, seed=4)
        clipped = []
        for nd in net.nodes:
            rows = np.clip(nd.cpt, 0.2, 0.8)
            rows = rows / rows.sum(axis=1, keepdims=True)
            clipped.append(CbnNode(nd.name, nd.cardinality, nd.parents, rows, nd.hidden))
        net = CausalBayesNet(clipped)
        ok, reports = check_strong_positivity(net, [["X", "Z2"]], alpha=0.2**3)
        assert ok
        assert set(reports[0].event_scope) == {"X", "Z1", "Z2"}


class TestEmpiricalConvergence:
    def test_tv_to_exact_small_net(self):
        g = random_admg(13, 4, n_bidirected=1)
        net = random_net_for(g, seed=13)
        s = sample_observational(net, seed=21, m=100_000)
        exact = exact_observational(net)
        counts = s.counts_over(exact.names, exact.cards)
        from dolearn.tables import PmfTable

        emp = PmfTable(exact.names, counts / s.m)
        assert exact_tv(emp, exact) <= 0.02
