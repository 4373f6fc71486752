import numpy as np
import pytest

import netexp as nx
from netexp.outcomes import OutcomeModelError


def path3():
    return nx.InterferenceGraph(3, [(0, 1), (1, 2)])


def test_linear_path_ate():
    # beta + delta * c * mean degree = 1 + 0.1 * 4/3
    model = nx.LinearModel(path3(), alpha=0.0, beta=1.0, weights=0.1, delta=1.0)
    assert nx.ground_truth_ate(model) == pytest.approx(1.0 + 0.1 * 4 / 3)


def test_linear_evaluate_matches_formula():
    model = nx.LinearModel(path3(), alpha=2.0, beta=1.0, weights=0.1, delta=1.0)
    y = model.evaluate_all([1, 0, 1])
    assert y == pytest.approx([2 + 1 + 0.0, 2 + 0 + 0.2, 2 + 1 + 0.0])
    assert model.evaluate(1, [1, 0, 1]) == pytest.approx(2.2)


def test_linear_dict_weights():
    g = nx.InterferenceGraph(2, [(0, 1)], directed=True)
    model = nx.LinearModel(g, alpha=0.0, beta=0.0, weights={(0, 1): 3.0}, delta=1.0)
    assert model.evaluate_all([1, 0]) == pytest.approx([0.0, 3.0])
    with pytest.raises(OutcomeModelError):
        nx.LinearModel(g, 0.0, 0.0, {(1, 0): 3.0}, 1.0)


def test_multiplicative_single_neighbor():
    g = nx.InterferenceGraph(2, [(0, 1)], directed=True)
    model = nx.MultiplicativeModel(g, c0=1.0, weights=1.0, delta=0.5)
    # node 1 has one in-neighbor: c0 * (1 + 0.5 * z0)
    assert model.evaluate_all([1, 0]) == pytest.approx([1.0, 1.5])
    assert model.evaluate_all([0, 0]) == pytest.approx([1.0, 1.0])


def test_multiplicative_degree_normalization():
    g = nx.InterferenceGraph(3, [(1, 0), (2, 0)], directed=True)
    model = nx.MultiplicativeModel(g, c0=2.0, weights=1.0, delta=0.5)
    # node 0: 2 * (1 + 0.25)^2 with both neighbors treated
    assert model.evaluate(0, [0, 1, 1]) == pytest.approx(2 * 1.25 ** 2)


def test_low_order_pair_term():
    g = nx.InterferenceGraph(3, [(1, 0), (2, 0)], directed=True)
    model = nx.LowOrderModel(g, c0=0.0, terms=[(0, (1, 2), 2.0)], delta=0.5)
    # c * (delta z1) * (delta z2) = 2 * 0.25
    assert nx.ground_truth_ate(model) == pytest.approx(0.5 / 3)
    assert model.evaluate(0, [0, 1, 1]) == pytest.approx(0.5)
    assert model.evaluate(0, [0, 1, 0]) == 0.0
    # analytic smoothness constant: |c| * delta^0 for the pair term
    assert model.smoothness_L == pytest.approx(2.0)


def test_low_order_rejects_foreign_subset():
    g = nx.InterferenceGraph(3, [(1, 0)], directed=True)
    with pytest.raises(OutcomeModelError):
        nx.LowOrderModel(g, 0.0, [(0, (2,), 1.0)], 0.5)
    with pytest.raises(OutcomeModelError):
        nx.LowOrderModel(g, 0.0, [(0, (1, 1), 1.0)], 0.5)


def test_benchmark_second_difference():
    # product term: c1 (1+c2 z_j)(1+c2 z_k)(1+c2 z_i); its second difference
    # in (z_j, z_k) is c1 c2^2 when i is control, times (1+c2) when treated
    g = nx.InterferenceGraph(3, [(1, 0), (2, 0)], directed=True)
    model = nx.BenchmarkModel(g, c0=1.0, c1=1.0, c2=0.2)

    def second_diff(zi):
        f = lambda zj, zk: model.evaluate(0, [zi, zj, zk])
        return f(1, 1) - f(1, 0) - f(0, 1) + f(0, 0)

    assert second_diff(0) == pytest.approx(0.04)
    assert second_diff(1) == pytest.approx(0.048)


def test_benchmark_isolated_node():
    g = nx.InterferenceGraph(1, [])
    model = nx.BenchmarkModel(g, c0=2.0, c1=1.0, c2=0.1)
    assert model.evaluate(0, [1]) == pytest.approx(2.0 + 1.1)
    assert model.evaluate(0, [0]) == pytest.approx(1.0)


def test_benchmark_negative_c2_rejected():
    with pytest.raises(OutcomeModelError):
        nx.BenchmarkModel(path3(), 1.0, 1.0, -0.1)


def test_markov_hand_example():
    chain = nx.MarkovChainSpec(
        initial=[1.0, 0.0],
        transition=np.eye(2),
        perturbation=[[-0.5, 0.5], [0.0, 0.0]],
        reward_control=[0.0, 1.0],
        reward_treated=[0.0, 1.0],
        delta=1.0,
    )
    model = nx.MarkovianModel(chain, horizon=3, truncation=3)
    # all-ones trajectory visits state-1 mass 0, 0.5, 0.75; all-zeros stays at 0
    assert model.evaluate_all([1, 1, 1]) == pytest.approx([0.0, 0.5, 0.75])
    assert model.evaluate_all([0, 0, 0]) == pytest.approx([0.0, 0.0, 0.0])
    assert nx.ground_truth_ate(model) == pytest.approx(1.25 / 3)


def test_markov_truncation_window_graph():
    chain = nx.MarkovChainSpec([1.0, 0.0], np.eye(2), np.zeros((2, 2)),
                               [0.0, 1.0], [0.0, 1.0], delta=0.0)
    model = nx.MarkovianModel(chain, horizon=5, truncation=2)
    g = model.graph
    assert sorted(g.in_neighbors(4)) == [2, 3]
    assert sorted(g.in_neighbors(1)) == [0]
    with pytest.raises(OutcomeModelError):
        nx.MarkovianModel(chain, horizon=2, truncation=3)


def test_markov_validation():
    with pytest.raises(OutcomeModelError):
        nx.MarkovChainSpec([0.5, 0.6], np.eye(2), np.zeros((2, 2)),
                           [0, 1], [0, 1], delta=0.0)
    with pytest.raises(OutcomeModelError):
        nx.MarkovChainSpec([1.0, 0.0], [[1.0, 0.5], [0.0, 1.0]], np.zeros((2, 2)),
                           [0, 1], [0, 1], delta=0.0)
    with pytest.raises(OutcomeModelError):
        # treated matrix leaves the simplex
        nx.MarkovChainSpec([1.0, 0.0], np.eye(2), [[1.0, -1.0], [0.0, 0.0]],
                           [0, 1], [0, 1], delta=2.0)


def test_noise_reproducible_per_trial():
    model = nx.LinearModel(path3(), 0.0, 1.0, 0.1, 1.0, noise_std=0.5, noise_seed=7)
    z = np.array([1, 0, 1])
    a = model.evaluate_all(z, trial=3)
    b = model.evaluate_all(z, trial=3)
    c = model.evaluate_all(z, trial=4)
    clean = model.evaluate_all(z)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, clean)
    assert np.array_equal(clean, model.evaluate_all(z, trial=None))


def test_assignment_length_checked():
    model = nx.LinearModel(path3(), 0.0, 1.0, 0.1, 1.0)
    with pytest.raises(OutcomeModelError):
        model.evaluate_all([1, 0])


def test_outcomes_depend_only_on_in_neighborhood():
    g = nx.erdos_renyi(30, 4.0, seed=5)
    rng = np.random.default_rng(0)
    model = nx.random_low_order_model(g, rng)
    z = rng.integers(0, 2, 30).astype(float)
    y = model.evaluate_all(z)
    for i in [0, 7, 19]:
        allowed = set(g.in_neighbors(i).tolist()) | {i}
        outside = [j for j in range(30) if j not in allowed]
        z2 = z.copy()
        z2[outside] = 1 - z2[outside]
        assert model.evaluate_all(z2)[i] == pytest.approx(y[i])


def test_model_from_config_kinds():
    g = path3()
    assert isinstance(nx.model_from_config(g, {"kind": "linear"}), nx.LinearModel)
    assert isinstance(nx.model_from_config(g, {"kind": "multiplicative", "c0": 2.0}),
                      nx.MultiplicativeModel)
    assert isinstance(nx.model_from_config(g, {"kind": "benchmark", "c2": 0.05}),
                      nx.BenchmarkModel)
    m = nx.model_from_config(g, {"kind": "low_order", "c0": 1.0, "delta": 0.5,
                                 "terms": [{"node": 1, "subset": [0, 2], "coeff": 2.0}]})
    assert m.evaluate(1, [1, 0, 1]) == pytest.approx(1.5)
    r = nx.model_from_config(g, {"kind": "random_low_order", "seed": 3})
    assert isinstance(r, nx.LowOrderModel)
    with pytest.raises(OutcomeModelError):
        nx.model_from_config(g, {"kind": "mystery"})


def test_model_from_config_random_weights_deterministic():
    g = nx.erdos_renyi(20, 3.0, seed=0)
    spec = {"kind": "linear", "weights": {"kind": "uniform", "low": 0.0,
                                          "high": 1.0, "seed": 5}}
    a = nx.model_from_config(g, spec)
    b = nx.model_from_config(g, spec)
    assert np.array_equal(a.weights, b.weights)
