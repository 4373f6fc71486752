import numpy as np
import pytest

import netexp as nx
from netexp.design import DesignError


def test_unit_draw_shape_and_values():
    draw = nx.draw_unit_bernoulli(100, 0.3, seed=0, trial=0)
    assert draw.z.shape == (100,)
    assert set(np.unique(draw.z)) <= {0, 1}
    assert draw.kind == "unit"
    assert draw.p == 0.3


def test_unit_draw_mean_near_p():
    draw = nx.draw_unit_bernoulli(20000, 0.3, seed=1, trial=0)
    assert draw.z.mean() == pytest.approx(0.3, abs=0.02)


def test_counter_based_reproducibility():
    a = nx.draw_unit_bernoulli(50, 0.5, seed=4, trial=7)
    b = nx.draw_unit_bernoulli(50, 0.5, seed=4, trial=7)
    c = nx.draw_unit_bernoulli(50, 0.5, seed=4, trial=8)
    assert np.array_equal(a.z, b.z)
    assert not np.array_equal(a.z, c.z)


def test_trial_none_uses_plain_seed():
    a = nx.draw_unit_bernoulli(50, 0.5, seed=4)
    b = nx.draw_unit_bernoulli(50, 0.5, seed=4)
    assert np.array_equal(a.z, b.z)


def test_cluster_draw_broadcast():
    part = nx.contiguous_blocks(10, 5)
    draw = nx.draw_cluster_bernoulli(part, 0.5, seed=2, trial=0)
    assert draw.kind == "cluster"
    assert draw.z_cluster.shape == (2,)
    assert np.array_equal(draw.z, draw.z_cluster[part.assignment])
    # all members of a cluster share one coin
    assert len(set(draw.z[:5])) == 1 and len(set(draw.z[5:])) == 1


def test_degenerate_p_allowed_in_draws():
    assert nx.draw_unit_bernoulli(10, 0.0, seed=0).z.sum() == 0
    assert nx.draw_unit_bernoulli(10, 1.0, seed=0).z.sum() == 10


def test_probability_validation():
    with pytest.raises(DesignError):
        nx.draw_unit_bernoulli(10, 1.5, seed=0)
    with pytest.raises(DesignError):
        nx.validate_probability(0.0)
    nx.validate_probability(0.0, allow_degenerate=True)
    with pytest.raises(DesignError):
        nx.validate_probability(-0.1, allow_degenerate=True)
