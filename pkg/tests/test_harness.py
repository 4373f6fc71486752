import csv

import numpy as np
import pytest

import netexp as nx
from netexp.estimators import EstimateReport
from netexp.harness import ConfigError


def make_config(**overrides):
    g = nx.watts_strogatz(60, 4, 0.2, seed=0)
    model = nx.BenchmarkModel(g, c0=1.0, c1=1.0, c2=0.1)
    base = dict(graph=g, model=model, p=0.3, num_trials=20, seed=11,
                estimators=("dm", "dn"))
    base.update(overrides)
    return nx.ExperimentConfig(**base)


def test_config_validation_messages():
    with pytest.raises(ConfigError, match=r"p=1 must lie in the open interval \(0, 1\)"):
        make_config(p=1).validate()
    with pytest.raises(ConfigError, match="trial count"):
        make_config(num_trials=0).validate()
    with pytest.raises(ConfigError, match="unknown design"):
        make_config(design="stratified").validate()
    with pytest.raises(ConfigError, match="requires a partition"):
        make_config(design="cluster").validate()
    with pytest.raises(ConfigError, match="not available"):
        make_config(estimators=("dn_cluster",)).validate()
    with pytest.raises(ConfigError, match="parallelism"):
        make_config(parallel=0).validate()


def test_run_trials_shape_and_pairing():
    config = make_config(num_trials=5)
    reports = nx.run_trials(config)
    assert len(reports) == 5 * 2
    # both estimators appear once per trial (paired on one shared draw)
    for t in range(5):
        names = [r.estimator for r in reports if r.trial == t]
        assert sorted(names) == ["dm", "dn"]


def test_run_trials_deterministic():
    a = nx.run_trials(make_config())
    b = nx.run_trials(make_config())
    assert [(r.trial, r.estimator, r.value) for r in a] == \
           [(r.trial, r.estimator, r.value) for r in b]


def test_parallel_matches_serial():
    serial = nx.run_trials(make_config(parallel=1))
    wide = nx.run_trials(make_config(parallel=2))
    assert [(r.trial, r.estimator, r.value) for r in serial] == \
           [(r.trial, r.estimator, r.value) for r in wide]


def test_cluster_design_trials():
    part = nx.random_balanced(60, 10, seed=3)
    config = make_config(design="cluster", partition=part, num_trials=6,
                         estimators=("dm", "dn_cluster", "ht_cluster"))
    reports = nx.run_trials(config)
    assert len(reports) == 18
    assert all(r.value is not None for r in reports if r.estimator == "dn_cluster")


def test_dm_ratio_flagged_when_arm_empty():
    # 2 clusters, p=0.5: some trials assign both clusters the same arm
    g = nx.InterferenceGraph(4, [])
    model = nx.LinearModel(g, 0.0, 1.0, 0.0, 0.0)
    part = nx.contiguous_blocks(4, 2)
    config = nx.ExperimentConfig(graph=g, model=model, p=0.5, num_trials=40,
                                 seed=0, design="cluster", partition=part,
                                 estimators=("dm_ratio",))
    reports = nx.run_trials(config)
    undefined = [r for r in reports if not r.defined]
    assert undefined  # 50% of trials in expectation
    assert all(r.flags == ("undefined_arm",) for r in undefined)


# --- summarize ------------------------------------------------------------

def test_summarize_hand_example():
    reports = [EstimateReport("dm", 1.0, 0), EstimateReport("dm", 1.2, 1)]
    s = nx.summarize(reports, true_ate=1.1)["dm"]
    assert s.mean_rel_err == pytest.approx(0.0)
    assert s.rmse == pytest.approx(0.1)
    assert s.bias == pytest.approx(0.0)
    assert s.num_trials == 2 and s.dropped == 0


def test_summarize_drops_undefined():
    reports = [EstimateReport("dm_ratio", 2.0, 0),
               EstimateReport("dm_ratio", None, 1, flags=("undefined_arm",))]
    s = nx.summarize(reports, true_ate=1.0)["dm_ratio"]
    assert s.num_trials == 1 and s.dropped == 1
    assert s.mean_estimate == 2.0


def test_summarize_zero_ate_requires_absolute():
    reports = [EstimateReport("dm", 0.1, 0), EstimateReport("dm", -0.1, 1)]
    with pytest.raises(ConfigError):
        nx.summarize(reports, true_ate=0.0)
    s = nx.summarize(reports, true_ate=0.0, absolute=True)["dm"]
    assert s.absolute_mode
    assert s.mean_rel_err == pytest.approx(0.0)
    assert s.rmse == pytest.approx(0.1)


def test_rmse_bias_variance_identity():
    config = make_config(num_trials=50)
    reports = nx.run_trials(config)
    ate = nx.ground_truth_ate(config.model)
    for s in nx.summarize(reports, ate).values():
        k = s.num_trials
        assert s.rmse ** 2 == pytest.approx(s.bias ** 2 + s.variance * (k - 1) / k)


def test_ci_covers_mean_for_unbiased_estimator():
    # dn on a linear model is unbiased; the 95% CI should usually cover 0
    g = nx.erdos_renyi(100, 4.0, seed=2)
    model = nx.random_linear_model(g, np.random.default_rng(5))
    config = nx.ExperimentConfig(graph=g, model=model, p=0.5, num_trials=400,
                                 seed=21, estimators=("dn",))
    ate = nx.ground_truth_ate(model)
    s = nx.summarize(nx.run_trials(config), ate)["dn"]
    assert s.ci_lo < 0.0 < s.ci_hi


# --- sweeps and bound tables ----------------------------------------------

def test_sweep_clusters_returns_argmin():
    config = make_config(num_trials=30, estimators=("dm", "dn_cluster"))
    partitions = {m: nx.contiguous_blocks(60, m) for m in (1, 5, 15)}
    rows, argmin = nx.sweep_clusters(config, partitions)
    assert set(rows) == {1, 5, 15}
    for name in ("dm", "dn_cluster"):
        best = argmin[name]
        assert rows[best][name].rmse == min(r[name].rmse for r in rows.values())


def test_compare_bounds_table():
    g = nx.erdos_renyi(8, 2.0, seed=0)
    model = nx.random_low_order_model(g, np.random.default_rng(3))
    part = nx.random_balanced(8, 3, seed=1)
    table = nx.compare_bounds(g, model, 0.3, partition=part)
    by_name = {(r["design"], r["estimator"]): r for r in table["rows"]}
    dn_row = by_name[("unit", "dn")]
    assert abs(dn_row["bias"]) <= dn_row["bias_bound"] + 1e-9
    assert dn_row["variance"] <= dn_row["variance_bound"] + 1e-9
    assert abs(by_name[("unit", "ht")]["bias"]) < 1e-10
    dnc_row = by_name[("cluster", "dn_cluster")]
    assert abs(dnc_row["bias"]) <= dnc_row["bias_bound"] + 1e-9


# --- CSV artifacts ---------------------------------------------------------

def test_csv_artifacts_round_trip(tmp_path):
    config = make_config(num_trials=4)
    reports = nx.run_trials(config)
    ate = nx.ground_truth_ate(config.model)
    summaries = nx.summarize(reports, ate)

    tpath = tmp_path / "trials.csv"
    nx.write_trials_csv(tpath, "run-1", reports)
    with open(tpath) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    assert rows[0]["run_id"] == "run-1"
    # repr round trip preserves the exact float
    r0 = rows[0]
    match = next(r for r in reports
                 if r.trial == int(r0["trial"]) and r.estimator == r0["estimator"])
    assert float(r0["estimate"]) == match.value

    spath = tmp_path / "summary.csv"
    nx.write_summary_csv(spath, "run-1", {"singleton": summaries})
    with open(spath) as fh:
        srows = list(csv.DictReader(fh))
    assert len(srows) == 2
    assert {r["estimator"] for r in srows} == {"dm", "dn"}
    assert all(r["partition_id"] == "singleton" for r in srows)
