"""Monte Carlo experiment runner: repeated trials, summary metrics, sweeps.

Trial t draws treatments with an rng keyed by (master seed, t) and outcome
noise keyed by (noise seed, t), so results are a pure function of the config
and identical for any parallelism width. All estimators within a trial see
the same draw, pairing the comparison across estimators.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from . import estimators as est
from .design import draw_cluster_bernoulli, draw_unit_bernoulli
from .estimators import EstimateReport
from .outcomes import ground_truth_ate
from .partition import cluster_neighborhoods


class ConfigError(ValueError):
    pass


UNIT_ESTIMATORS = ("dm", "dm_ratio", "ht", "dn", "dn_credit")
CLUSTER_ESTIMATORS = ("dm", "dm_ratio", "ht", "dn", "dn_credit", "dn_cluster", "ht_cluster")


@dataclass
class ExperimentConfig:
    graph: object
    model: object
    p: float
    num_trials: int
    seed: int
    design: str = "unit"
    partition: object | None = None
    estimators: tuple = ("dm", "dn")
    parallel: int = 1

    def validate(self):
        problems = []
        if not (0.0 < self.p < 1.0):
            problems.append(f"p={self.p} must lie in the open interval (0, 1)")
        if self.num_trials < 1:
            problems.append("trial count must be >= 1")
        if self.design not in ("unit", "cluster"):
            problems.append(f"unknown design kind {self.design!r}")
        if self.design == "cluster":
            if self.partition is None:
                problems.append("cluster design requires a partition")
            elif len(self.partition.assignment) != self.graph.num_nodes:
                problems.append("partition does not cover the graph")
        allowed = CLUSTER_ESTIMATORS if self.design == "cluster" else UNIT_ESTIMATORS
        for name in self.estimators:
            if name not in allowed:
                problems.append(f"estimator {name!r} not available for {self.design} design")
        if self.parallel < 1:
            problems.append("parallelism width must be >= 1")
        if problems:
            raise ConfigError("; ".join(problems))
        return self


def _one_trial(config, neighborhood, t):
    if config.design == "unit":
        draw = draw_unit_bernoulli(config.graph.num_nodes, config.p, config.seed, trial=t)
    else:
        draw = draw_cluster_bernoulli(config.partition, config.p, config.seed, trial=t)
    Y = config.model.evaluate_all(draw.z, trial=t)
    reports = []
    for name in config.estimators:
        flags = ()
        if name == "dm":
            value = est.dm(draw.z, Y, config.p)
        elif name == "dm_ratio":
            value = est.dm_ratio(draw.z, Y)
            if value is None:
                flags = ("undefined_arm",)
        elif name == "ht":
            value = est.ht(config.graph, draw.z, Y, config.p)
            n1, n0 = est.ht_exposure_counts(config.graph, draw.z)
            if n1 == 0 and n0 == 0:
                flags = ("all_exposures_zero",)
        elif name == "dn":
            value = est.dn(config.graph, draw.z, Y, config.p)
        elif name == "dn_credit":
            value = est.dn_credit(config.graph, draw.z, Y, config.p)
        elif name == "dn_cluster":
            value = est.dn_cluster(config.graph, config.partition, draw, Y, config.p,
                                   neighborhood=neighborhood)
        elif name == "ht_cluster":
            value = est.ht_cluster(config.graph, config.partition, draw, Y, config.p,
                                   neighborhood=neighborhood)
        else:  # pragma: no cover - validate() rejects these
            raise ConfigError(f"unknown estimator {name!r}")
        reports.append(EstimateReport(estimator=name, value=value, trial=t, flags=flags))
    return reports


def run_trials(config):
    """Run K trials and return the flat list of per-trial EstimateReports."""
    config.validate()
    neighborhood = None
    if config.design == "cluster" and any(
            n in ("dn_cluster", "ht_cluster") for n in config.estimators):
        neighborhood = cluster_neighborhoods(config.graph, config.partition)
    trials = range(config.num_trials)
    if config.parallel > 1:
        chunks = Parallel(n_jobs=config.parallel)(
            delayed(_one_trial)(config, neighborhood, t) for t in trials)
    else:
        chunks = [_one_trial(config, neighborhood, t) for t in trials]
    return [r for chunk in chunks for r in chunk]


@dataclass
class TrialSummary:
    estimator: str
    num_trials: int
    dropped: int
    mean_estimate: float
    mean_rel_err: float  # mean absolute-mode error when true_ate == 0
    ci_lo: float
    ci_hi: float
    rmse: float
    bias: float
    variance: float
    absolute_mode: bool = False


def summarize(reports, true_ate, absolute=False):
    """Per-estimator summary metrics against a known estimand.

    relative error = mean((est - ATE) / ATE); RMSE = sqrt(mean((est - ATE)^2)).
    Flag-dropped trials (e.g. an empty arm) are excluded and counted.
    """
    if true_ate == 0 and not absolute:
        raise ConfigError("true ATE is 0; pass absolute=True for absolute-error metrics")
    by_name = {}
    for r in reports:
        by_name.setdefault(r.estimator, []).append(r)
    out = {}
    for name, rs in by_name.items():
        values = np.array([r.value for r in rs if r.defined])
        dropped = sum(1 for r in rs if not r.defined)
        k = len(values)
        if k == 0:
            raise ConfigError(f"all trials dropped for estimator {name!r}")
        err = values - true_ate
        scale = 1.0 if absolute else true_ate
        rel = err / scale
        mean_rel = float(rel.mean())
        sd = float(rel.std(ddof=1)) if k > 1 else 0.0
        half = 1.96 * sd / np.sqrt(k)
        out[name] = TrialSummary(
            estimator=name,
            num_trials=k,
            dropped=dropped,
            mean_estimate=float(values.mean()),
            mean_rel_err=mean_rel,
            ci_lo=mean_rel - half,
            ci_hi=mean_rel + half,
            rmse=float(np.sqrt((err ** 2).mean())),
            bias=float(err.mean()),
            variance=float(values.var(ddof=1)) if k > 1 else 0.0,
            absolute_mode=absolute,
        )
    return out


def sweep_clusters(base_config, partitions, true_ate=None, absolute=False):
    """Run the base experiment under each partition; returns per-partition
    summaries and the argmin-RMSE partition per estimator.

    Partition keys are taken from the dict keys when `partitions` is a dict,
    else positional indices.
    """
    if not isinstance(partitions, dict):
        partitions = {i: part for i, part in enumerate(partitions)}
    if true_ate is None:
        true_ate = ground_truth_ate(base_config.model)
    rows = {}
    for key, part in partitions.items():
        config = ExperimentConfig(
            graph=base_config.graph, model=base_config.model, p=base_config.p,
            num_trials=base_config.num_trials, seed=base_config.seed,
            design="cluster", partition=part, estimators=base_config.estimators,
            parallel=base_config.parallel)
        rows[key] = summarize(run_trials(config), true_ate, absolute=absolute)
    argmin = {}
    names = set(n for summ in rows.values() for n in summ)
    for name in names:
        argmin[name] = min(rows, key=lambda k: rows[k][name].rmse)
    return rows, argmin


def compare_bounds(graph, model, p, partition=None, y_max=None):
    """Exact bias/variance (enumeration oracle) next to the theoretical bound
    expressions, for small instances."""
    from . import oracle

    ate = ground_truth_ate(model)
    epsilon, eps_source = oracle._epsilon_for_certificate(model)
    d = graph.max_degree
    if y_max is None:
        y_max = oracle.outcome_max(model)
    rows = []
    for name in ("dm", "dn", "ht"):
        m = oracle.enumerate_expectation(graph, model, p, name)
        bias_bound = {"dm": float("nan"), "dn": d ** 2 * epsilon, "ht": 0.0}[name]
        var_bound = {"dm": float("nan"),
                     "dn": oracle.dn_variance_bound(graph.num_nodes, d, p, y_max),
                     "ht": float("nan")}[name]
        rows.append({"design": "unit", "estimator": name, "bias": m.bias,
                     "bias_bound": bias_bound, "variance": m.variance,
                     "variance_bound": var_bound})
    if partition is not None:
        from .partition import cluster_degree_stats
        stats = cluster_degree_stats(graph, partition)
        for name in ("dm", "dn_cluster", "ht_cluster"):
            m = oracle.enumerate_expectation(graph, model, p, name if name != "dm" else "dm",
                                             design="cluster", partition=partition)
            bias_bound = {"dm": float("nan"),
                          "dn_cluster": stats.sum_crossing_sq / graph.num_nodes * epsilon,
                          "ht_cluster": 0.0}[name]
            rows.append({"design": "cluster", "estimator": name, "bias": m.bias,
                         "bias_bound": bias_bound, "variance": m.variance,
                         "variance_bound": float("nan")})
    return {"ate": ate, "epsilon": epsilon, "epsilon_source": eps_source,
            "max_degree": d, "y_max": y_max, "rows": rows}


# --- CSV artifacts -------------------------------------------------------

TRIAL_CSV_COLUMNS = ["run_id", "trial", "estimator", "estimate", "flags"]
SUMMARY_CSV_COLUMNS = ["run_id", "estimator", "partition_id", "K", "mean_rel_err",
                       "ci_lo", "ci_hi", "rmse", "bias", "variance", "dropped"]


def write_trials_csv(path, run_id, reports):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRIAL_CSV_COLUMNS)
        for r in reports:
            w.writerow([run_id, r.trial, r.estimator,
                        "" if r.value is None else repr(r.value),
                        "|".join(r.flags)])


def write_summary_csv(path, run_id, summaries_by_partition):
    """summaries_by_partition: {partition_id: {estimator: TrialSummary}}."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_CSV_COLUMNS)
        for pid, summaries in summaries_by_partition.items():
            for s in summaries.values():
                w.writerow([run_id, s.estimator, pid, s.num_trials, repr(s.mean_rel_err),
                            repr(s.ci_lo), repr(s.ci_hi), repr(s.rmse), repr(s.bias),
                            repr(s.variance), s.dropped])
