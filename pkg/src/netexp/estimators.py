"""Point estimators for the global ATE from one realized trial.

Conventions for directed graphs: the "impact" form of the neighbor-corrected
estimator sums over out-neighbors (outcomes a treatment influenced), the
"credit" form over in-neighbors (treatments that influenced an outcome); the
two are equal by rearranging the double sum.

Exposure-product estimators use the closed neighborhood N_i u {i}: since
outcomes depend on a node's own treatment, the closed-neighborhood products
are what make the importance-sampling estimator exactly unbiased.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .partition import cluster_neighborhoods


class EstimatorError(ValueError):
    pass


@dataclass
class EstimateReport:
    estimator: str
    value: float | None
    trial: int = 0
    flags: tuple = ()

    @property
    def defined(self):
        return self.value is not None


def propensity_terms(z, p):
    """eta_i = z_i/p - (1-z_i)/(1-p) and xi_i = z_i(1-p)/p + (1-z_i)p/(1-p)."""
    z = np.asarray(z, dtype=np.float64)
    eta = z / p - (1 - z) / (1 - p)
    xi = z * (1 - p) / p + (1 - z) * p / (1 - p)
    return eta, xi


def propensity_moments(p):
    """Exact two-point moments of (eta, xi) under Bernoulli(p)."""
    return {
        "E_eta": 0.0,
        "E_abs_eta": 2.0,
        "E_xi": 1.0,
        "E_eta_sq": 1.0 / (p * (1 - p)),
        "E_xi_sq": (3 * p ** 2 - 3 * p + 1) / (p * (1 - p)),
    }


def _check_lengths(z, Y):
    z = np.asarray(z, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if len(z) != len(Y):
        raise EstimatorError("assignment and outcome vectors differ in length")
    return z, Y


def dm(z, Y, p):
    """Inverse-propensity difference-in-means."""
    z, Y = _check_lengths(z, Y)
    eta, _ = propensity_terms(z, p)
    return float(np.mean(eta * Y))


def dm_ratio(z, Y):
    """Arm-mean difference; returns None when either arm is empty."""
    z, Y = _check_lengths(z, Y)
    treated = z > 0.5
    if not treated.any() or treated.all():
        return None
    return float(Y[treated].mean() - Y[~treated].mean())


def ht(graph, z, Y, p):
    """Importance-sampling estimator with closed-neighborhood exposure products."""
    z, Y = _check_lengths(z, Y)
    t = graph.in_neighbor_sum(z)
    d = graph.in_degrees
    all_treated = (z > 0.5) & (t >= d - 0.5)
    all_control = (z < 0.5) & (t <= 0.5)
    w1 = (1.0 / p) ** (d + 1)
    w0 = (1.0 / (1 - p)) ** (d + 1)
    return float(np.mean((all_treated * w1 - all_control * w0) * Y))


def dn(graph, z, Y, p):
    """Neighbor-corrected estimator, impact form: each treatment is credited
    with its own outcome plus propensity-corrected out-neighbor outcomes."""
    z, Y = _check_lengths(z, Y)
    eta, xi = propensity_terms(z, p)
    s = graph.out_neighbor_sum(xi * Y)
    return float(np.mean(eta * (Y + s)))


def dn_credit(graph, z, Y, p):
    """Credit form: each outcome is attributed to its own and its in-neighbors'
    treatments. Algebraically identical to dn()."""
    z, Y = _check_lengths(z, Y)
    eta, xi = propensity_terms(z, p)
    s = graph.in_neighbor_sum(eta)
    return float(np.mean((eta + xi * s) * Y))


def dn_cluster(graph, partition, draw, Y, p, neighborhood=None):
    """Node-level outcomes with cluster-level neighbor propensity terms.

    The cluster-neighbor set excludes the node's own cluster. Pass a
    precomputed `cluster_neighborhoods(graph, partition)` to amortize across
    trials.
    """
    if draw.kind != "cluster" or draw.z_cluster is None:
        raise EstimatorError("dn_cluster requires a cluster-level draw")
    if draw.partition is not None and draw.partition is not partition \
            and not np.array_equal(draw.partition.assignment, partition.assignment):
        raise EstimatorError("draw was made under a different partition")
    Y = np.asarray(Y, dtype=np.float64)
    eta, xi = propensity_terms(draw.z, p)
    eta_c, _ = propensity_terms(draw.z_cluster, p)
    if neighborhood is None:
        neighborhood = cluster_neighborhoods(graph, partition)
    indptr, cluster_ids = neighborhood
    s = np.bincount(np.repeat(np.arange(graph.num_nodes), np.diff(indptr)),
                    weights=eta_c[cluster_ids], minlength=graph.num_nodes)
    return float(np.mean((eta + xi * s) * Y))


def ht_cluster(graph, partition, draw, Y, p, neighborhood=None):
    """Importance-sampling estimator over the closed cluster neighborhood."""
    if draw.kind != "cluster" or draw.z_cluster is None:
        raise EstimatorError("ht_cluster requires a cluster-level draw")
    Y = np.asarray(Y, dtype=np.float64)
    zc = np.asarray(draw.z_cluster, dtype=np.float64)
    if neighborhood is None:
        neighborhood = cluster_neighborhoods(graph, partition)
    indptr, cluster_ids = neighborhood
    rows = np.repeat(np.arange(graph.num_nodes), np.diff(indptr))
    nc = np.diff(indptr)
    treated_nbr = np.bincount(rows, weights=zc[cluster_ids], minlength=graph.num_nodes)
    own = zc[partition.assignment]
    all_treated = (own > 0.5) & (treated_nbr >= nc - 0.5)
    all_control = (own < 0.5) & (treated_nbr <= 0.5)
    w1 = (1.0 / p) ** (nc + 1)
    w0 = (1.0 / (1 - p)) ** (nc + 1)
    return float(np.mean((all_treated * w1 - all_control * w0) * Y))


def ht_exposure_counts(graph, z):
    """Number of nodes with fully-treated / fully-control closed neighborhoods.

    Used by the harness to report trials where every exposure indicator is 0
    (the estimate degenerates to exactly 0).
    """
    z = np.asarray(z, dtype=np.float64)
    t = graph.in_neighbor_sum(z)
    d = graph.in_degrees
    n1 = int(((z > 0.5) & (t >= d - 0.5)).sum())
    n0 = int(((z < 0.5) & (t <= 0.5)).sum())
    return n1, n0
