"""Exact brute-force computations on small instances.

Full enumeration of the assignment space yields estimator expectations and
variances with no sampling error; finite-difference scans yield exact
smoothness constants. Together these certify the bias and variance bounds on
concrete instances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from . import estimators as est
from .design import TreatmentDraw
from .outcomes import ground_truth_ate
from .partition import cluster_degree_stats, cluster_neighborhoods

MAX_ENUM_BITS = 24


class OracleError(ValueError):
    pass


@dataclass
class ExactMoments:
    expectation: float
    variance: float
    bias: float  # expectation - ground-truth ATE


@dataclass
class Certificate:
    check: str
    instance: str
    lhs: float
    bound: float
    passed: bool
    detail: dict | None = None

    def to_json(self):
        return json.dumps(asdict(self), indent=2)


_SLACK = 1e-9  # absolute slack absorbing accumulation error in comparisons


def _bit_matrix(n_bits):
    k = np.arange(2 ** n_bits, dtype=np.int64)
    return ((k[:, None] >> np.arange(n_bits)) & 1).astype(np.float64)


def _assignment_weights(Z, p):
    ones = Z.sum(axis=1)
    return p ** ones * (1 - p) ** (Z.shape[1] - ones)


def _resolve_estimator(name, graph, partition):
    if callable(name):
        return name
    if name == "dm":
        return lambda z, Y, p, draw: est.dm(z, Y, p)
    if name == "ht":
        return lambda z, Y, p, draw: est.ht(graph, z, Y, p)
    if name == "dn":
        return lambda z, Y, p, draw: est.dn(graph, z, Y, p)
    if name == "dn_credit":
        return lambda z, Y, p, draw: est.dn_credit(graph, z, Y, p)
    if name in ("dn_cluster", "ht_cluster"):
        if partition is None:
            raise OracleError(f"{name} requires a partition")
        nbhd = cluster_neighborhoods(graph, partition)
        fn = est.dn_cluster if name == "dn_cluster" else est.ht_cluster
        return lambda z, Y, p, draw: fn(graph, partition, draw, Y, p, neighborhood=nbhd)
    raise OracleError(f"unknown estimator: {name!r}")


def enumerate_expectation(graph, model, p, estimator, design="unit", partition=None):
    """Exact E and Var of an estimator over the full assignment distribution.

    Unit designs enumerate 2^N node assignments; cluster designs enumerate
    2^|C| cluster bits broadcast to nodes. Noise is disabled throughout.
    """
    if design == "unit":
        n_bits = graph.num_nodes
    elif design == "cluster":
        if partition is None:
            raise OracleError("cluster design requires a partition")
        n_bits = partition.num_clusters
    else:
        raise OracleError(f"unknown design: {design!r}")
    if n_bits > MAX_ENUM_BITS:
        raise OracleError(f"instance too large to enumerate ({n_bits} bits)")
    fn = _resolve_estimator(estimator, graph, partition)
    Z = _bit_matrix(n_bits)
    w = _assignment_weights(Z, p)
    assert abs(w.sum() - 1.0) < 1e-12
    vals = np.empty(len(Z))
    for r in range(len(Z)):
        bits = Z[r]
        if design == "unit":
            z = bits
            draw = TreatmentDraw(z=z, p=p, kind="unit")
        else:
            z = bits[partition.assignment]
            draw = TreatmentDraw(z=z, p=p, kind="cluster", z_cluster=bits,
                                 partition=partition)
        Y = model.evaluate_all(z)
        vals[r] = fn(z, Y, p, draw)
    e = float(w @ vals)
    var = float(w @ vals ** 2 - e ** 2)
    return ExactMoments(expectation=e, variance=max(var, 0.0),
                        bias=e - ground_truth_ate(model))


def finite_difference(model, i, j, k, z):
    """Second-order finite difference of f_i over neighbor coordinates j, k."""
    if j == k:
        raise OracleError("finite difference needs two distinct neighbors")
    nbrs = set(model.graph.in_neighbors(i).tolist())
    if j not in nbrs or k not in nbrs:
        raise OracleError(f"{j} and {k} must both be in-neighbors of {i}")
    z = np.array(z, dtype=np.float64)
    corners = 0.0
    for zj, zk, sign in ((1, 1, 1), (0, 1, -1), (1, 0, -1), (0, 0, 1)):
        z[j], z[k] = zj, zk
        corners += sign * model.evaluate(i, z)
    return float(corners)


def smoothness(model, mode="exact", sample_budget=1000, seed=0):
    """Max |second-order finite difference| over nodes, neighbor pairs, local
    assignments, and the node's own treatment.

    Sampled mode maximizes over a random subset and is only a lower bound.
    """
    graph = model.graph
    if mode == "exact":
        eps = 0.0
        for i in range(graph.num_nodes):
            d = len(graph.in_neighbors(i))
            if d < 2:
                continue
            if d > 20:
                raise OracleError(f"neighborhood of node {i} too large for exact scan")
            for zi in (0, 1):
                _, vals = _local_surface(model, i, zi, max_degree=20)
                eps = max(eps, _max_second_difference(vals, d))
        return eps
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        eligible = [i for i in range(graph.num_nodes) if graph.degree(i) >= 2]
        if not eligible:
            return 0.0
        eps = 0.0
        for _ in range(sample_budget):
            i = int(rng.choice(eligible))
            nbrs = graph.in_neighbors(i)
            a, b = rng.choice(nbrs, size=2, replace=False)
            z = rng.integers(0, 2, graph.num_nodes).astype(np.float64)
            eps = max(eps, abs(finite_difference(model, i, int(a), int(b), z)))
        return eps
    raise OracleError(f"unknown smoothness mode: {mode!r}")


def _epsilon_for_certificate(model, max_exact_degree=16):
    """Exact scan when neighborhoods permit, else the analytic L*delta^2."""
    if model.graph.max_degree <= max_exact_degree:
        return smoothness(model, mode="exact"), "exact_scan"
    if model.smoothness_L is None:
        raise OracleError("graph too dense for an exact scan and no analytic L")
    return model.smoothness_L * model.delta ** 2, "analytic_L_delta_sq"


def certify_dn_bias(graph, model, p, instance=""):
    """Check |E[DN] - ATE| <= d^2 * epsilon by exact enumeration."""
    moments = enumerate_expectation(graph, model, p, "dn")
    epsilon, source = _epsilon_for_certificate(model)
    d = graph.max_degree
    bound = d ** 2 * epsilon
    per_node = float((graph.in_degrees.astype(float) ** 2).mean()) * epsilon
    lhs = abs(moments.bias)
    return Certificate(
        check="dn_bias", instance=instance, lhs=lhs, bound=bound,
        passed=lhs <= bound + _SLACK,
        detail={"epsilon": epsilon, "epsilon_source": source, "max_degree": d,
                "per_node_degree_bound": per_node,
                "expectation": moments.expectation},
    )


def certify_dn_cluster_bias(graph, partition, model, p, instance=""):
    """Check |E[DN-Cluster] - ATE| <= (1/N) * sum_i (d_i - d_i^C)^2 * epsilon."""
    moments = enumerate_expectation(graph, model, p, "dn_cluster",
                                    design="cluster", partition=partition)
    epsilon, source = _epsilon_for_certificate(model)
    stats = cluster_degree_stats(graph, partition)
    bound = stats.sum_crossing_sq / graph.num_nodes * epsilon
    lhs = abs(moments.bias)
    return Certificate(
        check="dn_cluster_bias", instance=instance, lhs=lhs, bound=bound,
        passed=lhs <= bound + _SLACK,
        detail={"epsilon": epsilon, "epsilon_source": source,
                "sum_crossing_sq": stats.sum_crossing_sq,
                "expectation": moments.expectation},
    )


def dn_variance_bound(n, d, p, y_max):
    """Explicit variance polynomial: (Y^2/N)(8d^4 + qd^3 + 20d^3 + 7qd^2 - 20d^2
    + q^2 d + 16d + q) with q = 1/(p(1-p))."""
    q = 1.0 / (p * (1 - p))
    poly = (8 * d ** 4 + q * d ** 3 + 20 * d ** 3 + 7 * q * d ** 2
            - 20 * d ** 2 + q ** 2 * d + 16 * d + q)
    return y_max ** 2 / n * poly


def outcome_max(model):
    """Max |f_i(z)| over nodes and local assignments (corner scan over the
    closed neighborhood; valid under neighborhood interference)."""
    graph = model.graph
    y_max = 0.0
    for i in range(graph.num_nodes):
        for zi in (0, 1):
            _, vals = _local_surface(model, i, zi, max_degree=20)
            y_max = max(y_max, float(np.abs(vals).max()))
    return y_max


def certify_dn_variance(graph, model, p, y_max=None, instance=""):
    """Check exact Var[DN] against the explicit variance polynomial."""
    moments = enumerate_expectation(graph, model, p, "dn")
    if y_max is None:
        y_max = outcome_max(model)
    bound = dn_variance_bound(graph.num_nodes, graph.max_degree, p, y_max)
    return Certificate(
        check="dn_variance", instance=instance, lhs=moments.variance, bound=bound,
        passed=moments.variance <= bound + _SLACK,
        detail={"y_max": y_max, "max_degree": graph.max_degree,
                "q": 1.0 / (p * (1 - p))},
    )


# --- Taylor identities over the local expected-outcome surface -----------

def _local_surface(model, i, a, max_degree=16):
    """Enumerated f_i^a over neighbor bits: (bit matrix, outcome values).

    Row r of the bit matrix assigns neighbor index j the bit (r >> j) & 1.
    """
    nbrs = model.graph.in_neighbors(i)
    d = len(nbrs)
    if d > max_degree:
        raise OracleError(f"neighborhood of node {i} too large to enumerate")
    Z = _bit_matrix(d)
    z = np.zeros(model.graph.num_nodes)
    z[i] = a
    vals = np.empty(len(Z))
    for r in range(len(Z)):
        z[nbrs] = Z[r]
        vals[r] = model.evaluate(i, z)
    return Z, vals


def _surface_value(Z, vals, w):
    probs = np.prod(Z * w + (1 - Z) * (1 - w), axis=1)
    return float(probs @ vals)


def _max_second_difference(vals, d):
    """Max |four-corner difference| over all coordinate pairs of a 2^d table."""
    masks = np.arange(2 ** d)
    best = 0.0
    for a in range(d):
        A = 1 << a
        for b in range(a + 1, d):
            B = 1 << b
            base = masks[(masks & (A | B)) == 0]
            delta = vals[base + A + B] - vals[base + A] - vals[base + B] + vals[base]
            if len(delta):
                best = max(best, float(np.abs(delta).max()))
    return best


def _expected_second_difference(vals, d, a, b, p):
    """E over the remaining coordinates of the four-corner difference in (a, b)."""
    masks = np.arange(2 ** d)
    A, B = 1 << a, 1 << b
    base = masks[(masks & (A | B)) == 0]
    delta = vals[base + A + B] - vals[base + A] - vals[base + B] + vals[base]
    ones = np.zeros(len(base))
    rest_bits = [c for c in range(d) if c not in (a, b)]
    for c in rest_bits:
        ones += (base >> c) & 1
    probs = p ** ones * (1 - p) ** (len(rest_bits) - ones)
    return float(probs @ delta)


def taylor_gradient_check(graph, model, i, p, fd_step=1e-4):
    """Central finite differences of the expected-outcome surface vs the exact
    conditional-difference identity; returns the max discrepancy."""
    d = len(graph.in_neighbors(i))
    if d == 0:
        return 0.0
    err = 0.0
    for a in (0, 1):
        Z, vals = _local_surface(model, i, a)
        w = np.full(d, p)
        for j in range(d):
            wp, wm = w.copy(), w.copy()
            wp[j] += fd_step
            wm[j] -= fd_step
            fd = (_surface_value(Z, vals, wp) - _surface_value(Z, vals, wm)) / (2 * fd_step)
            on = Z[:, j] == 1
            probs = np.prod(np.delete(Z, j, axis=1) * p
                            + (1 - np.delete(Z, j, axis=1)) * (1 - p), axis=1)
            cond1 = float(probs[on] @ vals[on])
            cond0 = float(probs[~on] @ vals[~on])
            err = max(err, abs(fd - (cond1 - cond0)))
    return err


def taylor_hessian_check(graph, model, i, p):
    """Exact mixed partials of the surface vs E[second finite difference];
    also checks the diagonal vanishes. Returns (max offdiag error, max
    abs diagonal)."""
    nbrs = graph.in_neighbors(i)
    d = len(nbrs)
    if d == 0:
        return 0.0, 0.0
    off_err = 0.0
    diag_max = 0.0
    for a in (0, 1):
        Z, vals = _local_surface(model, i, a)
        w = np.full(d, p)
        for j in range(d):
            # diagonal via a wide second difference (h = min(p, 1-p)/2, well
            # away from cancellation); exactly 0 for a multilinear surface
            h = min(p, 1 - p) / 2
            wp, wm = w.copy(), w.copy()
            wp[j] += h
            wm[j] -= h
            second = (_surface_value(Z, vals, wp) - 2 * _surface_value(Z, vals, w)
                      + _surface_value(Z, vals, wm)) / h ** 2
            diag_max = max(diag_max, abs(second))
            for k in range(j + 1, d):
                keep = [c for c in range(d) if c not in (j, k)]
                signs = (2 * Z[:, j] - 1) * (2 * Z[:, k] - 1)
                rest = np.prod(Z[:, keep] * p + (1 - Z[:, keep]) * (1 - p), axis=1) \
                    if keep else np.ones(len(Z))
                exact_partial = float((signs * rest) @ vals)
                exp_delta = _expected_second_difference(vals, d, j, k, p)
                off_err = max(off_err, abs(exact_partial - exp_delta))
    return off_err, diag_max


def expected_dm_closed_form(graph, model, p):
    """Independent decomposition of E[DM]: per-node conditional expectations
    enumerated over the local neighborhood only."""
    n = graph.num_nodes
    total = 0.0
    for i in range(n):
        for a, sign in ((1, 1.0), (0, -1.0)):
            Z, vals = _local_surface(model, i, a)
            probs = np.prod(Z * p + (1 - Z) * (1 - p), axis=1)
            total += sign * float(probs @ vals)
    return total / n
