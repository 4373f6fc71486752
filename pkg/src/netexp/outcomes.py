"""Potential-outcome models with neighborhood interference, and ground-truth ATE.

Each model evaluates f_i(z) for a full treatment vector z, depending only on
z_i and the treatments of i's in-neighbors. Additive noise, when enabled, is
drawn per (trial, node) from a counter-based stream so trials are
reproducible regardless of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._segments import segment_prod, segment_sum


class OutcomeModelError(ValueError):
    pass


class OutcomeModel:
    """Base class: holds the interference graph and noise/smoothness metadata.

    Subclasses implement `_evaluate_all(z)` (noiseless, vectorized); the per-node
    `evaluate(i, z)` defaults to slicing that result.
    """

    def __init__(self, graph, delta=0.0, smoothness_L=None, noise_std=0.0, noise_seed=0):
        self.graph = graph
        self.delta = float(delta)
        self.smoothness_L = smoothness_L
        self.noise_std = float(noise_std)
        self.noise_seed = int(noise_seed)

    def _evaluate_all(self, z):
        raise NotImplementedError

    def evaluate_all(self, z, trial=None):
        """Outcome vector for assignment z; noise is added only when a trial
        index is supplied."""
        z = np.asarray(z, dtype=np.float64)
        if len(z) != self.graph.num_nodes:
            raise OutcomeModelError("assignment length does not match the graph")
        y = self._evaluate_all(z)
        if trial is not None and self.noise_std > 0:
            rng = np.random.default_rng([self.noise_seed, int(trial)])
            y = y + self.noise_std * rng.standard_normal(len(y))
        return y

    def evaluate(self, i, z):
        """Noiseless outcome for a single node."""
        return float(self.evaluate_all(z)[i])


def _edge_weights(graph, weights):
    """Resolve per-in-edge weights aligned with graph.in_indices.

    Accepts a scalar, a dict keyed by (source j, target i), or an array already
    aligned with the flat in-adjacency.
    """
    m = len(graph.in_indices)
    if np.isscalar(weights):
        return np.full(m, float(weights))
    if isinstance(weights, dict):
        out = np.empty(m)
        rows = graph._in.rows
        for k in range(m):
            key = (int(graph.in_indices[k]), int(rows[k]))
            if key not in weights:
                raise OutcomeModelError(f"missing edge weight for {key}")
            out[k] = weights[key]
        return out
    arr = np.asarray(weights, dtype=np.float64)
    if arr.shape != (m,):
        raise OutcomeModelError(f"weight array must have shape ({m},)")
    return arr


class LinearModel(OutcomeModel):
    """f_i(z) = alpha_i + beta z_i + delta * sum_j c_ij z_j; no interaction terms."""

    def __init__(self, graph, alpha, beta, weights, delta, noise_std=0.0, noise_seed=0):
        super().__init__(graph, delta=delta, smoothness_L=0.0,
                         noise_std=noise_std, noise_seed=noise_seed)
        self.alpha = np.broadcast_to(np.asarray(alpha, dtype=np.float64),
                                     (graph.num_nodes,)).copy()
        self.beta = float(beta)
        self.weights = _edge_weights(graph, weights)

    def _evaluate_all(self, z):
        g = self.graph
        nbr = np.bincount(g._in.rows, weights=self.weights * z[g.in_indices],
                          minlength=g.num_nodes)
        return self.alpha + self.beta * z + self.delta * nbr


class MultiplicativeModel(OutcomeModel):
    """f_i(z) = c0 * prod_j (1 + (delta/d_i) c_ij z_j); isolated nodes give c0."""

    def __init__(self, graph, c0, weights, delta, noise_std=0.0, noise_seed=0):
        super().__init__(graph, delta=delta, noise_std=noise_std, noise_seed=noise_seed)
        self.c0 = float(c0)
        self.weights = _edge_weights(graph, weights)

    def _evaluate_all(self, z):
        g = self.graph
        d = np.maximum(g.in_degrees, 1)
        scale = (self.delta / d)[g._in.rows]
        factors = 1.0 + scale * self.weights * z[g.in_indices]
        return self.c0 * segment_prod(factors, g.in_indptr)


class LowOrderModel(OutcomeModel):
    """Polynomial interference: f_i = c0 + sum over subsets S of c_S prod_{j in S} delta z_j.

    Terms are stored sparsely as (node, neighbor subset, coefficient). The
    analytic smoothness constant per node sums |c_S| delta^{|S|-2} over
    subsets of size >= 2.
    """

    def __init__(self, graph, c0, terms, delta, noise_std=0.0, noise_seed=0):
        super().__init__(graph, delta=delta, noise_std=noise_std, noise_seed=noise_seed)
        self.c0 = float(c0)
        self.terms = [[] for _ in range(graph.num_nodes)]
        for i, subset, coeff in terms:
            subset = tuple(sorted(int(j) for j in subset))
            nbrs = set(graph.in_neighbors(i).tolist())
            if not set(subset) <= nbrs:
                raise OutcomeModelError(
                    f"subset {subset} is not contained in the neighborhood of {i}")
            if len(set(subset)) != len(subset):
                raise OutcomeModelError(f"subset {subset} has repeated nodes")
            self.terms[int(i)].append((subset, float(coeff)))
        per_node_L = np.zeros(graph.num_nodes)
        for i, tlist in enumerate(self.terms):
            per_node_L[i] = sum(abs(c) * self.delta ** (len(s) - 2)
                                for s, c in tlist if len(s) >= 2)
        self.per_node_L = per_node_L
        self.smoothness_L = float(per_node_L.max()) if graph.num_nodes else 0.0

    def _evaluate_all(self, z):
        y = np.full(self.graph.num_nodes, self.c0)
        for i, tlist in enumerate(self.terms):
            for subset, coeff in tlist:
                y[i] += coeff * np.prod([self.delta * z[j] for j in subset])
        return y

    def evaluate(self, i, z):
        z = np.asarray(z, dtype=np.float64)
        y = self.c0
        for subset, coeff in self.terms[i]:
            y += coeff * np.prod([self.delta * z[j] for j in subset])
        return float(y)


class BenchmarkModel(OutcomeModel):
    """Direct-plus-multiplicative benchmark:

    f_i(z) = c0 * sum_{j in N_i u {i}} z_i z_j / |N_i|  +  c1 * prod_{j in N_i u {i}} (1 + c2 z_j)

    The second-order finite difference of the product term equals c1 c2^2
    (times treated-neighbor factors). Isolated nodes use c0 * z_i for the
    first term.
    """

    def __init__(self, graph, c0, c1, c2, noise_std=0.0, noise_seed=0):
        if c2 < 0:
            raise OutcomeModelError("c2 must be non-negative")
        super().__init__(graph, delta=c2, noise_std=noise_std, noise_seed=noise_seed)
        self.c0 = float(c0)
        self.c1 = float(c1)
        self.c2 = float(c2)

    def _evaluate_all(self, z):
        g = self.graph
        t = g.in_neighbor_sum(z)  # treated in-neighbor count
        d = g.in_degrees
        direct = np.where(d > 0, z * (z + t) / np.maximum(d, 1), z)
        prod = (1.0 + self.c2) ** (t + z)
        return self.c0 * direct + self.c1 * prod


@dataclass
class MarkovChainSpec:
    """Finite-state chain whose treated transitions are P + delta * D."""

    initial: np.ndarray
    transition: np.ndarray
    perturbation: np.ndarray
    reward_control: np.ndarray
    reward_treated: np.ndarray
    delta: float

    def __post_init__(self):
        self.initial = np.asarray(self.initial, dtype=np.float64)
        self.transition = np.asarray(self.transition, dtype=np.float64)
        self.perturbation = np.asarray(self.perturbation, dtype=np.float64)
        self.reward_control = np.asarray(self.reward_control, dtype=np.float64)
        self.reward_treated = np.asarray(self.reward_treated, dtype=np.float64)
        s = self.num_states
        if self.initial.shape != (s,) or self.transition.shape != (s, s) \
                or self.perturbation.shape != (s, s) \
                or self.reward_control.shape != (s,) or self.reward_treated.shape != (s,):
            raise OutcomeModelError("inconsistent chain dimensions")
        if self.initial.min() < 0 or abs(self.initial.sum() - 1) > 1e-12:
            raise OutcomeModelError("initial distribution must be a probability vector")
        if np.abs(self.transition.sum(axis=1) - 1).max() > 1e-12:
            raise OutcomeModelError("transition matrix rows must sum to 1")
        treated = self.transition + self.delta * self.perturbation
        if treated.min() < -1e-12 or np.abs(treated.sum(axis=1) - 1).max() > 1e-12:
            raise OutcomeModelError("treated transition matrix is not stochastic")

    @property
    def num_states(self):
        return len(np.atleast_1d(self.initial))


class MarkovianModel(OutcomeModel):
    """Time steps as nodes on a directed graph; exact dynamical-system outcomes.

    The outcome at step i is rho' [prod_{j<i} (P + z_j delta D)] r_{z_i} and in
    truth depends on all earlier steps; the graph exposed to estimators
    truncates the in-neighborhood to the window {j : i-h <= j < i}, which is an
    explicit approximation.
    """

    def __init__(self, chain, horizon, truncation):
        if truncation > horizon:
            raise OutcomeModelError("truncation window cannot exceed the horizon")
        from .graph import InterferenceGraph
        edges = [(j, i) for i in range(horizon)
                 for j in range(max(0, i - truncation), i)]
        graph = InterferenceGraph(horizon, np.asarray(edges, dtype=np.int64).reshape(-1, 2),
                                  directed=True)
        super().__init__(graph, delta=chain.delta)
        self.chain = chain
        self.horizon = int(horizon)
        self.truncation = int(truncation)

    def _evaluate_all(self, z):
        c = self.chain
        rho = c.initial.copy()
        y = np.empty(self.horizon)
        treated_step = c.transition + c.delta * c.perturbation
        for i in range(self.horizon):
            r = c.reward_treated if z[i] > 0.5 else c.reward_control
            y[i] = rho @ r
            rho = rho @ (treated_step if z[i] > 0.5 else c.transition)
        return y

    def evaluate(self, i, z):
        c = self.chain
        rho = c.initial.copy()
        treated_step = c.transition + c.delta * c.perturbation
        for j in range(i):
            rho = rho @ (treated_step if z[j] > 0.5 else c.transition)
        r = c.reward_treated if z[i] > 0.5 else c.reward_control
        return float(rho @ r)


def linear_model(graph, alpha, beta, weights, delta, **kw):
    return LinearModel(graph, alpha, beta, weights, delta, **kw)


def multiplicative_model(graph, c0, weights, delta, **kw):
    return MultiplicativeModel(graph, c0, weights, delta, **kw)


def low_order_model(graph, c0, terms, delta, **kw):
    return LowOrderModel(graph, c0, terms, delta, **kw)


def benchmark_model(graph, c0, c1, c2, noise_std=0.0, noise_seed=0):
    return BenchmarkModel(graph, c0, c1, c2, noise_std=noise_std, noise_seed=noise_seed)


def markovian_model(chain, horizon, truncation):
    return MarkovianModel(chain, horizon, truncation)


def ground_truth_ate(model):
    """(1/N) sum_i (f_i(1) - f_i(0)), noise disabled."""
    n = model.graph.num_nodes
    ones = np.ones(n)
    zeros = np.zeros(n)
    return float(np.mean(model.evaluate_all(ones) - model.evaluate_all(zeros)))


def random_low_order_model(graph, rng, delta=0.5, c0=1.0, max_pairs_per_node=3,
                           coeff_scale=1.0):
    """Random instance with singleton and pair interaction terms; used by the
    oracle certification suites."""
    terms = []
    for i in range(graph.num_nodes):
        nbrs = graph.in_neighbors(i)
        for j in nbrs:
            terms.append((i, (int(j),), coeff_scale * rng.uniform(-1, 1)))
        if len(nbrs) >= 2:
            k = int(rng.integers(0, max_pairs_per_node + 1))
            for _ in range(k):
                pair = rng.choice(nbrs, size=2, replace=False)
                terms.append((i, tuple(int(x) for x in pair),
                              coeff_scale * rng.uniform(-1, 1)))
    return LowOrderModel(graph, c0, terms, delta)


def random_linear_model(graph, rng, delta=1.0, beta=1.0, weight_scale=1.0):
    alpha = rng.uniform(-1, 1, graph.num_nodes)
    weights = weight_scale * rng.uniform(-1, 1, len(graph.in_indices))
    return LinearModel(graph, alpha, beta, weights, delta)


def model_from_config(graph, config, rng=None):
    """Build a model from a JSON-style dict: {"kind": ..., parameters...}.

    Per-edge weight sources: a number, or {"kind": "uniform", "low": a,
    "high": b, "seed": s}.
    """
    cfg = dict(config)
    kind = cfg.pop("kind", None)

    def resolve_weights(spec):
        if isinstance(spec, dict):
            wrng = np.random.default_rng(spec.get("seed", 0))
            return wrng.uniform(spec.get("low", 0.0), spec.get("high", 1.0),
                                len(graph.in_indices))
        return spec

    if kind == "linear":
        return LinearModel(graph, cfg.get("alpha", 0.0), cfg.get("beta", 1.0),
                           resolve_weights(cfg.get("weights", 1.0)),
                           cfg.get("delta", 1.0),
                           noise_std=cfg.get("noise_std", 0.0),
                           noise_seed=cfg.get("noise_seed", 0))
    if kind == "multiplicative":
        return MultiplicativeModel(graph, cfg.get("c0", 1.0),
                                   resolve_weights(cfg.get("weights", 1.0)),
                                   cfg.get("delta", 1.0),
                                   noise_std=cfg.get("noise_std", 0.0),
                                   noise_seed=cfg.get("noise_seed", 0))
    if kind == "benchmark":
        return BenchmarkModel(graph, cfg.get("c0", 1.0), cfg.get("c1", 1.0),
                              cfg.get("c2", 0.1),
                              noise_std=cfg.get("noise_std", 0.0),
                              noise_seed=cfg.get("noise_seed", 0))
    if kind == "low_order":
        terms = [(t["node"], tuple(t["subset"]), t["coeff"]) for t in cfg.get("terms", [])]
        return LowOrderModel(graph, cfg.get("c0", 0.0), terms, cfg.get("delta", 1.0),
                             noise_std=cfg.get("noise_std", 0.0),
                             noise_seed=cfg.get("noise_seed", 0))
    if kind == "random_low_order":
        rng = np.random.default_rng(cfg.get("seed", 0))
        return random_low_order_model(graph, rng, delta=cfg.get("delta", 0.5),
                                      c0=cfg.get("c0", 1.0))
    raise OutcomeModelError(f"unknown model kind: {kind!r}")
