"""Interference graphs: adjacency storage, random generators, edge-list IO.

A graph edge (i, j) means the treatment at i can affect the outcome at j.
For undirected graphs the in- and out-adjacency coincide.
"""

from __future__ import annotations

import io
import os

import numpy as np
import pandas as pd


class GraphError(ValueError):
    pass


class EdgeListParseError(GraphError):
    def __init__(self, line_number, line):
        self.line_number = line_number
        self.line = line
        super().__init__(f"malformed edge-list line {line_number}: {line!r}")


class _Adjacency:
    """CSR-style adjacency: sorted neighbor ids per node, plus flat edge arrays."""

    __slots__ = ("indptr", "indices", "rows")

    def __init__(self, indptr, indices):
        self.indptr = indptr
        self.indices = indices
        # flat (rows, indices) pairs; rows[k] is the node owning indices[k]
        self.rows = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))

    def neighbors(self, i):
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degrees(self):
        return np.diff(self.indptr)


class InterferenceGraph:
    """Immutable interference graph on nodes 0..N-1.

    `neighbors(i)` are out-neighbors (nodes affected by i's treatment) and
    `in_neighbors(i)` are in-neighbors (nodes whose treatment affects i).
    Degree and max_degree follow the in-neighborhood, which is what outcome
    models and estimator bounds depend on.
    """

    def __init__(self, num_nodes, edges, directed=False):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if num_nodes < 1:
            raise GraphError("graph needs at least one node")
        if len(edges) and (edges.min() < 0 or edges.max() >= num_nodes):
            raise GraphError("edge endpoint outside [0, num_nodes)")
        if len(edges) and (edges[:, 0] == edges[:, 1]).any():
            raise GraphError("self-loops are not allowed")
        self.num_nodes = int(num_nodes)
        self.directed = bool(directed)
        if not directed:
            # store each undirected edge once, canonically ordered
            lo = edges.min(axis=1)
            hi = edges.max(axis=1)
            edges = np.unique(np.column_stack([lo, hi]), axis=0) if len(edges) else edges
            both = np.concatenate([edges, edges[:, ::-1]]) if len(edges) else edges
            self._edges = edges
            self._out = _build_adjacency(num_nodes, both[:, 0], both[:, 1]) if len(edges) \
                else _empty_adjacency(num_nodes)
            self._in = self._out
        else:
            edges = np.unique(edges, axis=0) if len(edges) else edges
            self._edges = edges
            self._out = _build_adjacency(num_nodes, edges[:, 0], edges[:, 1]) if len(edges) \
                else _empty_adjacency(num_nodes)
            self._in = _build_adjacency(num_nodes, edges[:, 1], edges[:, 0]) if len(edges) \
                else _empty_adjacency(num_nodes)
        self.in_degrees = self._in.degrees()
        self.out_degrees = self._out.degrees()
        self.max_degree = int(self.in_degrees.max()) if num_nodes else 0

    # --- read-only views -------------------------------------------------
    def neighbors(self, i):
        self._check_node(i)
        return self._out.neighbors(i)

    def in_neighbors(self, i):
        self._check_node(i)
        return self._in.neighbors(i)

    def degree(self, i):
        self._check_node(i)
        return int(self.in_degrees[i])

    def _check_node(self, i):
        if not (0 <= i < self.num_nodes):
            raise GraphError(f"node id {i} out of range [0, {self.num_nodes})")

    @property
    def num_edges(self):
        return len(self._edges)

    def edges(self):
        return self._edges.copy()

    # flat arrays for vectorized neighbor aggregation
    @property
    def in_indptr(self):
        return self._in.indptr

    @property
    def in_indices(self):
        return self._in.indices

    @property
    def out_indptr(self):
        return self._out.indptr

    @property
    def out_indices(self):
        return self._out.indices

    def in_neighbor_sum(self, x):
        """For each node i, sum of x[j] over in-neighbors j."""
        x = np.asarray(x, dtype=np.float64)
        return np.bincount(self._in.rows, weights=x[self._in.indices],
                           minlength=self.num_nodes)

    def out_neighbor_sum(self, x):
        """For each node i, sum of x[j] over out-neighbors j."""
        x = np.asarray(x, dtype=np.float64)
        return np.bincount(self._out.rows, weights=x[self._out.indices],
                           minlength=self.num_nodes)

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"InterferenceGraph({self.num_nodes} nodes, {self.num_edges} edges, {kind})"


def _build_adjacency(n, src, dst):
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return _Adjacency(indptr, dst)


def _empty_adjacency(n):
    return _Adjacency(np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))


def audit(graph):
    """Recheck structural invariants; raises GraphError on violation."""
    for adj in {id(graph._out): graph._out, id(graph._in): graph._in}.values():
        idx, ptr = adj.indices, adj.indptr
        if len(idx) and (idx.min() < 0 or idx.max() >= graph.num_nodes):
            raise GraphError("adjacency entry out of range")
        for i in range(graph.num_nodes):
            nbrs = idx[ptr[i]:ptr[i + 1]]
            if (i == nbrs).any():
                raise GraphError(f"self-loop at node {i}")
            if len(nbrs) > 1 and not (np.diff(nbrs) > 0).all():
                raise GraphError(f"adjacency of node {i} not sorted/duplicate-free")
    if not graph.directed:
        for i in range(graph.num_nodes):
            for j in graph.neighbors(i):
                if i not in graph.neighbors(j):
                    raise GraphError(f"asymmetric adjacency {i}->{j}")
    if graph.max_degree != (graph.in_degrees.max() if graph.num_nodes else 0):
        raise GraphError("stale max_degree cache")
    return True


# --- generators ----------------------------------------------------------

def erdos_renyi(n, expected_degree, seed):
    """G(n, p) with p = expected_degree / (n-1), so mean degree matches the target."""
    if n < 2:
        raise GraphError("erdos_renyi needs n >= 2")
    if not (0 <= expected_degree <= n - 1):
        raise GraphError(f"expected_degree must lie in [0, {n - 1}]")
    p = expected_degree / (n - 1)
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n - 1):
        right = n - 1 - i
        k = rng.binomial(right, p)
        if k:
            js = rng.choice(right, size=k, replace=False) + i + 1
            rows.append(np.column_stack([np.full(k, i, dtype=np.int64), np.sort(js)]))
    edges = np.concatenate(rows) if rows else np.zeros((0, 2), dtype=np.int64)
    return InterferenceGraph(n, edges, directed=False)


def watts_strogatz(n, d, q, seed):
    """Small-world graph: d-regular ring, each rightward edge rewired w.p. q.

    Rewiring resamples the endpoint until it creates neither a self-loop nor
    a duplicate edge.
    """
    if d % 2 != 0 or not (2 <= d < n):
        raise GraphError("watts_strogatz needs even d with 2 <= d < n")
    if not (0 <= q <= 1):
        raise GraphError("rewiring probability must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    edge_set = set()
    for i in range(n):
        for step in range(1, d // 2 + 1):
            j = (i + step) % n
            edge_set.add((min(i, j), max(i, j)))
    if q > 0:
        for i in range(n):
            for step in range(1, d // 2 + 1):
                j = (i + step) % n
                key = (min(i, j), max(i, j))
                if rng.random() < q and key in edge_set:
                    edge_set.discard(key)
                    while True:
                        k = int(rng.integers(n))
                        new = (min(i, k), max(i, k))
                        if k != i and new not in edge_set:
                            edge_set.add(new)
                            break
    edges = np.array(sorted(edge_set), dtype=np.int64)
    return InterferenceGraph(n, edges, directed=False)


def contract(graph, partition):
    """Cluster-level graph: clusters are adjacent iff some edge crosses them."""
    if len(partition.assignment) != graph.num_nodes:
        raise GraphError("partition does not cover the graph")
    e = graph._edges
    ce = partition.assignment[e] if len(e) else e
    if len(ce):
        ce = ce[ce[:, 0] != ce[:, 1]]
    return InterferenceGraph(partition.num_clusters, ce, directed=graph.directed)


# --- edge-list IO --------------------------------------------------------

class EdgeListReport:
    """Bookkeeping from an edge-list load."""

    def __init__(self, num_raw_pairs, num_self_loops, num_duplicates, id_map):
        self.num_raw_pairs = num_raw_pairs
        self.num_self_loops = num_self_loops
        self.num_duplicates = num_duplicates
        self.id_map = id_map  # original id -> dense id


def _as_text_buffer(source):
    if hasattr(source, "read"):
        return source
    if isinstance(source, (str, os.PathLike)):
        s = os.fspath(source)
        if "\n" not in s and os.path.exists(s):
            return open(s, "r")
        if any(c in s for c in "\n\t ") or s.startswith("#"):
            return io.StringIO(s)
        raise GraphError(f"edge-list file not found: {s!r}")
    raise GraphError(f"unsupported edge-list source: {type(source)!r}")


def from_edge_list(source, directed=False, return_report=False):
    """Parse whitespace-separated node-id pairs ('#' starts a comment line).

    Arbitrary non-negative ids are remapped densely; duplicate edges are
    collapsed and self-loops dropped (counted in the report).
    """
    buf = _as_text_buffer(source)
    try:
        try:
            df = pd.read_csv(buf, sep=r"\s+", comment="#", header=None,
                             dtype=np.int64, engine="c")
        except Exception:
            # fall back to a line-by-line scan to pinpoint the bad line
            buf.seek(0)
            pairs = []
            for lineno, line in enumerate(buf, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                parts = stripped.split()
                if len(parts) != 2:
                    raise EdgeListParseError(lineno, line.rstrip("\n"))
                try:
                    u, v = int(parts[0]), int(parts[1])
                except ValueError:
                    raise EdgeListParseError(lineno, line.rstrip("\n")) from None
                if u < 0 or v < 0:
                    raise EdgeListParseError(lineno, line.rstrip("\n"))
                pairs.append((u, v))
            df = pd.DataFrame(pairs) if pairs else pd.DataFrame(np.zeros((0, 2), dtype=np.int64))
    finally:
        if buf is not source and not isinstance(buf, io.StringIO):
            buf.close()
    if df.shape[1] != 2:
        raise GraphError("edge list must have exactly two columns")
    raw = df.to_numpy(dtype=np.int64)
    if len(raw) and raw.min() < 0:
        raise GraphError("negative node id in edge list")
    uniq, dense = np.unique(raw.ravel(), return_inverse=True)
    pairs = dense.reshape(-1, 2)
    loops = pairs[:, 0] == pairs[:, 1]
    num_loops = int(loops.sum())
    pairs = pairs[~loops]
    n = len(uniq) if len(uniq) else 1
    before = len(pairs)
    g = InterferenceGraph(n, pairs, directed=directed)
    dup = before - (g.num_edges if directed else _count_unique_undirected(pairs))
    report = EdgeListReport(len(raw), num_loops, int(dup),
                            dict(zip(uniq.tolist(), range(len(uniq)))))
    if return_report:
        return g, report
    return g


def _count_unique_undirected(pairs):
    if not len(pairs):
        return 0
    lo, hi = pairs.min(axis=1), pairs.max(axis=1)
    return len(np.unique(np.column_stack([lo, hi]), axis=0))


def to_edge_list(graph, target):
    """Serialize bit-stably: sorted edges, one 'u v' per line."""
    e = graph.edges()
    lines = "\n".join(f"{u} {v}" for u, v in e)
    if lines:
        lines += "\n"
    if hasattr(target, "write"):
        target.write(lines)
    else:
        with open(target, "w") as fh:
            fh.write(lines)
