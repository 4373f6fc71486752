"""Node-to-cluster partitions and the degree statistics driving cluster bounds."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np


class PartitionError(ValueError):
    pass


class Partition:
    """Assignment of each node to exactly one cluster; ids are dense 0..C-1."""

    def __init__(self, assignment):
        assignment = np.asarray(assignment, dtype=np.int64)
        if assignment.ndim != 1 or len(assignment) == 0:
            raise PartitionError("assignment must be a non-empty 1-d array")
        if assignment.min() < 0:
            raise PartitionError("negative cluster id")
        num_clusters = int(assignment.max()) + 1
        sizes = np.bincount(assignment, minlength=num_clusters)
        if (sizes == 0).any():
            raise PartitionError("cluster ids must be dense (no empty clusters)")
        self.assignment = assignment
        self.num_clusters = num_clusters
        self.cluster_sizes = sizes

    def __len__(self):
        return len(self.assignment)

    def members(self, c):
        return np.flatnonzero(self.assignment == c)

    def __repr__(self):
        return f"Partition({len(self.assignment)} nodes, {self.num_clusters} clusters)"


def singleton(n):
    return Partition(np.arange(n))


def contiguous_blocks(n, m):
    """Node i -> cluster floor(i/m); the last cluster may be smaller."""
    if not (1 <= m <= n):
        raise PartitionError(f"block size must lie in [1, {n}]")
    return Partition(np.arange(n) // m)


def random_balanced(n, num_clusters, seed):
    """Random partition into `num_clusters` clusters with sizes differing by at most 1."""
    if not (1 <= num_clusters <= n):
        raise PartitionError(f"cluster count must lie in [1, {n}]")
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % num_clusters
    rng.shuffle(labels)
    return Partition(labels)


def label_propagation(graph, seed, max_rounds=50):
    """Iterative majority-label clustering with seeded update order.

    Each node adopts the most common label among its neighbors (ties break
    toward the smallest label); terminates at a fixpoint or max_rounds.
    """
    n = graph.num_nodes
    labels = np.arange(n)
    rng = np.random.default_rng(seed)
    for _ in range(max_rounds):
        changed = False
        order = rng.permutation(n)
        for i in order:
            nbrs = graph.in_neighbors(i)
            if len(nbrs) == 0:
                continue
            counts = {}
            for lab in labels[nbrs]:
                counts[lab] = counts.get(lab, 0) + 1
            best = max(counts.items(), key=lambda kv: (kv[1], -kv[0]))[0]
            if labels[i] != best:
                labels[i] = best
                changed = True
        if not changed:
            break
    # densify labels
    _, dense = np.unique(labels, return_inverse=True)
    return Partition(dense)


def from_file(source):
    """Load 'node_id cluster_id' lines ('#' comments); both id spaces remapped densely."""
    if hasattr(source, "read"):
        buf = source
    else:
        s = os.fspath(source)
        buf = open(s) if ("\n" not in s and os.path.exists(s)) else io.StringIO(s)
    nodes, clusters = [], []
    try:
        for lineno, line in enumerate(buf, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise PartitionError(f"malformed partition line {lineno}: {line!r}")
            try:
                nodes.append(int(parts[0]))
                clusters.append(int(parts[1]))
            except ValueError:
                raise PartitionError(f"malformed partition line {lineno}: {line!r}") from None
    finally:
        if buf is not source and not isinstance(buf, io.StringIO):
            buf.close()
    if not nodes:
        raise PartitionError("empty partition file")
    nodes = np.asarray(nodes)
    clusters = np.asarray(clusters)
    uniq_nodes, node_idx = np.unique(nodes, return_inverse=True)
    if len(uniq_nodes) != len(nodes):
        raise PartitionError("duplicate node id in partition file")
    assignment = np.empty(len(nodes), dtype=np.int64)
    _, dense_clusters = np.unique(clusters, return_inverse=True)
    assignment[node_idx] = dense_clusters
    return Partition(assignment)


def to_file(partition, target):
    lines = "\n".join(f"{i} {c}" for i, c in enumerate(partition.assignment)) + "\n"
    if hasattr(target, "write"):
        target.write(lines)
    else:
        with open(target, "w") as fh:
            fh.write(lines)


@dataclass
class ClusterDegreeStats:
    """Per-node degree bookkeeping for cluster-level bias/variance bounds.

    same_cluster_degree[i] counts neighbors sharing i's cluster; the
    cluster-neighbor count excludes i's own cluster.
    """

    degrees: np.ndarray
    same_cluster_degree: np.ndarray
    cluster_neighbor_count: np.ndarray
    sum_crossing: float
    sum_crossing_sq: float
    max_cluster_neighbors: int


def cluster_neighborhoods(graph, partition):
    """CSR structure of distinct neighbor clusters per node, own cluster excluded.

    Returns (indptr, cluster_ids): cluster_ids[indptr[i]:indptr[i+1]] are the
    clusters other than cluster(i) containing at least one in-neighbor of i.
    """
    if len(partition.assignment) != graph.num_nodes:
        raise PartitionError("partition does not cover the graph")
    n = graph.num_nodes
    rows = graph._in.rows
    nbr_clusters = partition.assignment[graph.in_indices]
    keep = nbr_clusters != partition.assignment[rows]
    pairs = np.unique(np.column_stack([rows[keep], nbr_clusters[keep]]), axis=0)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, pairs[:, 0] + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, pairs[:, 1]


def cluster_degree_stats(graph, partition):
    if len(partition.assignment) != graph.num_nodes:
        raise PartitionError("partition does not cover the graph")
    assignment = partition.assignment
    rows = graph._in.rows
    same = assignment[graph.in_indices] == assignment[rows]
    d = graph.in_degrees.astype(np.int64)
    d_same = np.bincount(rows[same], minlength=graph.num_nodes).astype(np.int64)
    indptr, _ = cluster_neighborhoods(graph, partition)
    nc = np.diff(indptr)
    crossing = (d - d_same).astype(np.float64)
    return ClusterDegreeStats(
        degrees=d,
        same_cluster_degree=d_same,
        cluster_neighbor_count=nc,
        sum_crossing=float(crossing.sum()),
        sum_crossing_sq=float((crossing ** 2).sum()),
        max_cluster_neighbors=int(nc.max()) if len(nc) else 0,
    )
