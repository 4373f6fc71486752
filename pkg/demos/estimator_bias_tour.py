"""Tour of the estimators on a small instance, checked against brute force.

Everything here is exact: with 10 nodes we can enumerate all 2^10 treatment
assignments, so the bias and variance numbers below have no Monte Carlo
error. The printed table puts each estimator's exact bias next to the
theoretical bound the package certifies.
"""

import numpy as np

import netexp as nx

rng = np.random.default_rng(7)

graph = nx.erdos_renyi(10, 3.0, seed=1)
model = nx.random_low_order_model(graph, rng, delta=0.5)
part = nx.random_balanced(10, 4, seed=2)
p = 0.3

ate = nx.ground_truth_ate(model)
print(f"instance: {graph.num_nodes} nodes, {graph.num_edges} edges, "
      f"max degree {graph.max_degree}")
print(f"ground-truth ATE (all-treated vs all-control): {ate:+.6f}\n")

table = nx.compare_bounds(graph, model, p, partition=part)
print(f"smoothness epsilon = {table['epsilon']:.4f} ({table['epsilon_source']})")
print(f"{'design':<8} {'estimator':<11} {'bias':>10} {'bias bound':>11} "
      f"{'variance':>10} {'var bound':>11}")
for row in table["rows"]:
    bb = f"{row['bias_bound']:.4f}" if np.isfinite(row["bias_bound"]) else "-"
    vb = f"{row['variance_bound']:.1f}" if np.isfinite(row["variance_bound"]) else "-"
    print(f"{row['design']:<8} {row['estimator']:<11} {row['bias']:>+10.6f} "
          f"{bb:>11} {row['variance']:>10.4f} {vb:>11}")

print("""
Reading the table:
  * dm has no bias guarantee -- it ignores interference entirely;
  * ht / ht_cluster are exactly unbiased (bias ~ 1e-16) but their variance
    blows up exponentially in the (cluster) degree;
  * dn trades a small, certified bias (<= d^2 * epsilon) for dramatically
    lower variance; dn_cluster shrinks the bias bound further by absorbing
    within-cluster edges.
""")

certs = [
    nx.certify_dn_bias(graph, model, p, instance="demo"),
    nx.certify_dn_cluster_bias(graph, part, model, p, instance="demo"),
    nx.certify_dn_variance(graph, model, p, instance="demo"),
]
for cert in certs:
    status = "holds" if cert.passed else "VIOLATED"
    print(f"certificate {cert.check:<16} lhs={cert.lhs:.6g} <= "
          f"bound={cert.bound:.6g}  -> {status}")
