"""Command-line front end: JSON configs in, CSV/JSON artifacts out.

Every command writes a manifest.json recording the fully resolved config
(after flag overrides), so re-running from the snapshot reproduces the
outputs bit-identically.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import graph as graphlib
from . import oracle, partition as partlib, rideshare as ridelib
from .harness import (ExperimentConfig, run_trials, summarize, sweep_clusters,
                      write_summary_csv, write_trials_csv)
from .outcomes import ground_truth_ate, model_from_config

try:
    from importlib.metadata import version as _pkg_version
    VERSION = _pkg_version("netexp")
except Exception:  # pragma: no cover - not installed
    VERSION = "0.0.0"


class CliError(ValueError):
    pass


@dataclass
class RunManifest:
    run_id: str
    command: str
    config: dict
    version: str
    duration_sec: float = 0.0
    outputs: list = field(default_factory=list)

    def write(self, outdir):
        path = Path(outdir) / "manifest.json"
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
        return path


def _run_id(command, config):
    digest = hashlib.sha256(
        json.dumps(config, sort_keys=True, default=str).encode()).hexdigest()[:10]
    return f"{command}-{digest}"


def _load_config(path):
    if path is None:
        raise CliError("this command requires --config PATH")
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise CliError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise CliError(f"config {path} is not valid JSON: {e}")


def _apply_overrides(config, args):
    """Flag values win over config values; the merged dict is what runs and
    what the manifest records."""
    for key, flag in (("seed", "seed"), ("trials", "trials"), ("parallel", "parallel")):
        value = getattr(args, flag, None)
        if value is not None:
            config[key] = value
    return config


def _graph_from_config(cfg):
    kind = cfg.get("kind")
    if kind == "erdos_renyi":
        return graphlib.erdos_renyi(cfg["n"], cfg["expected_degree"], cfg.get("seed", 0))
    if kind == "watts_strogatz":
        return graphlib.watts_strogatz(cfg["n"], cfg["d"], cfg["q"], cfg.get("seed", 0))
    if kind == "edge_list":
        return graphlib.from_edge_list(cfg["path"], directed=cfg.get("directed", False))
    if kind == "edges":
        return graphlib.InterferenceGraph(cfg["num_nodes"], cfg.get("edges", []),
                                          directed=cfg.get("directed", False))
    raise CliError(f"graph.kind must be one of erdos_renyi, watts_strogatz, "
                   f"edge_list, edges (got {kind!r})")


def _partition_from_config(graph, cfg):
    kind = cfg.get("kind")
    if kind == "singleton":
        return partlib.singleton(graph.num_nodes)
    if kind == "contiguous_blocks":
        return partlib.contiguous_blocks(graph.num_nodes, cfg["block_size"])
    if kind == "random_balanced":
        return partlib.random_balanced(graph.num_nodes, cfg["num_clusters"],
                                       cfg.get("seed", 0))
    if kind == "label_propagation":
        return partlib.label_propagation(graph, cfg.get("seed", 0))
    if kind == "file":
        return partlib.from_file(cfg["path"])
    raise CliError(f"partition.kind must be one of singleton, contiguous_blocks, "
                   f"random_balanced, label_propagation, file (got {kind!r})")


def _experiment_from_config(config):
    graph = _graph_from_config(config.get("graph", {}))
    model = model_from_config(graph, config.get("model", {}))
    partition = None
    if config.get("partition") is not None:
        partition = _partition_from_config(graph, config["partition"])
    return ExperimentConfig(
        graph=graph, model=model, p=config.get("p", 0.5),
        num_trials=config.get("trials", 100), seed=config.get("seed", 0),
        design=config.get("design", "unit"), partition=partition,
        estimators=tuple(config.get("estimators", ["dm", "dn"])),
        parallel=config.get("parallel", 1)).validate()


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen_graph(args):
    out = _outdir(args)
    cfg = {"kind": args.kind, "n": args.n, "expected_degree": args.degree,
           "d": int(args.degree), "q": args.q, "seed": args.seed or 0}
    graph = _graph_from_config(cfg)
    path = out / "graph.edges"
    graphlib.to_edge_list(graph, str(path))
    manifest = RunManifest(_run_id("gen-graph", cfg), "gen-graph", cfg, VERSION,
                           outputs=[str(path)])
    manifest.write(out)
    print(f"wrote {path} ({graph.num_nodes} nodes, {graph.num_edges} edges)")
    return 0


def cmd_gen_partition(args):
    out = _outdir(args)
    graph = graphlib.from_edge_list(args.graph, directed=args.directed)
    cfg = {"kind": args.kind, "block_size": args.block_size,
           "num_clusters": args.clusters, "seed": args.seed or 0}
    part = _partition_from_config(graph, cfg)
    path = out / "partition.txt"
    partlib.to_file(part, str(path))
    manifest = RunManifest(_run_id("gen-partition", cfg), "gen-partition", cfg, VERSION,
                           outputs=[str(path)])
    manifest.write(out)
    print(f"wrote {path} ({part.num_clusters} clusters)")
    return 0


def cmd_run(args):
    t0 = time.monotonic()
    out = _outdir(args)
    config = _apply_overrides(_load_config(args.config), args)
    experiment = _experiment_from_config(config)
    run_id = _run_id("run", config)
    reports = run_trials(experiment)
    ate = ground_truth_ate(experiment.model)
    summaries = summarize(reports, ate, absolute=(ate == 0))
    trials_path = out / "trials.csv"
    summary_path = out / "summary.csv"
    write_trials_csv(trials_path, run_id, reports)
    pid = "cluster" if experiment.design == "cluster" else "unit"
    write_summary_csv(summary_path, run_id, {pid: summaries})
    manifest = RunManifest(run_id, "run", config, VERSION,
                           duration_sec=time.monotonic() - t0,
                           outputs=[str(trials_path), str(summary_path)])
    manifest.write(out)
    for name, s in summaries.items():
        print(f"{name}: mean={s.mean_estimate:.6g} rmse={s.rmse:.6g} "
              f"bias={s.bias:+.6g} (ate={ate:.6g}, K={s.num_trials})")
    return 0


def cmd_sweep(args):
    t0 = time.monotonic()
    out = _outdir(args)
    config = _apply_overrides(_load_config(args.config), args)
    partitions_cfg = config.get("partitions")
    if not partitions_cfg:
        raise CliError("sweep config needs a non-empty 'partitions' list")
    base = dict(config)
    base["design"] = "cluster"
    base["partition"] = partitions_cfg[0]
    experiment = _experiment_from_config(base)
    partitions = {}
    for i, pcfg in enumerate(partitions_cfg):
        key = pcfg.get("id", f"partition_{i}")
        partitions[key] = _partition_from_config(experiment.graph, pcfg)
    ate = ground_truth_ate(experiment.model)
    rows, argmin = sweep_clusters(experiment, partitions, true_ate=ate,
                                  absolute=(ate == 0))
    run_id = _run_id("sweep", config)
    summary_path = out / "summary.csv"
    write_summary_csv(summary_path, run_id, rows)
    argmin_path = out / "argmin.json"
    with open(argmin_path, "w") as fh:
        json.dump(argmin, fh, indent=2, sort_keys=True)
    manifest = RunManifest(run_id, "sweep", config, VERSION,
                           duration_sec=time.monotonic() - t0,
                           outputs=[str(summary_path), str(argmin_path)])
    manifest.write(out)
    for name, key in sorted(argmin.items()):
        print(f"{name}: min-RMSE partition = {key} "
              f"(rmse={rows[key][name].rmse:.6g})")
    return 0


def _bundled_certify_suite():
    """Small deterministic instances exercising every certificate kind."""
    instances = []
    rng = np.random.default_rng(20240501)
    for idx in range(4):
        graph = graphlib.erdos_renyi(8, 2.0, seed=100 + idx)
        instances.append({
            "name": f"er8-{idx}", "graph": graph,
            "model": {"kind": "random_low_order", "seed": 200 + idx, "delta": 0.4},
            "p": float(rng.choice([0.3, 0.5])),
            "partition": partlib.contiguous_blocks(graph.num_nodes, 2),
            "checks": ["dn_bias", "dn_cluster_bias", "dn_variance"],
        })
    return instances


def cmd_certify(args):
    t0 = time.monotonic()
    out = _outdir(args)
    if args.config:
        config = _load_config(args.config)
        instances = []
        for i, icfg in enumerate(config.get("instances", [])):
            graph = _graph_from_config(icfg["graph"])
            part = None
            if icfg.get("partition") is not None:
                part = _partition_from_config(graph, icfg["partition"])
            instances.append({
                "name": icfg.get("name", f"instance_{i}"), "graph": graph,
                "model": icfg["model"], "p": icfg.get("p", 0.5),
                "partition": part,
                "checks": icfg.get("checks", ["dn_bias", "dn_variance"]),
            })
        if not instances:
            raise CliError("certify config needs a non-empty 'instances' list")
        config_snapshot = config
    else:
        instances = _bundled_certify_suite()
        config_snapshot = {"suite": "bundled"}
    certificates = []
    for inst in instances:
        graph = inst["graph"]
        model = model_from_config(graph, inst["model"])
        for check in inst["checks"]:
            if check == "dn_bias":
                cert = oracle.certify_dn_bias(graph, model, inst["p"],
                                              instance=inst["name"])
            elif check == "dn_cluster_bias":
                if inst["partition"] is None:
                    raise CliError(f"{inst['name']}: dn_cluster_bias needs a partition")
                cert = oracle.certify_dn_cluster_bias(graph, inst["partition"], model,
                                                      inst["p"], instance=inst["name"])
            elif check == "dn_variance":
                cert = oracle.certify_dn_variance(graph, model, inst["p"],
                                                  instance=inst["name"])
            else:
                raise CliError(f"unknown certificate check {check!r}")
            certificates.append(cert)
    cert_path = out / "certificates.json"
    with open(cert_path, "w") as fh:
        json.dump([c.to_json() for c in certificates], fh, indent=2)
    all_passed = all(c.passed for c in certificates)
    run_id = _run_id("certify", config_snapshot)
    manifest = RunManifest(run_id, "certify", config_snapshot, VERSION,
                           duration_sec=time.monotonic() - t0,
                           outputs=[str(cert_path)])
    manifest.write(out)
    for c in certificates:
        status = "PASS" if c.passed else "FAIL"
        print(f"[{status}] {c.instance} {c.check}: lhs={c.lhs:.6g} bound={c.bound:.6g}")
    return 0 if all_passed else 1


def cmd_rideshare(args):
    t0 = time.monotonic()
    out = _outdir(args)
    config = _apply_overrides(_load_config(args.config), args)
    city = ridelib.CityConfig(**config.get("city", {})).validate()
    policy = ridelib.PricingPolicy(**config.get("policy", {})).validate()
    p = config.get("p", 0.5)
    if not (0.0 < p < 1.0):
        raise CliError(f"p={p} must lie in the open interval (0, 1)")
    rows, ate = ridelib.run_pricing_experiment(
        city, policy, config.get("durations", [2, 5, 15, 30, 60]), p,
        config.get("trials", 20), config.get("seed", 0),
        time_threshold_min=config.get("time_threshold_min", 10.0),
        dist_threshold_km=config.get("dist_threshold_km", 2.0))
    run_id = _run_id("rideshare", config)
    table_path = out / "rideshare.csv"
    import csv as _csv
    with open(table_path, "w", newline="") as fh:
        w = _csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        w.writerows(rows)
    manifest = RunManifest(run_id, "rideshare", config, VERSION,
                           duration_sec=time.monotonic() - t0,
                           outputs=[str(table_path)])
    manifest.write(out)
    print(f"paired-counterfactual ATE = {ate:.6g}")
    for row in rows:
        print(f"duration={row['duration_min']:>4} {row['estimator']:<11} "
              f"bias={row['bias']:+.6g} rmse={row['rmse']:.6g}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="netexp",
        description="Simulate randomized experiments under network interference "
                    "and compare global-ATE estimators.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("--config", help="JSON config path")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--trials", type=int, help="override the trial count")
        p.add_argument("--parallel", type=int, help="override the worker count")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("gen-graph", help="generate a random graph edge list")
    p.add_argument("--kind", required=True, choices=["erdos_renyi", "watts_strogatz"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--degree", type=float, required=True,
                   help="expected degree (ER) or ring degree (WS; must be an even int)")
    p.add_argument("--q", type=float, default=0.1, help="WS rewiring probability")
    add_common(p, config=False)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("gen-partition", help="partition a graph into clusters")
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--kind", required=True,
                   choices=["singleton", "contiguous_blocks", "random_balanced",
                            "label_propagation"])
    p.add_argument("--block-size", type=int, dest="block_size")
    p.add_argument("--clusters", type=int)
    add_common(p, config=False)
    p.set_defaults(func=cmd_gen_partition)

    for name, fn, desc in (
            ("run", cmd_run, "run a Monte Carlo experiment from a JSON config"),
            ("sweep", cmd_sweep, "compare partitions for a cluster design"),
            ("certify", cmd_certify, "check bias/variance bounds by enumeration"),
            ("rideshare", cmd_rideshare, "switchback pricing experiment sweep")):
        p = sub.add_parser(name, help=desc)
        add_common(p)
        p.set_defaults(func=fn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
