"""Randomized experiments on interference graphs: simulation, estimation,
and enumeration-based certification of bias/variance bounds."""

from .graph import (InterferenceGraph, GraphError, EdgeListParseError, EdgeListReport,
                    audit, erdos_renyi, watts_strogatz, contract, from_edge_list,
                    to_edge_list)
from .partition import (Partition, PartitionError, ClusterDegreeStats, singleton,
                        contiguous_blocks, random_balanced, label_propagation,
                        cluster_neighborhoods, cluster_degree_stats)
from .outcomes import (OutcomeModel, OutcomeModelError, LinearModel,
                       MultiplicativeModel, LowOrderModel, BenchmarkModel,
                       MarkovChainSpec, MarkovianModel, ground_truth_ate,
                       model_from_config, random_linear_model, random_low_order_model)
from .design import (TreatmentDraw, DesignError, draw_unit_bernoulli,
                     draw_cluster_bernoulli, validate_probability)
from .estimators import (EstimateReport, EstimatorError, propensity_terms,
                         propensity_moments, dm, dm_ratio, ht, dn, dn_credit,
                         dn_cluster, ht_cluster, ht_exposure_counts)
from .oracle import (Certificate, ExactMoments, OracleError, enumerate_expectation,
                     finite_difference, smoothness, certify_dn_bias,
                     certify_dn_cluster_bias, certify_dn_variance,
                     dn_variance_bound, outcome_max, taylor_gradient_check,
                     taylor_hessian_check)
from .harness import (ExperimentConfig, ConfigError, TrialSummary, run_trials,
                      summarize, sweep_clusters, compare_bounds,
                      write_trials_csv, write_summary_csv)
from .rideshare import (CityConfig, PricingPolicy, Eyeball, EyeballBatch,
                        RideshareError, generate_eyeballs, simulate,
                        build_interference_graph, switchback_partition,
                        ground_truth_ate_rideshare, run_pricing_experiment,
                        load_trace, save_trace, zone_of, audit_occupancy)

__all__ = [name for name in dir() if not name.startswith("_")]
