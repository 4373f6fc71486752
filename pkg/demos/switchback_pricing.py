"""Switchback pricing experiment in the grid-city ride-hailing simulator.

Raising prices in one zone-time block pushes demand onto cars that would
otherwise serve neighboring requests, so treatment effects leak across
blocks. The demo runs a small city (keeping the runtime to roughly a
minute), sweeps the switchback duration, and compares the naive
difference-in-means against the cluster neighbor-corrected estimator, both
scored against a paired all-treated / all-control counterfactual computed
with common random numbers.
"""

import netexp as nx

city = nx.CityConfig(grid_width=30, grid_height=30, cell_km=0.2,
                     speed_km_per_min=0.3, fleet_size=40,
                     zone_cols=3, zone_rows=3,
                     horizon_min=720.0, arrival_rate_per_min=3.0)
policy = nx.PricingPolicy(rate_per_min=0.15, treatment_multiplier=2.0,
                          beta0=2.0, beta_price=-0.24, beta_eta=-0.08)

eyeballs = nx.generate_eyeballs(city, seed=0)
print(f"city: {city.grid_width}x{city.grid_height} cells, "
      f"{city.fleet_size} cars, {len(eyeballs)} ride requests over "
      f"{city.horizon_min / 60:.0f}h")

rows, ate = nx.run_pricing_experiment(
    city, policy, durations=[2, 5, 15, 30, 60], p=0.5, num_trials=10, seed=0,
    time_threshold_min=10.0, dist_threshold_km=4.0)
print(f"paired-counterfactual ATE of the price doubling: {ate:+.4f} "
      f"(revenue per request)\n")

print(f"{'duration':>8} {'estimator':<11} {'mean est':>10} {'bias':>9} "
      f"{'rmse':>8} {'clusters':>9}")
for row in rows:
    print(f"{row['duration_min']:>8} {row['estimator']:<11} "
          f"{row['mean_estimate']:>+10.4f} {row['bias']:>+9.4f} "
          f"{row['rmse']:>8.4f} {row['num_clusters']:>9}")

dm_best = min(r["rmse"] for r in rows if r["estimator"] == "dm")
dn_best = min(r["rmse"] for r in rows if r["estimator"] == "dn_cluster")
print(f"\nbest-duration RMSE: dm {dm_best:.4f} vs dn_cluster {dn_best:.4f}")
print("""
Two things to notice:
  * dm sits below the ATE at every duration: treated blocks price some
    riders out, freeing cars that then serve control blocks with better
    ETAs, so the control arm looks healthier than a truly untreated city
    would and the price increase is systematically undersold;
  * at this pocket scale dn_cluster's variance still dominates -- its bias
    correction only pays off with more requests and more trials. The
    acceptance suite runs the full-size city (60x60 cells, ~50k requests),
    where the corrected estimator's best-duration RMSE beats dm's.""")
