"""Grid-city ride-hailing simulator for switchback pricing experiments.

A rectangular grid of cells stands in for a street map; routing is Manhattan
distance times cell size. Riders ("eyeballs") arrive over time, see a quoted
price and pickup ETA, and accept via a logistic choice model. Accepting a
trip removes the dispatched car from the supply pool until dropoff, which is
how treatment assignments interfere across nearby requests.

Two couplings make counterfactual comparisons clean:
  * acceptance coins are drawn per-eyeball from a counter-based stream keyed
    only by the seed, so two runs with different assignments share the exact
    same randomness (common random numbers);
  * acceptance is `coin < prob`, so raising the price weakly decreases each
    eyeball's acceptance indicator when the coins are held fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .design import draw_cluster_bernoulli
from .estimators import EstimateReport, dm, dn_cluster
from .graph import InterferenceGraph
from .harness import summarize
from .partition import Partition, cluster_neighborhoods


class RideshareError(ValueError):
    pass


@dataclass
class CityConfig:
    grid_width: int = 60
    grid_height: int = 60
    cell_km: float = 0.1
    speed_km_per_min: float = 0.5
    fleet_size: int = 100
    zone_cols: int = 3
    zone_rows: int = 3
    horizon_min: float = 2880.0
    arrival_rate_per_min: float = 7.0
    trace_path: str | None = None

    def validate(self):
        if self.speed_km_per_min <= 0:
            raise RideshareError("car speed must be positive")
        if self.fleet_size < 0:
            raise RideshareError("fleet size must be >= 0")
        if self.grid_width % self.zone_cols or self.grid_height % self.zone_rows:
            raise RideshareError(
                f"zones must tile the grid exactly: {self.zone_cols}x{self.zone_rows} "
                f"zones do not divide a {self.grid_width}x{self.grid_height} grid")
        return self

    @property
    def num_zones(self):
        return self.zone_cols * self.zone_rows


@dataclass
class PricingPolicy:
    rate_per_min: float = 1.0
    treatment_multiplier: float = 1.25  # > 1 raises the treated price
    beta0: float = 3.0
    beta_price: float = -0.12
    beta_eta: float = -0.25

    def validate(self):
        if not (self.beta_price < 0 and self.beta_eta < 0):
            raise RideshareError("choice coefficients beta_price and beta_eta must be negative")
        return self


@dataclass
class Eyeball:
    index: int
    t_min: float
    pickup: tuple
    dropoff: tuple


@dataclass
class EyeballBatch:
    """Column layout of an eyeball stream, sorted by request time."""
    t_min: np.ndarray
    px: np.ndarray
    py: np.ndarray
    dx: np.ndarray
    dy: np.ndarray

    def __len__(self):
        return len(self.t_min)

    def __getitem__(self, i):
        return Eyeball(index=i, t_min=float(self.t_min[i]),
                       pickup=(int(self.px[i]), int(self.py[i])),
                       dropoff=(int(self.dx[i]), int(self.dy[i])))


def generate_eyeballs(city, seed):
    """Poisson arrival stream with uniform random pickup/dropoff cells."""
    city.validate()
    if city.trace_path is not None:
        return load_trace(city.trace_path, city)
    rng = np.random.default_rng([int(seed), 11])
    n = int(rng.poisson(city.arrival_rate_per_min * city.horizon_min))
    t = np.sort(rng.random(n) * city.horizon_min)
    px = rng.integers(0, city.grid_width, n)
    py = rng.integers(0, city.grid_height, n)
    dx = rng.integers(0, city.grid_width, n)
    dy = rng.integers(0, city.grid_height, n)
    return EyeballBatch(t_min=t, px=px, py=py, dx=dx, dy=dy)


def load_trace(path, city=None):
    df = pd.read_csv(path)
    expected = ["t_min", "px", "py", "dx", "dy"]
    if list(df.columns) != expected:
        raise RideshareError(f"trace file must have columns {expected}, got {list(df.columns)}")
    order = np.argsort(df["t_min"].to_numpy(), kind="stable")
    batch = EyeballBatch(
        t_min=df["t_min"].to_numpy(dtype=np.float64)[order],
        px=df["px"].to_numpy(dtype=np.int64)[order],
        py=df["py"].to_numpy(dtype=np.int64)[order],
        dx=df["dx"].to_numpy(dtype=np.int64)[order],
        dy=df["dy"].to_numpy(dtype=np.int64)[order])
    if city is not None:
        city.validate()
        if (batch.t_min < 0).any() or (batch.t_min > city.horizon_min).any():
            raise RideshareError("trace contains request times outside the horizon")
        for xs, hi in ((batch.px, city.grid_width), (batch.dx, city.grid_width),
                       (batch.py, city.grid_height), (batch.dy, city.grid_height)):
            if (xs < 0).any() or (xs >= hi).any():
                raise RideshareError("trace contains cells outside the grid")
    return batch


def save_trace(path, eyeballs):
    pd.DataFrame({"t_min": eyeballs.t_min, "px": eyeballs.px, "py": eyeballs.py,
                  "dx": eyeballs.dx, "dy": eyeballs.dy}).to_csv(path, index=False)


def zone_of(city, x, y):
    """Zone index of grid cell (x, y) under the rectangular zone tiling."""
    zw = city.grid_width // city.zone_cols
    zh = city.grid_height // city.zone_rows
    return (np.asarray(y) // zh) * city.zone_cols + np.asarray(x) // zw


@dataclass
class SimulationDetail:
    Y: np.ndarray
    accepted: np.ndarray
    prices: np.ndarray
    etas: np.ndarray  # minutes; inf when no car was free
    trip_log: list    # (eyeball, car, start, end) per accepted trip


def simulate(city, policy, assignment, seed, eyeballs=None, return_detail=False):
    """Run one pricing experiment and return per-eyeball rewards.

    Y_i is the accepted price, or 0 on rejection (including the forced
    rejection when no car is free). Cars start at uniform random cells and
    are busy from dispatch until dropoff.
    """
    city.validate()
    policy.validate()
    if eyeballs is None:
        eyeballs = generate_eyeballs(city, seed)
    n = len(eyeballs)
    z = np.asarray(assignment, dtype=np.float64)
    if len(z) != n:
        raise RideshareError(f"assignment has {len(z)} entries for {n} eyeballs")

    rng_cars = np.random.default_rng([int(seed), 13])
    car_x = rng_cars.integers(0, city.grid_width, city.fleet_size).astype(np.float64)
    car_y = rng_cars.integers(0, city.grid_height, city.fleet_size).astype(np.float64)
    free_at = np.zeros(city.fleet_size)
    # one uniform coin per eyeball, independent of the assignment and of any
    # earlier acceptance decisions (common random numbers)
    coins = np.random.default_rng([int(seed), 17]).random(n)

    price_factor = 1.0 + (policy.treatment_multiplier - 1.0) * z
    trip_km = (np.abs(eyeballs.px - eyeballs.dx)
               + np.abs(eyeballs.py - eyeballs.dy)) * city.cell_km
    trip_min = trip_km / city.speed_km_per_min
    prices = policy.rate_per_min * price_factor * trip_min

    Y = np.zeros(n)
    accepted = np.zeros(n, dtype=bool)
    etas = np.full(n, np.inf)
    trip_log = []
    for i in range(n):
        t = eyeballs.t_min[i]
        free = free_at <= t
        if not free.any():
            continue
        dist = np.abs(car_x - eyeballs.px[i]) + np.abs(car_y - eyeballs.py[i])
        dist[~free] = np.inf
        car = int(np.argmin(dist))  # ties broken by lowest car id
        eta = dist[car] * city.cell_km / city.speed_km_per_min
        etas[i] = eta
        logit = policy.beta0 + policy.beta_price * prices[i] + policy.beta_eta * eta
        if coins[i] < 1.0 / (1.0 + np.exp(-logit)):
            accepted[i] = True
            Y[i] = prices[i]
            done = t + eta + trip_min[i]
            car_x[car] = eyeballs.dx[i]
            car_y[car] = eyeballs.dy[i]
            free_at[car] = done
            trip_log.append((i, car, float(t), float(done)))
    if return_detail:
        return SimulationDetail(Y=Y, accepted=accepted, prices=prices, etas=etas,
                                trip_log=trip_log)
    return Y


def audit_occupancy(detail, num_cars):
    """Assert no car serves two overlapping trips; returns trips per car."""
    per_car = [[] for _ in range(num_cars)]
    for i, car, start, end in detail.trip_log:
        per_car[car].append((start, end))
    for car, trips in enumerate(per_car):
        trips.sort()
        for (s0, e0), (s1, e1) in zip(trips, trips[1:]):
            if s1 < e0:
                raise RideshareError(
                    f"car {car} double-booked: trip ending {e0} overlaps trip starting {s1}")
    return [len(trips) for trips in per_car]


def build_interference_graph(eyeballs, time_threshold_min=10.0, dist_threshold_km=2.0,
                             cell_km=0.1):
    """Undirected edge between eyeballs close in both time and pickup location."""
    if time_threshold_min < 0 or dist_threshold_km < 0:
        raise RideshareError("interference thresholds must be >= 0")
    n = len(eyeballs)
    t = eyeballs.t_min
    if np.any(np.diff(t) < 0):
        raise RideshareError("eyeballs must be sorted by request time")
    max_cells = dist_threshold_km / cell_km
    ends = np.searchsorted(t, t + time_threshold_min, side="right")
    srcs, dsts = [], []
    for i in range(n):
        j0, j1 = i + 1, ends[i]
        if j1 <= j0:
            continue
        d = (np.abs(eyeballs.px[j0:j1] - eyeballs.px[i])
             + np.abs(eyeballs.py[j0:j1] - eyeballs.py[i]))
        hits = np.nonzero(d <= max_cells)[0] + j0
        srcs.append(np.full(len(hits), i))
        dsts.append(hits)
    if srcs:
        edges = np.column_stack([np.concatenate(srcs), np.concatenate(dsts)])
    else:
        edges = np.empty((0, 2), dtype=np.int64)
    return InterferenceGraph(n, edges, directed=False)


def switchback_partition(eyeballs, city, duration_min):
    """One cluster per (pickup zone, time block of the given duration)."""
    if duration_min <= 0:
        raise RideshareError("switchback duration must be positive")
    zones = zone_of(city, eyeballs.px, eyeballs.py)
    blocks = np.floor_divide(eyeballs.t_min, duration_min).astype(np.int64)
    keys = zones * (blocks.max() + 1 if len(blocks) else 1) + blocks
    _, dense = np.unique(keys, return_inverse=True)
    return Partition(dense)


def ground_truth_ate_rideshare(city, policy, seed, eyeballs=None):
    """Global ATE from a paired all-treated vs all-control counterfactual."""
    if eyeballs is None:
        eyeballs = generate_eyeballs(city, seed)
    n = len(eyeballs)
    y1 = simulate(city, policy, np.ones(n), seed, eyeballs=eyeballs)
    y0 = simulate(city, policy, np.zeros(n), seed, eyeballs=eyeballs)
    return float(np.mean(y1 - y0))


def run_pricing_experiment(city, policy, durations, p, num_trials, seed,
                           time_threshold_min=10.0, dist_threshold_km=2.0):
    """Switchback sweep: for each duration, run K cluster-Bernoulli trials and
    summarize DM and the cluster neighbor-corrected estimator against the
    paired-counterfactual ATE.

    Returns (rows, ate); rows is a list of dicts, one per (duration, estimator).
    """
    if not durations:
        raise RideshareError("need at least one switchback duration")
    eyeballs = generate_eyeballs(city, seed)
    ate = ground_truth_ate_rideshare(city, policy, seed, eyeballs=eyeballs)
    graph = build_interference_graph(eyeballs, time_threshold_min, dist_threshold_km,
                                     cell_km=city.cell_km)
    rows = []
    for di, duration in enumerate(durations):
        partition = switchback_partition(eyeballs, city, duration)
        neighborhood = cluster_neighborhoods(graph, partition)
        reports = []
        for k in range(num_trials):
            draw = draw_cluster_bernoulli(partition, p, seed, trial=di * num_trials + k)
            Y = simulate(city, policy, draw.z, seed, eyeballs=eyeballs)
            reports.append(EstimateReport("dm", dm(draw.z, Y, p), trial=k))
            reports.append(EstimateReport(
                "dn_cluster",
                dn_cluster(graph, partition, draw, Y, p, neighborhood=neighborhood),
                trial=k))
        summaries = summarize(reports, ate, absolute=(ate == 0))
        for name, s in summaries.items():
            rows.append({"duration_min": duration, "estimator": name, "K": s.num_trials,
                         "mean_estimate": s.mean_estimate, "bias": s.bias,
                         "rmse": s.rmse, "variance": s.variance, "ate": ate,
                         "num_clusters": partition.num_clusters})
    return rows, ate
