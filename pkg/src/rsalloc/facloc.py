"""Discrete-event simulator of a two-warehouse delivery system.

A day of orders arrives by a Poisson process on a unit-square city; each
order is dispatched to the nearest warehouse with an idle truck, or queued
FIFO until a truck frees up.  A replication averages, over simulated days,
the daily fraction of orders delivered within 60 minutes of arrival.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .engine import SamplingSource

DAY_MINUTES = 540.0          # orders arrive 8 AM - 5 PM
ARRIVAL_RATE = 1.0 / 3.0     # per minute
PICKUP_MEAN = 5.0            # minutes, exponential
DELIVER_MEAN = 10.0          # minutes, exponential
MINUTES_PER_UNIT = 60.0      # 1 city unit = 30 km at 30 km/h
ON_TIME_LIMIT = 60.0         # minutes from arrival to delivery
DENSITY_PEAK = 1.6           # rejection-sampling envelope for f(x, y)


@dataclass(frozen=True)
class WarehouseDesign:
    """Two warehouse locations on the unit square plus a truck fleet size."""

    locations: tuple[tuple[float, float], tuple[float, float]]
    trucks_per_warehouse: int = 10

    def __post_init__(self):
        for x, y in self.locations:
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ValueError("warehouse coordinates must lie in [0, 1]")
        if self.trucks_per_warehouse < 1:
            raise ValueError("need at least one truck per warehouse")

    @classmethod
    def from_flat(cls, z, trucks_per_warehouse: int = 10) -> "WarehouseDesign":
        z1, z2, z3, z4 = z
        return cls(locations=((z1, z2), (z3, z4)),
                   trucks_per_warehouse=trucks_per_warehouse)


@dataclass(frozen=True)
class Order:
    """One delivery order with its dispatch outcome."""

    arrival_time: float
    location: tuple[float, float]
    dispatch_time: float
    delivery_time: float
    warehouse: int
    truck: int


def paper_designs(trucks_per_warehouse: int = 10) -> list[WarehouseDesign]:
    """The ten benchmark alternatives ``(0.49+0.01i, 0.59+0.01i, 0.59+0.01i,
    0.79+0.01i)`` for i = 1..10; the first is the true best."""
    return [WarehouseDesign.from_flat((0.49 + 0.01 * i, 0.59 + 0.01 * i,
                                       0.59 + 0.01 * i, 0.79 + 0.01 * i),
                                      trucks_per_warehouse)
            for i in range(1, 11)]


def order_density(x, y):
    """Unnormalized spatial density of order locations on the unit square."""
    return DENSITY_PEAK - (np.abs(np.asarray(x) - 0.8) + np.abs(np.asarray(y) - 0.8))


def sample_order_location(rng: np.random.Generator) -> tuple[float, float]:
    """One order location by rejection sampling against a uniform proposal."""
    while True:
        x = rng.random()
        y = rng.random()
        if rng.random() * DENSITY_PEAK < order_density(x, y):
            return x, y


def _sample_locations(rng: np.random.Generator, n: int):
    """Vectorized rejection sampling of n order locations."""
    xs = np.empty(n)
    ys = np.empty(n)
    have = 0
    while have < n:
        m = int((n - have) * 1.9) + 8
        x = rng.random(m)
        y = rng.random(m)
        u = rng.random(m) * DENSITY_PEAK
        keep = u < order_density(x, y)
        take = min(int(keep.sum()), n - have)
        xs[have:have + take] = x[keep][:take]
        ys[have:have + take] = y[keep][:take]
        have += take
    return xs, ys


@njit(cache=True)
def _dispatch_days(arrivals, loc_x, loc_y, pickups, delivers, day_ends,
                   w0x, w0y, w1x, w1y, n_trucks):
    """Run the dispatch loop over pre-drawn orders; mean daily on-time share.

    Orders are processed in arrival order (dispatches happen in arrival
    order: a queued order always precedes later arrivals).  A truck is busy
    from dispatch until it returns to its warehouse.
    """
    n_days = day_ends.shape[0]
    avail = np.empty((2, n_trucks))
    total = 0.0
    start = 0
    for day in range(n_days):
        end = day_ends[day]
        for wh in range(2):
            for trk in range(n_trucks):
                avail[wh, trk] = 0.0
        on_time = 0
        for idx in range(start, end):
            arrive = arrivals[idx]
            free0 = avail[0, 0]
            truck0 = 0
            for trk in range(1, n_trucks):
                if avail[0, trk] < free0:
                    free0 = avail[0, trk]
                    truck0 = trk
            free1 = avail[1, 0]
            truck1 = 0
            for trk in range(1, n_trucks):
                if avail[1, trk] < free1:
                    free1 = avail[1, trk]
                    truck1 = trk
            soonest = free0 if free0 < free1 else free1
            dispatch = arrive if arrive > soonest else soonest
            dist0 = abs(loc_x[idx] - w0x) + abs(loc_y[idx] - w0y)
            dist1 = abs(loc_x[idx] - w1x) + abs(loc_y[idx] - w1y)
            if free0 <= dispatch and (free1 > dispatch or dist0 <= dist1):
                wh, trk, dist = 0, truck0, dist0
            else:
                wh, trk, dist = 1, truck1, dist1
            travel = MINUTES_PER_UNIT * dist
            delivered = dispatch + pickups[idx] + travel + delivers[idx]
            avail[wh, trk] = delivered + travel
            if delivered - arrive <= ON_TIME_LIMIT:
                on_time += 1
        n_orders = end - start
        if n_orders > 0:
            total += on_time / n_orders
        else:
            total += 1.0
        start = end
    return total / n_days


def simulate_day(design: WarehouseDesign, arrivals, loc_x, loc_y,
                 pickups, delivers) -> list[Order]:
    """Reference dispatch of one day's pre-drawn orders, returning Orders.

    Pure-Python mirror of the compiled loop, used to inspect dispatch
    decisions (queue order, truck busy intervals, warehouse choice).
    """
    n_trucks = design.trucks_per_warehouse
    (w0x, w0y), (w1x, w1y) = design.locations
    avail = [[0.0] * n_trucks, [0.0] * n_trucks]
    orders = []
    for idx in range(len(arrivals)):
        arrive = arrivals[idx]
        free_times = [min(avail[0]), min(avail[1])]
        trucks = [avail[0].index(free_times[0]), avail[1].index(free_times[1])]
        dispatch = max(arrive, min(free_times))
        dist = [abs(loc_x[idx] - w0x) + abs(loc_y[idx] - w0y),
                abs(loc_x[idx] - w1x) + abs(loc_y[idx] - w1y)]
        if free_times[0] <= dispatch and (free_times[1] > dispatch
                                          or dist[0] <= dist[1]):
            wh = 0
        else:
            wh = 1
        trk = trucks[wh]
        travel = MINUTES_PER_UNIT * dist[wh]
        delivered = dispatch + pickups[idx] + travel + delivers[idx]
        avail[wh][trk] = delivered + travel
        orders.append(Order(arrival_time=arrive,
                            location=(loc_x[idx], loc_y[idx]),
                            dispatch_time=dispatch, delivery_time=delivered,
                            warehouse=wh, truck=trk))
    return orders


def _draw_replication(rng: np.random.Generator, days: int):
    """All random inputs for one replication, drawn before any dispatching
    so the arrival process is identical whatever the fleet size."""
    counts = rng.poisson(DAY_MINUTES * ARRIVAL_RATE, days)
    day_ends = np.cumsum(counts)
    total = int(day_ends[-1])
    arrivals = np.empty(total)
    start = 0
    for d in range(days):
        c = int(counts[d])
        arrivals[start:start + c] = np.sort(rng.random(c)) * DAY_MINUTES
        start += c
    loc_x, loc_y = _sample_locations(rng, total)
    pickups = rng.exponential(PICKUP_MEAN, total)
    delivers = rng.exponential(DELIVER_MEAN, total)
    return arrivals, loc_x, loc_y, pickups, delivers, day_ends


def _as_generator(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.Generator(
        np.random.Philox(seed=np.random.SeedSequence(seed_or_rng)))


def simulate_replication(design: WarehouseDesign, days: int, seed_or_rng) -> float:
    """Average over ``days`` of the daily fraction delivered within an hour."""
    if days < 1:
        raise ValueError("need at least one day")
    rng = _as_generator(seed_or_rng)
    arrivals, loc_x, loc_y, pickups, delivers, day_ends = _draw_replication(rng, days)
    (w0x, w0y), (w1x, w1y) = design.locations
    return float(_dispatch_days(arrivals, loc_x, loc_y, pickups, delivers,
                                day_ends, w0x, w0y, w1x, w1y,
                                design.trucks_per_warehouse))


class FacilityLocationSource(SamplingSource):
    """Sampling source over warehouse designs.

    The engine selects the design with the smallest sample mean, so samples
    are negated on-time proportions: the design with the largest true
    proportion is the engine's best.
    """

    def __init__(self, designs: list[WarehouseDesign], days: int = 30):
        if not designs:
            raise ValueError("need at least one design")
        self.designs = list(designs)
        self.days = days

    @property
    def k(self) -> int:
        return len(self.designs)

    def sample(self, design: int, rng: np.random.Generator) -> float:
        return -simulate_replication(self.designs[design], self.days, rng)


def facloc_source(designs: list[WarehouseDesign], days: int = 30) -> FacilityLocationSource:
    """Wrap warehouse designs as a (negated-proportion) sampling source."""
    return FacilityLocationSource(designs, days=days)
