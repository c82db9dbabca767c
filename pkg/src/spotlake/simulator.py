"""Simulated cloud vendor: three data feeds plus the spot-request lifecycle.

The hidden ground truth behind the published scores is a per-pair pair of
bands (placement-score band per AZ, interruption band per region). Request
behavior is calibrated so that 24-hour fulfillment and interruption statistics
per band combination land on the observed reference rates, and fulfillment
latencies match the observed medians.

Randomness is split into independent per-object streams keyed by a stable
hash of (world seed, purpose, object), so advancing the clock in different
increments replays identical histories.
"""

from __future__ import annotations

import hashlib
import heapq
import itertools
import math
import random
from dataclasses import dataclass

from .model import (
    Band3,
    BAND3_SCORE,
    InstanceType,
    InterruptionBand,
    RequestState,
    SpotlakeError,
    SpotPriceRecord,
    Timestamp,
    parse_rfc3339,
    size_rank,
)
from .planner import PlacementQuery
from .universe import Universe

DEFAULT_START = parse_rfc3339("2022-01-01T00:00:00Z")

QUERY_BUDGET = 50
BUDGET_WINDOW_S = 24 * 3600
MAX_RESULTS = 10

# Mean holding times of the hidden state processes. Placement bands move much
# faster than interruption bands, with savings and price in between.
SPS_HOLD_MEAN_S = 12 * 3600
IF_HOLD_MEAN_S = 7 * 24 * 3600
SAVINGS_HOLD_MEAN_S = 2 * 24 * 3600
PRICE_HOLD_MEAN_S = 3 * 24 * 3600

# Stationary-ish band weights; per-pair weights shift with family class and
# size so bigger / specialised hardware scores worse.
SPS_BASE_WEIGHTS = {Band3.HIGH: 0.55, Band3.MEDIUM: 0.25, Band3.LOW: 0.20}
IF_BASE_WEIGHTS = {Band3.HIGH: 0.40, Band3.MEDIUM: 0.30, Band3.LOW: 0.30}

# Composite-query bonus distribution: score of a multi-type query is the sum
# of the individual scores plus this non-negative bonus, capped at 10.
BONUS_VALUES = (0, 1, 2)
BONUS_WEIGHTS = (0.39, 0.40, 0.21)

# Minimum spacing that guarantees every lifecycle episode spans at least one
# 5-second status sample, so trace-derived labels equal event-derived ones.
MIN_EVENT_SPACING_S = 5.0
HOLD_AFTER_S = 120.0

EXPERIMENT_HORIZON_S = 24 * 3600.0


class QueryBudgetExhausted(SpotlakeError):
    pass


class UnknownType(SpotlakeError):
    pass


class UnknownRegion(SpotlakeError):
    pass


class UnknownLocation(SpotlakeError):
    pass


class UnknownPair(SpotlakeError):
    pass


class RangeInverted(SpotlakeError):
    pass


class InvalidBid(SpotlakeError):
    pass


# ---------------------------------------------------------------------------
# Calibration

# Reference 24 h outcome rates per (spsBand, ifBand) stratum: fraction of
# requests never fulfilled, and fraction interrupted at least once. The five
# measured strata are fixed; the remaining combinations are filled with the
# mean of their orthogonal neighbours for exploratory runs.
_H, _M, _L = Band3.HIGH, Band3.MEDIUM, Band3.LOW

NOT_FULFILLED_RATE: dict[tuple[Band3, Band3], float] = {
    (_H, _H): 0.0,
    (_H, _M): 0.0,
    (_H, _L): 0.0,
    (_M, _H): 0.2549,
    (_M, _M): 0.2549,
    (_M, _L): 0.2549,
    (_L, _H): 0.5818,
    (_L, _M): (0.5818 + 0.4561) / 2,
    (_L, _L): 0.4561,
}

INTERRUPTED_RATE: dict[tuple[Band3, Band3], float] = {
    (_H, _H): 0.1471,
    (_H, _L): 0.4052,
    (_M, _M): 0.3922,
    (_L, _H): 0.3091,
    (_L, _L): 0.4561,
    (_H, _M): (0.1471 + 0.4052) / 2,
    (_M, _H): (0.1471 + 0.3091) / 2,
    (_M, _L): (0.4052 + 0.4561) / 2,
    (_L, _M): (0.3091 + 0.4561) / 2,
}

# Fulfillment latency mixture per placement band: a point mass of sub-second
# fulfillments plus a log-normal tail. Medians: 30 s when the placement band
# is high (28% within one second, >90% within 135 s) and 1322 s when low.
_LATENCY_BY_SPS: dict[Band3, tuple[float, float, float]] = {
    _H: (0.28, 47.4, 0.9),  # (fast mass, tail median s, sigma)
    _M: (0.05, 300.0, 1.0),
    _L: (0.0, 1322.0, 1.0),
}

# Conditional medians of time-to-first-interruption for the two strata with
# observed values; they pin the Weibull shape of the interruption process.
_INTERRUPT_MEDIAN_S = {(_H, _L): 6872.0, (_L, _H): 2859.0}


@dataclass(frozen=True)
class StratumParams:
    fulfill_prob: float
    fast_mass: float
    tail_median_s: float
    sigma: float
    weib_shape: float
    weib_scale_s: float
    hazard_per_hour: float  # window-equivalent constant rate, for reporting


def _mean_latency_hours(sps: Band3) -> float:
    fast_mass, median_s, sigma = _LATENCY_BY_SPS[sps]
    tail_mean = median_s * math.exp(sigma * sigma / 2.0)
    return ((1.0 - fast_mass) * tail_mean + fast_mass * 0.5) / 3600.0


def _solve_weibull(ratio: float, window_h: float, cond_median_h: float | None, k_default: float | None):
    # F(W) = 1 - exp(-(W/lam)^k) = ratio; conditional median m has F(m) = ratio/2.
    a = -math.log(1.0 - ratio)
    if cond_median_h is not None:
        b = -math.log(1.0 - ratio / 2.0)
        k = math.log(b / a) / math.log(cond_median_h / window_h)
    else:
        assert k_default is not None
        k = k_default
    lam = window_h / a ** (1.0 / k)
    return k, lam


def _build_calibration() -> dict[tuple[Band3, Band3], StratumParams]:
    shapes: dict[tuple[Band3, Band3], float] = {}
    for stratum, median_s in _INTERRUPT_MEDIAN_S.items():
        sps, _ = stratum
        nf = NOT_FULFILLED_RATE[stratum]
        ratio = INTERRUPTED_RATE[stratum] / (1.0 - nf)
        window = 24.0 - _mean_latency_hours(sps)
        k, _ = _solve_weibull(ratio, window, median_s / 3600.0, None)
        shapes[stratum] = k
    k_default = sum(shapes.values()) / len(shapes)

    table: dict[tuple[Band3, Band3], StratumParams] = {}
    for stratum in itertools.product((_H, _M, _L), repeat=2):
        sps, _ = stratum
        nf = NOT_FULFILLED_RATE[stratum]
        fulfill_prob = 1.0 - nf
        ratio = INTERRUPTED_RATE[stratum] / fulfill_prob
        window = 24.0 - _mean_latency_hours(sps)
        k, lam = _solve_weibull(ratio, window, None, shapes.get(stratum, k_default))
        if stratum in shapes:
            k, lam = _solve_weibull(
                ratio, window, _INTERRUPT_MEDIAN_S[stratum] / 3600.0, None
            )
        fast_mass, tail_median_s, sigma = _LATENCY_BY_SPS[sps]
        table[stratum] = StratumParams(
            fulfill_prob=fulfill_prob,
            fast_mass=fast_mass,
            tail_median_s=tail_median_s,
            sigma=sigma,
            weib_shape=k,
            weib_scale_s=lam * 3600.0,
            hazard_per_hour=-math.log(1.0 - ratio) / 24.0,
        )
    return table


CALIBRATION = _build_calibration()


# ---------------------------------------------------------------------------
# Request lifecycle

@dataclass(frozen=True)
class LifecycleEvent:
    t: float  # seconds since submission
    state: RequestState


def simulate_lifecycle(
    params: StratumParams,
    persistent: bool,
    horizon_s: float,
    rng: random.Random,
) -> list[LifecycleEvent]:
    """Event timeline of one spot request over [0, horizon_s].

    Each (re)submission either fulfills after a mixture-drawn latency or parks
    in Holding for good. A fulfilled instance is interrupted after a Weibull
    time; persistent requests then re-enter evaluation, one-shot requests end.
    """
    events = [LifecycleEvent(0.0, RequestState.PENDING_EVALUATION)]
    t = 0.0
    attempt = 0
    while t < horizon_s:
        will_fulfill = rng.random() < params.fulfill_prob
        if rng.random() < params.fast_mass:
            latency = rng.random()  # sub-second fast path
        else:
            latency = rng.lognormvariate(math.log(params.tail_median_s), params.sigma)
        if attempt > 0:
            latency = max(latency, MIN_EVENT_SPACING_S)
        if not will_fulfill:
            if t + HOLD_AFTER_S < horizon_s:
                events.append(LifecycleEvent(t + HOLD_AFTER_S, RequestState.HOLDING))
            break
        if latency > HOLD_AFTER_S and t + HOLD_AFTER_S < horizon_s:
            events.append(LifecycleEvent(t + HOLD_AFTER_S, RequestState.HOLDING))
        t += latency
        if t >= horizon_s:
            break
        events.append(LifecycleEvent(t, RequestState.FULFILLED))
        run_time = max(rng.weibullvariate(params.weib_scale_s, params.weib_shape), MIN_EVENT_SPACING_S)
        t += run_time
        if t >= horizon_s:
            break
        if persistent:
            events.append(LifecycleEvent(t, RequestState.PENDING_EVALUATION))
            attempt += 1
        else:
            events.append(LifecycleEvent(t, RequestState.TERMINAL))
            break
    return events


def lifecycle_outcome(events: list[LifecycleEvent]) -> tuple[str, float | None, float | None]:
    """(label, timeToFulfillSec, timeToFirstInterruptSec) from an event timeline."""
    fulfilled_at: float | None = None
    first_interrupt_after: float | None = None
    prev_state: RequestState | None = None
    prev_fulfill_t: float | None = None
    for ev in events:
        if ev.state is RequestState.FULFILLED and fulfilled_at is None:
            fulfilled_at = ev.t
        if (
            prev_state is RequestState.FULFILLED
            and ev.state in (RequestState.PENDING_EVALUATION, RequestState.TERMINAL)
            and first_interrupt_after is None
        ):
            assert prev_fulfill_t is not None
            first_interrupt_after = ev.t - prev_fulfill_t
        if ev.state is RequestState.FULFILLED:
            prev_fulfill_t = ev.t
        prev_state = ev.state
    if fulfilled_at is None:
        return "NoFulfill", None, None
    if first_interrupt_after is not None:
        return "Interrupted", fulfilled_at, first_interrupt_after
    return "NoInterrupt", fulfilled_at, None


def sample_states_rle(
    events: list[LifecycleEvent], horizon_s: float, step_s: float = 5.0
) -> list[tuple[str, int]]:
    """Run-length-encoded status sequence sampled every step_s over [0, horizon_s]."""
    n_samples = int(horizon_s // step_s) + 1
    rle: list[tuple[str, int]] = []
    ev_idx = 0
    state = events[0].state
    for k in range(n_samples):
        t = k * step_s
        while ev_idx + 1 < len(events) and events[ev_idx + 1].t <= t:
            ev_idx += 1
            state = events[ev_idx].state
        name = state.value
        if rle and rle[-1][0] == name:
            rle[-1] = (name, rle[-1][1] + 1)
        else:
            rle.append((name, 1))
    return rle


# ---------------------------------------------------------------------------
# World

def _stream(seed: int, *parts: object) -> random.Random:
    text = ":".join(str(p) for p in (seed, *parts))
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "big"))


def _weighted_choice(rng: random.Random, weights: dict[Band3, float], exclude: Band3 | None = None) -> Band3:
    items = [(b, w) for b, w in weights.items() if b is not exclude]
    total = sum(w for _, w in items)
    x = rng.random() * total
    acc = 0.0
    for band, w in items:
        acc += w
        if x < acc:
            return band
    return items[-1][0]


@dataclass
class SpotRequest:
    id: str
    instance: str
    az: str
    bid_usd_per_hour: float
    persistent: bool
    submitted_at: Timestamp
    events: list[LifecycleEvent]

    def state_at(self, ts: Timestamp) -> RequestState:
        dt = ts - self.submitted_at
        state = self.events[0].state
        for ev in self.events:
            if ev.t <= dt:
                state = ev.state
            else:
                break
        return state


@dataclass
class AdvisorEntry:
    instance: str
    region: str
    band: InterruptionBand
    savings: float


# Advisor band published for a region given the worst AZ-level band in it.
_ADVISOR_BAND_BY_WORST = {
    Band3.HIGH: InterruptionBand.LT5,
    Band3.MEDIUM: InterruptionBand.B10_15,
    Band3.LOW: InterruptionBand.GT20,
}

_SAVINGS_BASE = {Band3.HIGH: 0.55, Band3.MEDIUM: 0.68, Band3.LOW: 0.82}

_CAPACITY_SENSITIVITY = {
    "general": 1,
    "compute-optimized": 1,
    "memory-optimized": 1,
    "accelerated-computing": 2,
    "storage-optimized": 2,
}


class World:
    """Single logical owner of all simulated vendor state.

    Mutations (clock advances, request submissions) are serialized by the
    caller; read-only queries are safe between them.
    """

    def __init__(self, universe: Universe, seed: int, start: Timestamp = DEFAULT_START):
        universe.validate()
        self.universe = universe
        self.seed = seed
        self.clock: Timestamp = start
        self.start = start

        self.sps_band: dict[tuple[str, str], Band3] = {}  # (type, az)
        self.if_band: dict[tuple[str, str], Band3] = {}  # (type, region)
        self.savings: dict[tuple[str, str], float] = {}  # (type, region)
        self.price: dict[tuple[str, str], float] = {}  # (type, az)
        self.price_log: dict[tuple[str, str], list[tuple[Timestamp, float]]] = {}

        self._events: list[tuple[int, int, str, tuple[str, str]]] = []
        self._event_seq = itertools.count()
        self._budgets: dict[str, list[tuple[Timestamp, object]]] = {}
        self._requests: dict[str, SpotRequest] = {}
        self._request_seq = itertools.count(1)
        self._hold_rngs: dict[tuple[str, str, str], random.Random] = {}
        self._az_if_hint: dict[tuple[str, str], Band3] = {}

        self._init_state()

    # -- initialisation ----------------------------------------------------

    def _pair_weights(self, itype: str, base: dict[Band3, float]) -> dict[Band3, float]:
        info = InstanceType.parse(itype)
        shift = 0.0
        if info.family_class.value in ("accelerated-computing", "storage-optimized"):
            shift += 0.18
        shift += min(size_rank(info.size), 20) * 0.012
        w = dict(base)
        moved_h = min(w[Band3.HIGH] * 0.9, shift)
        w[Band3.HIGH] -= moved_h
        w[Band3.MEDIUM] += moved_h * 0.45
        w[Band3.LOW] += moved_h * 0.55
        return w

    def _init_state(self) -> None:
        uni = self.universe
        for itype, az_bands in uni.initial_bands.items():
            for az, bands in az_bands.items():
                self._az_if_hint[(itype, az)] = Band3(bands[1])

        for itype, region in uni.region_pairs():
            pinned = None
            for az in uni.supporting_azs(itype, region):
                hint = self._az_if_hint.get((itype, az))
                if hint is not None:
                    pinned = hint
            rng = _stream(self.seed, "if0", itype, region)
            band = pinned or _weighted_choice(rng, self._pair_weights(itype, IF_BASE_WEIGHTS))
            self.if_band[(itype, region)] = band
            srng = _stream(self.seed, "sav0", itype, region)
            self.savings[(itype, region)] = self._draw_savings(srng, band)
            self._schedule(itype, region, "if")
            self._schedule(itype, region, "sav")

        for itype, az in uni.pairs():
            hint = uni.initial_bands.get(itype, {}).get(az)
            rng = _stream(self.seed, "sps0", itype, az)
            band = Band3(hint[0]) if hint else _weighted_choice(rng, self._pair_weights(itype, SPS_BASE_WEIGHTS))
            self.sps_band[(itype, az)] = band
            prng = _stream(self.seed, "price0", itype, az)
            od = uni.on_demand(itype)
            price = round(od * prng.uniform(0.22, 0.42), 4)
            self.price[(itype, az)] = price
            self.price_log[(itype, az)] = [(self.start, price)]
            self._schedule(itype, az, "sps")
            self._schedule(itype, az, "price")

    def _draw_savings(self, rng: random.Random, band: Band3) -> float:
        value = _SAVINGS_BASE[band] + rng.uniform(-0.05, 0.05)
        return round(min(max(value, 0.05), 0.95), 2)

    _HOLD_MEANS = {
        "sps": SPS_HOLD_MEAN_S,
        "if": IF_HOLD_MEAN_S,
        "sav": SAVINGS_HOLD_MEAN_S,
        "price": PRICE_HOLD_MEAN_S,
    }

    def _schedule(self, itype: str, place: str, kind: str) -> None:
        rng = self._hold_rng(kind + "hold", itype, place)
        hold = rng.expovariate(1.0 / self._HOLD_MEANS[kind])
        at = self.clock + max(1, int(hold))
        heapq.heappush(self._events, (at, next(self._event_seq), kind, (itype, place)))

    def _hold_rng(self, purpose: str, itype: str, place: str) -> random.Random:
        key = (purpose, itype, place)
        if key not in self._hold_rngs:
            self._hold_rngs[key] = _stream(self.seed, purpose, itype, place)
        return self._hold_rngs[key]

    # -- clock -------------------------------------------------------------

    def advance(self, seconds: int) -> None:
        if seconds <= 0:
            raise ValueError("clock advance must be positive")
        target = self.clock + seconds
        while self._events and self._events[0][0] <= target:
            at, _, kind, (itype, place) = heapq.heappop(self._events)
            self.clock = at
            self._fire(kind, itype, place, at)
        self.clock = target

    def _fire(self, kind: str, itype: str, place: str, at: Timestamp) -> None:
        if kind == "sps":
            rng = self._hold_rng("spsflip", itype, place)
            current = self.sps_band[(itype, place)]
            self.sps_band[(itype, place)] = _weighted_choice(
                rng, self._pair_weights(itype, SPS_BASE_WEIGHTS), exclude=current
            )
        elif kind == "if":
            rng = self._hold_rng("ifflip", itype, place)
            current = self.if_band[(itype, place)]
            self.if_band[(itype, place)] = _weighted_choice(
                rng, self._pair_weights(itype, IF_BASE_WEIGHTS), exclude=current
            )
            self._az_if_hint = {
                k: v for k, v in self._az_if_hint.items() if not (k[0] == itype and k[1].startswith(place))
            }
        elif kind == "sav":
            rng = self._hold_rng("savflip", itype, place)
            self.savings[(itype, place)] = self._draw_savings(rng, self.if_band[(itype, place)])
        elif kind == "price":
            rng = self._hold_rng("priceflip", itype, place)
            od = self.universe.on_demand(itype)
            new = self.price[(itype, place)] * rng.uniform(0.88, 1.14)
            new = round(min(max(new, od * 0.08), od * 0.95), 4)
            if new != self.price[(itype, place)]:
                self.price[(itype, place)] = new
                self.price_log[(itype, place)].append((at, new))
        self._schedule(itype, place, kind)

    # -- hidden state reads --------------------------------------------------

    def pair_bands(self, itype: str, az: str) -> tuple[Band3, Band3]:
        """(placement band, interruption band) governing a (type, AZ) pair."""
        if (itype, az) not in self.sps_band:
            raise UnknownPair(f"({itype}, {az}) not in universe")
        region = self.universe.region_of(az)
        if_band = self._az_if_hint.get((itype, az), self.if_band[(itype, region)])
        return self.sps_band[(itype, az)], if_band

    def state_digest(self) -> tuple:
        return (
            self.clock,
            tuple(sorted((k, v.value) for k, v in self.sps_band.items())),
            tuple(sorted((k, v.value) for k, v in self.if_band.items())),
            tuple(sorted(self.savings.items())),
            tuple(sorted(self.price.items())),
        )

    # -- placement score feed ----------------------------------------------

    def _charge_budget(self, account: str, key: object) -> None:
        window = self._budgets.setdefault(account, [])
        cutoff = self.clock - BUDGET_WINDOW_S
        window[:] = [(t, k) for t, k in window if t > cutoff]
        if any(k == key for _, k in window):
            return
        if len(window) >= QUERY_BUDGET:
            raise QueryBudgetExhausted(
                f"account {account} already issued {QUERY_BUDGET} unique queries in 24 h"
            )
        window.append((self.clock, key))

    def budget_state(self, account: str) -> dict:
        window = self._budgets.get(account, [])
        cutoff = self.clock - BUDGET_WINDOW_S
        used = sum(1 for t, _ in window if t > cutoff)
        return {"account": account, "limit": QUERY_BUDGET, "used": used, "remaining": QUERY_BUDGET - used}

    def _validate_query(self, query: PlacementQuery) -> None:
        for itype in query.instance_types:
            if itype not in self.universe.types:
                raise UnknownType(f"unknown instance type {itype}")
        for region in query.regions:
            if region not in self.universe.regions:
                raise UnknownRegion(f"unknown region {region}")

    def _effective_az_score(self, itype: str, az: str, capacity: int) -> int:
        base = {Band3.HIGH: 3, Band3.MEDIUM: 2, Band3.LOW: 1}[self.sps_band[(itype, az)]]
        cls = InstanceType.parse(itype).family_class.value
        penalty = _CAPACITY_SENSITIVITY[cls] * int(math.log2(capacity)) if capacity > 1 else 0
        return max(1, base - penalty)

    def _bonus(self, types: tuple[str, ...], location: str) -> int:
        rng = _stream(self.seed, "bonus", ",".join(sorted(types)), location)
        return rng.choices(BONUS_VALUES, weights=BONUS_WEIGHTS)[0]

    def placement_score_query(self, account: str, query: PlacementQuery) -> list[tuple[str, int]]:
        """Scores per AZ (single-AZ queries) or per region, largest 10 only."""
        self._validate_query(query)
        self._charge_budget(account, query.key())

        results: list[tuple[str, int]] = []
        types = tuple(sorted(query.instance_types))
        if query.single_az:
            for region in query.regions:
                az_sets = [
                    set(self.universe.supporting_azs(t, region)) for t in types
                ]
                common = set.intersection(*az_sets) if az_sets else set()
                for az in sorted(common):
                    parts = [self._effective_az_score(t, az, query.target_capacity) for t in types]
                    score = sum(parts)
                    if len(types) > 1:
                        score = min(MAX_RESULTS, score + self._bonus(types, az))
                    results.append((az, score))
        else:
            for region in query.regions:
                per_type: list[int] = []
                for t in types:
                    azs = self.universe.supporting_azs(t, region)
                    if not azs:
                        per_type = []
                        break
                    per_type.append(max(self._effective_az_score(t, az, query.target_capacity) for az in azs))
                if not per_type:
                    continue
                score = sum(per_type)
                if len(types) > 1:
                    score = min(MAX_RESULTS, score + self._bonus(types, region))
                results.append((region, score))

        results.sort(key=lambda r: (-r[1], r[0]))
        return results[:MAX_RESULTS]

    # -- advisor feed --------------------------------------------------------

    def advisor_snapshot(self) -> list[AdvisorEntry]:
        out = []
        for itype, region in self.universe.region_pairs():
            worst = self.if_band[(itype, region)]
            for az in self.universe.supporting_azs(itype, region):
                band = self._az_if_hint.get((itype, az))
                if band is not None and BAND3_SCORE[band] < BAND3_SCORE[worst]:
                    worst = band
            out.append(
                AdvisorEntry(
                    instance=itype,
                    region=region,
                    band=_ADVISOR_BAND_BY_WORST[worst],
                    savings=self.savings[(itype, region)],
                )
            )
        return out

    # -- price feed ----------------------------------------------------------

    def price_history(self, itype: str, az: str, t_from: Timestamp, t_to: Timestamp) -> list[SpotPriceRecord]:
        if (itype, az) not in self.price_log:
            raise UnknownLocation(f"({itype}, {az}) not in universe")
        if t_from > t_to:
            raise RangeInverted(f"from {t_from} after to {t_to}")
        log = self.price_log[(itype, az)]
        in_force = None
        for ts, price in log:
            if ts <= t_from:
                in_force = price
            else:
                break
        records: list[SpotPriceRecord] = []
        if in_force is not None:
            records.append(SpotPriceRecord(ts=t_from, instance=itype, az=az, price_usd_per_hour=in_force))
        for ts, price in log:
            if t_from < ts <= t_to:
                records.append(SpotPriceRecord(ts=ts, instance=itype, az=az, price_usd_per_hour=price))
        return records

    # -- spot requests ---------------------------------------------------------

    def submit_spot_request(
        self,
        itype: str,
        az: str,
        bid_usd_per_hour: float,
        persistent: bool,
        horizon_s: float = 48 * 3600.0,
    ) -> SpotRequest:
        if bid_usd_per_hour <= 0:
            raise InvalidBid(f"bid must be positive, got {bid_usd_per_hour}")
        sps, if_ = self.pair_bands(itype, az)
        params = CALIBRATION[(sps, if_)]
        req_id = f"sir-{next(self._request_seq):06d}"
        rng = _stream(self.seed, "request", req_id)
        events = simulate_lifecycle(params, persistent, horizon_s, rng)
        request = SpotRequest(
            id=req_id,
            instance=itype,
            az=az,
            bid_usd_per_hour=bid_usd_per_hour,
            persistent=persistent,
            submitted_at=self.clock,
            events=events,
        )
        self._requests[req_id] = request
        return request

    def request_status(self, req_id: str) -> RequestState:
        return self._requests[req_id].state_at(self.clock)
