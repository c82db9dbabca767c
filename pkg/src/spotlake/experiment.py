"""Availability experiments: stratified persistent spot requests polled every
five seconds over 24 hours, with outcome labels and latency summaries.

Cases are independent: each gets a seed derived from the campaign seed and
its identity, so campaigns are reproducible regardless of execution order.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass

from .model import Band3, RequestState, SpotlakeError, Timestamp, format_rfc3339, parse_rfc3339
from .simulator import (
    CALIBRATION,
    EXPERIMENT_HORIZON_S,
    UnknownPair,
    World,
    lifecycle_outcome,
    sample_states_rle,
    simulate_lifecycle,
)

LABELS = ("NoInterrupt", "Interrupted", "NoFulfill")

_BAND_CODE = {Band3.HIGH: "H", Band3.MEDIUM: "M", Band3.LOW: "L"}
_CODE_BAND = {v: k for k, v in _BAND_CODE.items()}


class EmptyStratum(SpotlakeError):
    pass


@dataclass(frozen=True)
class Stratum:
    sps: Band3
    if_: Band3

    @property
    def code(self) -> str:
        return _BAND_CODE[self.sps] + _BAND_CODE[self.if_]

    @classmethod
    def parse(cls, code: str) -> "Stratum":
        code = code.strip().upper().replace("-", "")
        if len(code) != 2 or code[0] not in _CODE_BAND or code[1] not in _CODE_BAND:
            raise ValueError(f"bad stratum code {code!r}, expected like 'HH' or 'LH'")
        return cls(sps=_CODE_BAND[code[0]], if_=_CODE_BAND[code[1]])


STUDIED_STRATA = tuple(Stratum.parse(c) for c in ("HH", "HL", "MM", "LH", "LL"))
ALL_STRATA = tuple(
    Stratum(s, i) for s in (Band3.HIGH, Band3.MEDIUM, Band3.LOW) for i in (Band3.HIGH, Band3.MEDIUM, Band3.LOW)
)


@dataclass(frozen=True)
class Candidate:
    instance: str
    az: str
    stratum: Stratum


@dataclass
class ExperimentCase:
    id: str
    instance: str
    az: str
    stratum: Stratum
    submitted_at: Timestamp
    label: str | None = None
    time_to_fulfill_s: float | None = None
    time_to_first_interrupt_s: float | None = None
    trace_rle: list[tuple[str, int]] | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "instance": self.instance,
                "az": self.az,
                "stratum": self.stratum.code,
                "submittedAt": format_rfc3339(self.submitted_at),
                "label": self.label,
                "timeToFulfillSec": self.time_to_fulfill_s,
                "timeToFirstInterruptSec": self.time_to_first_interrupt_s,
                "trace": self.trace_rle,
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> "ExperimentCase":
        obj = json.loads(line)
        return cls(
            id=obj["id"],
            instance=obj["instance"],
            az=obj["az"],
            stratum=Stratum.parse(obj["stratum"]),
            submitted_at=parse_rfc3339(obj["submittedAt"]),
            label=obj.get("label"),
            time_to_fulfill_s=obj.get("timeToFulfillSec"),
            time_to_first_interrupt_s=obj.get("timeToFirstInterruptSec"),
            trace_rle=[(s, n) for s, n in obj["trace"]] if obj.get("trace") else None,
        )


def build_candidates(world: World) -> list[Candidate]:
    """All supported (instance, AZ) pairs tagged with their current stratum."""
    out = []
    for itype, az in world.universe.pairs():
        sps, if_ = world.pair_bands(itype, az)
        out.append(Candidate(instance=itype, az=az, stratum=Stratum(sps, if_)))
    return out


def candidates_covering_strata(
    world: World,
    strata: tuple[Stratum, ...],
    max_advances: int = 168,
    advance_s: int = 3600,
) -> list[Candidate]:
    """Candidates once every requested stratum has at least one member,
    advancing the world clock an hour at a time until the band mix covers
    them (campaign protocols need all strata populated)."""
    for _ in range(max_advances + 1):
        candidates = build_candidates(world)
        present = {c.stratum for c in candidates}
        if all(s in present for s in strata):
            return candidates
        world.advance(advance_s)
    raise EmptyStratum(
        f"strata {[s.code for s in strata if s not in present]} still empty "
        f"after {max_advances} hourly advances"
    )


def stratified_sample(
    candidates: list[Candidate],
    seed: int,
    strata: tuple[Stratum, ...] = STUDIED_STRATA,
    per_stratum_cap: int | None = None,
) -> list[Candidate]:
    """Under-sample every stratum to the size of the smallest one, uniformly
    over (instance, AZ)."""
    groups: dict[Stratum, list[Candidate]] = {s: [] for s in strata}
    for cand in candidates:
        if cand.stratum in groups:
            groups[cand.stratum].append(cand)
    for stratum, members in groups.items():
        if not members:
            raise EmptyStratum(f"no candidates in stratum {stratum.code}")
    n = min(len(members) for members in groups.values())
    if per_stratum_cap is not None:
        n = min(n, per_stratum_cap)
    out: list[Candidate] = []
    for stratum in strata:
        members = sorted(groups[stratum], key=lambda c: (c.instance, c.az))
        rng = random.Random(_derived_seed(seed, "sample", stratum.code))
        out.extend(rng.sample(members, n))
    return out


def _derived_seed(seed: int, *parts: object) -> int:
    text = ":".join(str(p) for p in (seed, *parts))
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "big")


def run_case(
    candidate: Candidate,
    world: World,
    seed: int,
    case_id: str,
    bid_multiplier: float = 1.0,
    duration_s: float = EXPERIMENT_HORIZON_S,
    sample_step_s: float = 5.0,
    keep_trace: bool = True,
) -> ExperimentCase:
    """One persistent spot request, status sampled every five seconds for the
    full duration. The bid follows the on-demand price."""
    if (candidate.instance, candidate.az) not in world.sps_band:
        raise UnknownPair(f"({candidate.instance}, {candidate.az}) not in universe")
    bid = world.universe.on_demand(candidate.instance) * bid_multiplier
    if bid <= 0:
        raise ValueError("bid policy produced a non-positive bid")
    params = CALIBRATION[(candidate.stratum.sps, candidate.stratum.if_)]
    rng = random.Random(_derived_seed(seed, "case", case_id))
    events = simulate_lifecycle(params, persistent=True, horizon_s=duration_s, rng=rng)
    label, t_fulfill, t_interrupt = lifecycle_outcome(events)
    case = ExperimentCase(
        id=case_id,
        instance=candidate.instance,
        az=candidate.az,
        stratum=candidate.stratum,
        submitted_at=world.clock,
        label=label,
        time_to_fulfill_s=t_fulfill,
        time_to_first_interrupt_s=t_interrupt,
    )
    if keep_trace:
        case.trace_rle = sample_states_rle(events, duration_s, sample_step_s)
    return case


def run_campaign(
    candidates: list[Candidate],
    world: World,
    seed: int,
    keep_traces: bool = True,
) -> list[ExperimentCase]:
    cases = []
    for idx, cand in enumerate(candidates):
        case_id = f"case-{idx:05d}-{cand.stratum.code}"
        cases.append(run_case(cand, world, seed, case_id, keep_trace=keep_traces))
    return cases


def label_from_trace(trace_rle: list[tuple[str, int]]) -> str:
    """Recompute the outcome label from the 5-second status trace."""
    fulfilled = any(state == RequestState.FULFILLED.value for state, _ in trace_rle)
    if not fulfilled:
        return "NoFulfill"
    for (state_a, _), (state_b, _) in zip(trace_rle, trace_rle[1:]):
        if state_a == RequestState.FULFILLED.value and state_b in (
            RequestState.PENDING_EVALUATION.value,
            RequestState.TERMINAL.value,
        ):
            return "Interrupted"
    return "NoInterrupt"


@dataclass
class StratumSummary:
    stratum: str
    cases: int
    not_fulfilled_pct: float
    interrupted_pct: float
    fulfill_latencies_s: list[float]  # sorted
    interrupt_latencies_s: list[float]  # sorted

    def median_fulfill_s(self) -> float | None:
        return _median(self.fulfill_latencies_s)

    def median_interrupt_s(self) -> float | None:
        return _median(self.interrupt_latencies_s)


def _median(values: list[float]) -> float | None:
    if not values:
        return None
    n = len(values)
    mid = n // 2
    if n % 2 == 1:
        return values[mid]
    return 0.5 * (values[mid - 1] + values[mid])


def summarize(cases: list[ExperimentCase]) -> list[StratumSummary]:
    """Per-stratum not-fulfilled / interrupted percentages plus latency CDFs
    (sorted latency lists) in stratum code order."""
    if not cases:
        raise ValueError("no cases to summarize")
    by_stratum: dict[str, list[ExperimentCase]] = {}
    for case in cases:
        by_stratum.setdefault(case.stratum.code, []).append(case)
    out = []
    for code in sorted(by_stratum):
        group = by_stratum[code]
        n = len(group)
        nf = sum(1 for c in group if c.label == "NoFulfill")
        it = sum(1 for c in group if c.label == "Interrupted")
        out.append(
            StratumSummary(
                stratum=code,
                cases=n,
                not_fulfilled_pct=100.0 * nf / n,
                interrupted_pct=100.0 * it / n,
                fulfill_latencies_s=sorted(
                    c.time_to_fulfill_s for c in group if c.time_to_fulfill_s is not None
                ),
                interrupt_latencies_s=sorted(
                    c.time_to_first_interrupt_s for c in group if c.time_to_first_interrupt_s is not None
                ),
            )
        )
    return out


def save_cases(cases: list[ExperimentCase], path) -> None:
    with open(path, "w") as f:
        for case in cases:
            f.write(case.to_json() + "\n")


def load_cases(path) -> list[ExperimentCase]:
    out = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(ExperimentCase.from_json(line))
    return out
