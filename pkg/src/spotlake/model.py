"""Shared domain vocabulary: instance taxonomy, locations, scores, records.

Everything here is an immutable value type; the conversion helpers are pure.
Timestamps are integer epoch seconds (UTC) internally and RFC 3339 strings
on every wire/file surface.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum


class SpotlakeError(Exception):
    """Base class for errors raised by this package."""


class OutOfBandScore(SpotlakeError):
    pass


Timestamp = int  # epoch seconds, UTC


def parse_rfc3339(text: str) -> Timestamp:
    """Parse an RFC 3339 UTC timestamp ('2022-01-01T00:00:00Z') to epoch seconds."""
    t = text.strip()
    if t.endswith("Z") or t.endswith("z"):
        t = t[:-1] + "+00:00"
    dt = datetime.fromisoformat(t)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_rfc3339(ts: Timestamp) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def utc_day(ts: Timestamp) -> str:
    """Calendar day (UTC) a timestamp falls on, as 'YYYY-MM-DD'."""
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%d")


class FamilyClass(str, Enum):
    GENERAL = "general"
    COMPUTE = "compute-optimized"
    MEMORY = "memory-optimized"
    ACCELERATED = "accelerated-computing"
    STORAGE = "storage-optimized"


# Family letter prefix -> class. Unknown prefixes are rejected at parse time
# instead of defaulting, so taxonomy drift fails loudly.
FAMILY_CLASS_BY_PREFIX: dict[str, FamilyClass] = {
    "t": FamilyClass.GENERAL,
    "m": FamilyClass.GENERAL,
    "a": FamilyClass.GENERAL,
    "c": FamilyClass.COMPUTE,
    "r": FamilyClass.MEMORY,
    "x": FamilyClass.MEMORY,
    "z": FamilyClass.MEMORY,
    "p": FamilyClass.ACCELERATED,
    "g": FamilyClass.ACCELERATED,
    "dl": FamilyClass.ACCELERATED,
    "inf": FamilyClass.ACCELERATED,
    "f": FamilyClass.ACCELERATED,
    "vt": FamilyClass.ACCELERATED,
    "i": FamilyClass.STORAGE,
    "d": FamilyClass.STORAGE,
    "h": FamilyClass.STORAGE,
}


def family_letters(family: str) -> str:
    """Leading alphabetic run of a family code: 'g4dn' -> 'g', 'dl1' -> 'dl'."""
    out = []
    for ch in family:
        if ch.isalpha():
            out.append(ch)
        else:
            break
    return "".join(out).lower()


def family_class_of(family: str) -> FamilyClass:
    # Exact match on the full letter run: 'inf1' -> 'inf', never 'i'; novel
    # families ('im4gn') must be added to the table, not prefix-guessed.
    cls = FAMILY_CLASS_BY_PREFIX.get(family_letters(family))
    if cls is None:
        raise ValueError(f"unknown instance family {family!r}")
    return cls


@dataclass(frozen=True)
class InstanceType:
    family: str
    size: str

    @property
    def code(self) -> str:
        return f"{self.family}.{self.size}"

    @property
    def family_class(self) -> FamilyClass:
        return family_class_of(self.family)

    @classmethod
    def parse(cls, code: str) -> "InstanceType":
        if code.count(".") != 1:
            raise ValueError(f"instance type code must be 'family.size', got {code!r}")
        family, size = code.split(".")
        if not family or not size:
            raise ValueError(f"instance type code must be 'family.size', got {code!r}")
        family_class_of(family)  # reject unknown families eagerly
        return cls(family=family, size=size)


# Size rank used when grouping scores by instance size. Fractional and metal
# sizes bracket the numbered xlarge ladder.
_NAMED_SIZE_RANKS = {
    "nano": 0,
    "micro": 1,
    "small": 2,
    "medium": 3,
    "large": 4,
    "xlarge": 5,
}


def size_rank(size: str) -> int:
    if size in _NAMED_SIZE_RANKS:
        return _NAMED_SIZE_RANKS[size]
    if size == "metal":
        return 10_000
    if size.endswith("xlarge"):
        mult = size[: -len("xlarge")]
        if mult.isdigit():
            return 5 + int(mult) - 1
    raise ValueError(f"unknown instance size {size!r}")


@dataclass(frozen=True)
class Location:
    region: str
    az: str | None = None

    def __post_init__(self) -> None:
        if self.az is not None and not self.az.startswith(self.region):
            raise ValueError(f"AZ {self.az!r} does not belong to region {self.region!r}")


def region_of_az(az: str) -> str:
    """'us-east-1a' -> 'us-east-1' (strip the trailing zone letters)."""
    i = len(az)
    while i > 0 and az[i - 1].isalpha():
        i -= 1
    if i == 0 or i == len(az):
        raise ValueError(f"malformed AZ identifier {az!r}")
    return az[:i]


class Band3(str, Enum):
    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"


BAND3_SCORE = {Band3.HIGH: 3.0, Band3.MEDIUM: 2.0, Band3.LOW: 1.0}


class InterruptionBand(str, Enum):
    LT5 = "LT5"
    B5_10 = "B5_10"
    B10_15 = "B10_15"
    B15_20 = "B15_20"
    GT20 = "GT20"


# Lowest interruption frequency maps to 3.0, highest to 1.0, in 0.5 steps.
_BAND_TO_SCORE = {
    InterruptionBand.LT5: 3.0,
    InterruptionBand.B5_10: 2.5,
    InterruptionBand.B10_15: 2.0,
    InterruptionBand.B15_20: 1.5,
    InterruptionBand.GT20: 1.0,
}
_SCORE_TO_BAND = {v: k for k, v in _BAND_TO_SCORE.items()}

INTERRUPTION_FREE_VALUES = (1.0, 1.5, 2.0, 2.5, 3.0)


def interruption_band_to_score(band: InterruptionBand) -> float:
    """Interruption-frequency category -> interruption-free score in {1.0..3.0}."""
    return _BAND_TO_SCORE[band]


def score_to_interruption_band(score: float) -> InterruptionBand:
    """Inverse of interruption_band_to_score; raises on non-representable scores."""
    band = _SCORE_TO_BAND.get(score)
    if band is None:
        raise OutOfBandScore(f"no interruption band for score {score!r}")
    return band


def placement_score_to_band3(score: int) -> Band3:
    """Categorize a single-type single-AZ placement score (1..3) as High/Medium/Low."""
    if score == 3:
        return Band3.HIGH
    if score == 2:
        return Band3.MEDIUM
    if score == 1:
        return Band3.LOW
    raise OutOfBandScore(f"placement score {score!r} outside single-type range 1..3")


def band3_to_placement_score(band: Band3) -> int:
    return {Band3.HIGH: 3, Band3.MEDIUM: 2, Band3.LOW: 1}[band]


def validate_placement_score(value: int, single_type_single_az: bool = False) -> None:
    if not 1 <= value <= 10:
        raise ValueError(f"placement score {value} outside 1..10")
    if single_type_single_az and value not in (1, 2, 3):
        raise OutOfBandScore(f"single-type single-AZ placement score {value} outside 1..3")


class RequestState(str, Enum):
    PENDING_EVALUATION = "PendingEvaluation"
    HOLDING = "Holding"
    FULFILLED = "Fulfilled"
    TERMINAL = "Terminal"


# Directed legal transitions. Self-loops model the poller re-reading an
# unchanged status; Terminal only re-observes itself. A persistent request's
# interruption additionally moves Fulfilled back to PendingEvaluation.
_LEGAL_TRANSITIONS: set[tuple[RequestState, RequestState]] = {
    (RequestState.PENDING_EVALUATION, RequestState.PENDING_EVALUATION),
    (RequestState.PENDING_EVALUATION, RequestState.HOLDING),
    (RequestState.PENDING_EVALUATION, RequestState.FULFILLED),
    (RequestState.PENDING_EVALUATION, RequestState.TERMINAL),
    (RequestState.HOLDING, RequestState.HOLDING),
    (RequestState.HOLDING, RequestState.FULFILLED),
    (RequestState.HOLDING, RequestState.TERMINAL),
    (RequestState.FULFILLED, RequestState.FULFILLED),
    (RequestState.FULFILLED, RequestState.TERMINAL),
    (RequestState.TERMINAL, RequestState.TERMINAL),
}


def can_transition(a: RequestState, b: RequestState, persistent: bool = False) -> bool:
    if persistent and a is RequestState.FULFILLED and b is RequestState.PENDING_EVALUATION:
        return True
    return (a, b) in _LEGAL_TRANSITIONS


class Metric(str, Enum):
    PLACEMENT_SCORE = "placementScore"
    INTERRUPTION_FREE = "interruptionFree"
    SPOT_PRICE = "spotPrice"
    SAVINGS = "savings"


# Metrics published per (type, region); the rest are per (type, AZ).
REGION_GRANULAR_METRICS = {Metric.INTERRUPTION_FREE, Metric.SAVINGS}


def validate_metric_value(metric: Metric, value: float) -> None:
    if metric is Metric.PLACEMENT_SCORE:
        if not 1.0 <= value <= 10.0:
            raise ValueError(f"placementScore value {value} outside [1, 10]")
    elif metric is Metric.INTERRUPTION_FREE:
        if value not in INTERRUPTION_FREE_VALUES:
            raise ValueError(f"interruptionFree value {value} not in {INTERRUPTION_FREE_VALUES}")
    elif metric is Metric.SPOT_PRICE:
        if not value > 0:
            raise ValueError(f"spotPrice value {value} must be positive")
    elif metric is Metric.SAVINGS:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"savings value {value} outside [0, 1]")


@dataclass(frozen=True)
class SpotPriceRecord:
    ts: Timestamp
    instance: str
    az: str
    price_usd_per_hour: float

    def __post_init__(self) -> None:
        if self.price_usd_per_hour <= 0:
            raise ValueError("spot price must be positive")


@dataclass(frozen=True)
class ArchiveRecord:
    """One timestamped observation of one metric at one (instance, location)."""

    ts: Timestamp
    instance: str
    region: str
    az: str | None
    metric: Metric
    value: float

    def __post_init__(self) -> None:
        validate_metric_value(self.metric, self.value)
        if self.az is not None and not self.az.startswith(self.region):
            raise ValueError(f"AZ {self.az!r} does not belong to region {self.region!r}")

    def key(self) -> tuple[str, str, str, str]:
        return (self.metric.value, self.instance, self.region, self.az or "")


def record_to_json(rec: ArchiveRecord) -> str:
    """Canonical line-delimited JSON form, the archive export/import contract."""
    return json.dumps(
        {
            "ts": format_rfc3339(rec.ts),
            "instance": rec.instance,
            "region": rec.region,
            "az": rec.az,
            "metric": rec.metric.value,
            "value": rec.value,
        },
        separators=(",", ":"),
    )


def record_from_json(line: str) -> ArchiveRecord:
    obj = json.loads(line)
    value = obj["value"]
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ValueError(f"bad record value {value!r}")
    return ArchiveRecord(
        ts=parse_rfc3339(obj["ts"]),
        instance=obj["instance"],
        region=obj["region"],
        az=obj.get("az"),
        metric=Metric(obj["metric"]),
        value=float(value),
    )
