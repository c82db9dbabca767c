"""Simulated vendor universe: which types exist where, with what AZs and prices.

A universe file is JSON. Regions map to their AZ lists, support maps each
instance type to per-region AZ counts (the first N AZs of the region support
it), and initial per-AZ bands may optionally be pinned; otherwise the world
draws them from its seed.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .model import Band3, FamilyClass, InstanceType, size_rank
from .planner import SupportMap, validate_support_map

DEFAULT_REGION_POOL = [
    "us-east-1",
    "us-east-2",
    "us-west-1",
    "us-west-2",
    "eu-west-1",
    "eu-west-2",
    "eu-west-3",
    "eu-central-1",
    "eu-north-1",
    "ap-northeast-1",
    "ap-northeast-2",
    "ap-northeast-3",
    "ap-southeast-1",
    "ap-southeast-2",
    "ap-south-1",
    "ca-central-1",
    "sa-east-1",
]

_FAMILY_POOL = {
    FamilyClass.GENERAL: ["t2", "t3", "t3a", "m4", "m5", "m5a", "m6i", "a1"],
    FamilyClass.COMPUTE: ["c4", "c5", "c5n", "c6i", "c6g"],
    FamilyClass.MEMORY: ["r4", "r5", "r5b", "r6i", "x1e", "z1d"],
    FamilyClass.ACCELERATED: ["p2", "p3", "p4d", "g3", "g4dn", "g5", "dl1", "inf1", "f1", "vt1"],
    FamilyClass.STORAGE: ["i3", "i3en", "i4i", "d2", "d3", "h1"],
}

_SIZE_POOL = ["large", "xlarge", "2xlarge", "4xlarge", "8xlarge", "12xlarge", "16xlarge", "24xlarge"]

_CLASS_BASE_PRICE = {
    FamilyClass.GENERAL: 0.096,
    FamilyClass.COMPUTE: 0.085,
    FamilyClass.MEMORY: 0.126,
    FamilyClass.ACCELERATED: 0.90,
    FamilyClass.STORAGE: 0.156,
}


@dataclass
class Universe:
    regions: dict[str, list[str]]
    types: dict[str, float]  # type code -> on-demand USD/hour
    support: SupportMap
    initial_bands: dict[str, dict[str, tuple[str, str]]] = field(default_factory=dict)
    # type -> az -> (spsBand, ifBand); optional pins consumed by the world

    def validate(self) -> None:
        validate_support_map(self.support)
        for region, azs in self.regions.items():
            if not azs:
                raise ValueError(f"region {region} has no AZs")
            for az in azs:
                if not az.startswith(region):
                    raise ValueError(f"AZ {az} not in region {region}")
        for code, price in self.types.items():
            InstanceType.parse(code)
            if price <= 0:
                raise ValueError(f"on-demand price for {code} must be positive")
        for itype, regions in self.support.items():
            if itype not in self.types:
                raise ValueError(f"support map references unknown type {itype}")
            for region, az_count in regions.items():
                if region not in self.regions:
                    raise ValueError(f"support map references unknown region {region}")
                if az_count > len(self.regions[region]):
                    raise ValueError(
                        f"({itype}, {region}) claims {az_count} AZs, region has {len(self.regions[region])}"
                    )
        for itype, az_bands in self.initial_bands.items():
            for az, bands in az_bands.items():
                Band3(bands[0])
                Band3(bands[1])

    def supporting_azs(self, itype: str, region: str) -> list[str]:
        count = self.support.get(itype, {}).get(region, 0)
        return self.regions[region][:count]

    def pairs(self) -> list[tuple[str, str]]:
        """All supported (type, az) pairs, deterministically ordered."""
        out = []
        for itype in sorted(self.support):
            for region in sorted(self.support[itype]):
                out.extend((itype, az) for az in self.supporting_azs(itype, region))
        return out

    def region_pairs(self) -> list[tuple[str, str]]:
        return [
            (itype, region)
            for itype in sorted(self.support)
            for region in sorted(self.support[itype])
        ]

    def region_of(self, az: str) -> str:
        for region, azs in self.regions.items():
            if az in azs:
                return region
        raise KeyError(az)

    def on_demand(self, itype: str) -> float:
        return self.types[itype]

    def to_json(self) -> dict:
        return {
            "regions": self.regions,
            "types": [
                {"code": code, "onDemandUsdPerHour": price} for code, price in sorted(self.types.items())
            ],
            "support": self.support,
            "initialBands": {
                t: {az: list(bands) for az, bands in sorted(m.items())}
                for t, m in sorted(self.initial_bands.items())
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Universe":
        uni = cls(
            regions={r: list(azs) for r, azs in obj["regions"].items()},
            types={t["code"]: float(t["onDemandUsdPerHour"]) for t in obj["types"]},
            support={t: dict(m) for t, m in obj["support"].items()},
            initial_bands={
                t: {az: (b[0], b[1]) for az, b in m.items()}
                for t, m in obj.get("initialBands", {}).items()
            },
        )
        uni.validate()
        return uni


def load_universe(path: str | Path) -> Universe:
    with open(path) as f:
        return Universe.from_json(json.load(f))


def save_universe(universe: Universe, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(universe.to_json(), f, indent=1, sort_keys=True)
        f.write("\n")


STRATUM_TYPE_POOL = [
    "m5.large",
    "c5.xlarge",
    "r5.large",
    "t3.2xlarge",
    "i3.large",
    "g4dn.xlarge",
    "p3.2xlarge",
    "d2.xlarge",
    "x1e.xlarge",
]


def stratified_universe(seed: int, regions_per_type: int = 3) -> Universe:
    """Small universe with one instance type pinned to each of the nine
    (placement band, interruption band) combinations, one AZ per region.

    Useful for campaigns that need every band combination populated and few
    enough pairs that per-pair statistics converge.
    """
    rng = random.Random(seed)
    region_codes = DEFAULT_REGION_POOL[:regions_per_type]
    regions = {code: [f"{code}a"] for code in region_codes}
    bands = [(s, i) for s in ("High", "Medium", "Low") for i in ("High", "Medium", "Low")]
    types: dict[str, float] = {}
    support: SupportMap = {}
    initial_bands: dict[str, dict[str, tuple[str, str]]] = {}
    for code, (sps, if_) in zip(STRATUM_TYPE_POOL, bands):
        itype = InstanceType.parse(code)
        base = _CLASS_BASE_PRICE[itype.family_class]
        mult = max(1, size_rank(itype.size) - 3)
        types[code] = round(base * mult * rng.uniform(0.9, 1.15), 4)
        support[code] = {r: 1 for r in region_codes}
        initial_bands[code] = {f"{r}a": (sps, if_) for r in region_codes}
    uni = Universe(regions=regions, types=types, support=support, initial_bands=initial_bands)
    uni.validate()
    return uni


def default_universe(
    seed: int,
    n_types: int = 60,
    n_regions: int = 8,
    max_azs: int = 4,
) -> Universe:
    """Seeded synthetic universe, sized for desk-scale runs.

    Band tendencies follow the observed patterns: accelerated-computing and
    storage families and larger sizes lean toward lower availability.
    """
    rng = random.Random(seed)
    region_codes = DEFAULT_REGION_POOL[:n_regions]
    regions = {}
    for code in region_codes:
        n_az = rng.randint(2, max_azs)
        regions[code] = [f"{code}{chr(ord('a') + i)}" for i in range(n_az)]

    combos = [
        (family, size)
        for cls, families in _FAMILY_POOL.items()
        for family in families
        for size in _SIZE_POOL
    ]
    rng.shuffle(combos)
    picked: list[str] = []
    seen = set()
    for family, size in combos:
        code = f"{family}.{size}"
        if code not in seen:
            seen.add(code)
            picked.append(code)
        if len(picked) == n_types:
            break
    picked.sort()

    types: dict[str, float] = {}
    support: SupportMap = {}
    for code in picked:
        itype = InstanceType.parse(code)
        base = _CLASS_BASE_PRICE[itype.family_class]
        mult = max(1, size_rank(itype.size) - 3)
        types[code] = round(base * mult * rng.uniform(0.9, 1.15), 4)
        n_supported = rng.randint(3, n_regions)
        chosen = sorted(rng.sample(region_codes, n_supported))
        support[code] = {r: rng.randint(1, len(regions[r])) for r in chosen}

    uni = Universe(regions=regions, types=types, support=support)
    uni.validate()
    return uni
