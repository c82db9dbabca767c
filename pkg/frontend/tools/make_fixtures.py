"""Regenerate the UI test fixtures by capturing live API payloads.

Usage: python tools/make_fixtures.py <demo-out-dir>
Runs the archive API and the vendor simulator in-process and saves the
responses the dashboard tests snapshot against.
"""

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

from spotlake.planner import PlacementQuery
from spotlake.predictor import ForestModel
from spotlake.service import create_app
from spotlake.simulator import World
from spotlake.store import ArchiveStore
from spotlake.universe import load_universe
from spotlake.vendor_http import create_vendor_app

FIXTURES = Path(__file__).parent.parent / "fixtures"


def save(name: str, payload) -> None:
    path = FIXTURES / name
    path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    print("wrote", path)


def main(demo_dir: str) -> None:
    demo = Path(demo_dir)
    store = ArchiveStore(demo / "store")
    universe = load_universe(demo / "universe.json")
    model = ForestModel.load(demo / "model.json")
    catalog = {
        "instances": sorted(universe.types),
        "regions": sorted(universe.regions),
        "azs": sorted(az for azs in universe.regions.values() for az in azs),
    }
    api = TestClient(create_app(store, catalog=catalog, model=model))

    meta = api.get("/v1/meta").json()
    save("meta.json", meta)

    heatmap = api.get(
        "/v1/analysis/heatmap",
        params={"rows": "familyClass", "cols": "region", "metric": "placementScore"},
    ).json()
    heatmap.pop("generatedAt", None)
    save("heatmap.json", heatmap)

    distribution = api.get("/v1/analysis/distribution", params={"metric": "interruptionFree"}).json()
    distribution.pop("generatedAt", None)
    save("distribution.json", distribution)

    # one full placement-score series plus its region's interruption-free series
    instance = sorted(universe.support)[0]
    region = sorted(universe.support[instance])[0]
    az = universe.supporting_azs(instance, region)[0]
    span = meta["span"]
    records = []
    cursor = None
    while True:
        params = {
            "from": span["from"],
            "to": span["to"],
            "instanceTypes": instance,
            "azs": az,
            "metrics": "placementScore,interruptionFree",
            "pageSize": 10000,
        }
        if cursor:
            params["cursor"] = cursor
        body = api.get("/v1/records", params=params).json()
        records.extend(body["records"])
        cursor = body["nextCursor"]
        if not cursor:
            break
    save("series_records.json", {"records": records, "nextCursor": None})

    predict = api.get("/v1/predict", params={"instance": instance, "az": az}).json()
    save("predict.json", predict)

    # vendor: healthy placement response, then the budget driven to exhaustion
    world = World(universe, 42)
    vendor = TestClient(create_vendor_app(world))
    healthy = vendor.post(
        "/v1/placement-score",
        json={"account": "ui", "instanceTypes": [instance], "regions": [region], "targetCapacity": 1, "singleAz": True},
    ).json()
    save("vendor_placement.json", healthy)

    for cap in range(2, 51):
        vendor.post(
            "/v1/placement-score",
            json={"account": "ui", "instanceTypes": [instance], "regions": [region], "targetCapacity": cap, "singleAz": True},
        )
    exhausted = vendor.post(
        "/v1/placement-score",
        json={"account": "ui", "instanceTypes": [instance], "regions": [region], "targetCapacity": 51, "singleAz": True},
    )
    assert exhausted.status_code == 429
    save("vendor_budget_exhausted.json", {"status": 429, "body": exhausted.json()})
    save("vendor_budget.json", vendor.get("/v1/budget", params={"account": "ui"}).json())


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "demo-out")
