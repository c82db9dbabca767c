"""HTTP facade for the simulated vendor plus the matching client adapter, so
the collector can exercise a real wire path instead of in-process calls."""

from __future__ import annotations

import httpx
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .model import InterruptionBand, SpotlakeError, Timestamp, format_rfc3339, parse_rfc3339
from .planner import PlacementQuery
from .simulator import (
    AdvisorEntry,
    InvalidBid,
    QueryBudgetExhausted,
    RangeInverted,
    UnknownLocation,
    UnknownPair,
    UnknownRegion,
    UnknownType,
    World,
)


class VendorUnavailable(SpotlakeError):
    pass


class PlacementQueryBody(BaseModel):
    account: str
    instanceTypes: list[str]
    regions: list[str]
    targetCapacity: int = 1
    singleAz: bool = True


class SpotRequestBody(BaseModel):
    instance: str
    az: str
    bidUsdPerHour: float
    persistent: bool = True


class AdvanceBody(BaseModel):
    seconds: int


_ERROR_STATUS = {
    QueryBudgetExhausted: 429,
    UnknownType: 404,
    UnknownRegion: 404,
    UnknownLocation: 404,
    UnknownPair: 404,
    RangeInverted: 400,
    InvalidBid: 400,
}


def create_vendor_app(world: World) -> FastAPI:
    app = FastAPI(title="spot vendor simulator", version="1")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["GET", "POST"], allow_headers=["*"]
    )

    @app.exception_handler(SpotlakeError)
    async def error_handler(_req: Request, exc: SpotlakeError):
        status = _ERROR_STATUS.get(type(exc), 400)
        return JSONResponse(status_code=status, content={"code": type(exc).__name__, "message": str(exc)})

    @app.get("/v1/meta")
    def meta():
        uni = world.universe
        return {
            "clock": format_rfc3339(world.clock),
            "regions": uni.regions,
            "types": sorted(uni.types),
            "support": uni.support,
        }

    @app.post("/v1/placement-score")
    def placement_score(body: PlacementQueryBody):
        query = PlacementQuery(
            instance_types=tuple(body.instanceTypes),
            regions=tuple(body.regions),
            target_capacity=body.targetCapacity,
            single_az=body.singleAz,
        )
        results = world.placement_score_query(body.account, query)
        return {"results": [{"location": loc, "score": score} for loc, score in results]}

    @app.get("/v1/advisor")
    def advisor():
        return {
            "entries": [
                {
                    "instance": e.instance,
                    "region": e.region,
                    "band": e.band.value,
                    "savings": e.savings,
                }
                for e in world.advisor_snapshot()
            ]
        }

    @app.get("/v1/price-history")
    def price_history(instance: str, az: str, request: Request):
        t_from = parse_rfc3339(request.query_params["from"])
        t_to = parse_rfc3339(request.query_params["to"])
        records = world.price_history(instance, az, t_from, t_to)
        return {
            "records": [
                {
                    "ts": format_rfc3339(r.ts),
                    "instance": r.instance,
                    "az": r.az,
                    "priceUsdPerHour": r.price_usd_per_hour,
                }
                for r in records
            ]
        }

    @app.post("/v1/requests")
    def submit(body: SpotRequestBody):
        req = world.submit_spot_request(body.instance, body.az, body.bidUsdPerHour, body.persistent)
        return {
            "id": req.id,
            "status": world.request_status(req.id).value,
            "submittedAt": format_rfc3339(req.submitted_at),
        }

    @app.get("/v1/requests/{req_id}")
    def request_status(req_id: str):
        try:
            status = world.request_status(req_id)
        except KeyError:
            return JSONResponse(status_code=404, content={"code": "UnknownRequest", "message": req_id})
        return {"id": req_id, "status": status.value}

    @app.post("/v1/clock/advance")
    def advance(body: AdvanceBody):
        world.advance(body.seconds)
        return {"clock": format_rfc3339(world.clock)}

    @app.get("/v1/budget")
    def budget(account: str):
        return world.budget_state(account)

    return app


class HttpVendor:
    """Collector-facing vendor client over the simulator's HTTP surface."""

    def __init__(self, base_url: str, client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=30.0)
        self._pairs: list[tuple[str, str]] | None = None
        self._clock: Timestamp | None = None

    def _request(self, method: str, path: str, **kwargs):
        try:
            resp = self._client.request(method, self.base_url + path, **kwargs)
        except httpx.HTTPError as exc:
            raise VendorUnavailable(f"vendor unreachable: {exc}") from exc
        if resp.status_code >= 400:
            try:
                body = resp.json()
            except ValueError:
                body = {"code": "VendorError", "message": resp.text}
            if body.get("code") == "QueryBudgetExhausted":
                raise QueryBudgetExhausted(body.get("message", ""))
            raise SpotlakeError(f"{body.get('code')}: {body.get('message')}")
        return resp.json()

    def placement_scores(self, account: str, query: PlacementQuery) -> list[tuple[str, int]]:
        body = {
            "account": account,
            "instanceTypes": list(query.instance_types),
            "regions": list(query.regions),
            "targetCapacity": query.target_capacity,
            "singleAz": query.single_az,
        }
        obj = self._request("POST", "/v1/placement-score", json=body)
        return [(r["location"], r["score"]) for r in obj["results"]]

    def advisor(self) -> list[AdvisorEntry]:
        obj = self._request("GET", "/v1/advisor")
        return [
            AdvisorEntry(
                instance=e["instance"],
                region=e["region"],
                band=InterruptionBand(e["band"]),
                savings=e["savings"],
            )
            for e in obj["entries"]
        ]

    def price_at(self, instance: str, az: str, ts: Timestamp) -> float:
        obj = self._request(
            "GET",
            "/v1/price-history",
            params={
                "instance": instance,
                "az": az,
                "from": format_rfc3339(ts),
                "to": format_rfc3339(ts),
            },
        )
        records = obj["records"]
        if not records:
            raise UnknownLocation(f"no price for ({instance}, {az})")
        return records[0]["priceUsdPerHour"]

    def catalog_pairs(self) -> list[tuple[str, str]]:
        if self._pairs is None:
            meta = self._request("GET", "/v1/meta")
            pairs = []
            for itype in sorted(meta["support"]):
                for region in sorted(meta["support"][itype]):
                    count = meta["support"][itype][region]
                    pairs.extend((itype, az) for az in meta["regions"][region][:count])
            self._pairs = pairs
            self._clock = parse_rfc3339(meta["clock"])
        return self._pairs

    def now(self) -> Timestamp:
        if self._clock is None:
            meta = self._request("GET", "/v1/meta")
            self._clock = parse_rfc3339(meta["clock"])
        return self._clock

    def advance(self, seconds: int) -> None:
        obj = self._request("POST", "/v1/clock/advance", json={"seconds": seconds})
        self._clock = parse_rfc3339(obj["clock"])

    def budget(self, account: str) -> dict:
        return self._request("GET", "/v1/budget", params={"account": account})

    def close(self) -> None:
        self._client.close()
