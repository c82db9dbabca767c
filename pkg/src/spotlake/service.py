"""Read-only HTTP API over the archive: record queries with cursor pagination,
analysis endpoints, dimension catalog, and optional what-if prediction.

Responses are JSON; timestamps are RFC 3339 UTC; errors come back as
{"code", "message"}. Analysis answers are memoized per (endpoint, parameters,
archive version) since the archive only grows.
"""

from __future__ import annotations

import base64
import json
import time
from typing import Callable

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import analysis
from .model import (
    Metric,
    SpotlakeError,
    format_rfc3339,
    parse_rfc3339,
    record_to_json,
)
from .predictor import ForestModel, NoHistory, featurize
from .store import ArchiveStore, RangeInverted

MAX_PAGE_SIZE = 10_000
DEFAULT_PAGE_SIZE = 1_000
MEMO_SIZE = 32


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _encode_cursor(version: int, key: tuple, ts: int) -> str:
    payload = json.dumps({"v": version, "k": list(key), "t": ts}, separators=(",", ":"))
    return base64.urlsafe_b64encode(payload.encode()).decode()


def _decode_cursor(cursor: str) -> tuple[int, tuple, int]:
    try:
        obj = json.loads(base64.urlsafe_b64decode(cursor.encode()).decode())
        return int(obj["v"]), tuple(obj["k"]), int(obj["t"])
    except Exception as exc:
        raise ApiError(400, "BadCursor", f"cannot decode cursor: {exc}") from exc


def _csv_list(value: str | None) -> list[str] | None:
    if value is None or value == "":
        return None
    return [part for part in value.split(",") if part]


def _parse_ts(name: str, value: str | None) -> int | None:
    if value is None:
        return None
    try:
        return parse_rfc3339(value)
    except ValueError as exc:
        raise ApiError(400, "BadTimestamp", f"{name}: {exc}") from exc


def _parse_metrics(value: str | None) -> list[Metric] | None:
    names = _csv_list(value)
    if names is None:
        return None
    try:
        return [Metric(n) for n in names]
    except ValueError as exc:
        raise ApiError(400, "UnknownMetric", str(exc)) from exc


def create_app(
    store: ArchiveStore,
    catalog: dict | None = None,
    model: ForestModel | None = None,
) -> FastAPI:
    """App factory. `catalog` (types/regions/azs from the universe) backs
    /v1/meta before any data lands; `model` enables /v1/predict."""
    app = FastAPI(title="spot archive api", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET"],
        allow_headers=["*"],
    )

    memo: dict[tuple, dict] = {}

    @app.exception_handler(ApiError)
    async def api_error_handler(_req: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(SpotlakeError)
    async def spotlake_error_handler(_req: Request, exc: SpotlakeError):
        return JSONResponse(status_code=400, content={"code": type(exc).__name__, "message": str(exc)})

    @app.exception_handler(StarletteHTTPException)
    async def http_error_handler(_req: Request, exc: StarletteHTTPException):
        code = {404: "NotFound", 405: "MethodNotAllowed"}.get(exc.status_code, "HttpError")
        return JSONResponse(status_code=exc.status_code, content={"code": code, "message": str(exc.detail)})

    def _known_instances() -> set[str]:
        known = set(store.dimensions()["instances"])
        if catalog:
            known.update(catalog.get("instances", []))
        return known

    @app.get("/v1/records")
    def records(
        request: Request,
        pageSize: int = Query(DEFAULT_PAGE_SIZE, ge=1, le=MAX_PAGE_SIZE),
        cursor: str | None = None,
        instanceTypes: str | None = None,
        regions: str | None = None,
        azs: str | None = None,
        metrics: str | None = None,
    ):
        t_from = _parse_ts("from", request.query_params.get("from"))
        t_to = _parse_ts("to", request.query_params.get("to"))
        span = store.span()
        if t_from is None:
            t_from = span[0] if span else 0
        if t_to is None:
            t_to = span[1] if span else 0
        if t_from > t_to:
            raise ApiError(400, "RangeInverted", f"from {t_from} after to {t_to}")

        instances = _csv_list(instanceTypes)
        if instances:
            unknown = set(instances) - _known_instances()
            if unknown:
                raise ApiError(404, "UnknownInstanceType", f"unknown instance types: {sorted(unknown)}")
        metric_list = _parse_metrics(metrics)

        if cursor is not None:
            version, after_key, after_ts = _decode_cursor(cursor)
        else:
            version, after_key, after_ts = store.version, None, None

        try:
            rows = store.query(
                t_from,
                t_to,
                instances=instances,
                regions=_csv_list(regions),
                azs=_csv_list(azs),
                metrics=metric_list,
                max_version=version,
            )
        except RangeInverted as exc:
            raise ApiError(400, "RangeInverted", str(exc)) from exc

        if after_key is not None:
            rows = [r for r in rows if (r.key(), r.ts) > (tuple(after_key), after_ts)]
        page = rows[:pageSize]
        next_cursor = None
        if len(rows) > pageSize:
            last = page[-1]
            next_cursor = _encode_cursor(version, last.key(), last.ts)
        return {
            "records": [json.loads(record_to_json(r)) for r in page],
            "nextCursor": next_cursor,
        }

    def _memoized(name: str, params: tuple, compute: Callable[[], dict]) -> dict:
        key = (name, params, store.version)
        if key not in memo:
            if len(memo) >= MEMO_SIZE:
                memo.pop(next(iter(memo)))
            memo[key] = compute()
        body = dict(memo[key])
        body["generatedAt"] = format_rfc3339(int(time.time()))
        return body

    def _analysis_params(request: Request) -> tuple[int | None, int | None]:
        return (
            _parse_ts("from", request.query_params.get("from")),
            _parse_ts("to", request.query_params.get("to")),
        )

    def _require_metric(name: str | None, fallback: Metric | None = None) -> Metric:
        if name is None:
            if fallback is not None:
                return fallback
            raise ApiError(400, "MissingParameter", "metric is required")
        try:
            return Metric(name)
        except ValueError as exc:
            raise ApiError(400, "UnknownMetric", str(exc)) from exc

    @app.get("/v1/analysis/distribution")
    def analysis_distribution(request: Request, metric: str | None = None):
        m = _require_metric(metric)
        t_from, t_to = _analysis_params(request)

        def compute() -> dict:
            try:
                hist = analysis.value_distribution(store, m, t_from, t_to)
            except ValueError as exc:
                raise ApiError(400, "BadParameter", str(exc)) from exc
            return {
                "params": {"metric": m.value, "from": request.query_params.get("from"), "to": request.query_params.get("to")},
                "values": {str(k): v for k, v in sorted(hist.fractions().items())},
                "counts": {str(k): hist.counts.get(k, 0) for k in hist.labels},
                "total": hist.total,
            }

        return _memoized("distribution", (m.value, t_from, t_to), compute)

    @app.get("/v1/analysis/correlation")
    def analysis_correlation(
        request: Request,
        metricA: str | None = None,
        metricB: str | None = None,
        grid: int = analysis.DEFAULT_GRID_S,
    ):
        ma = _require_metric(metricA, Metric.PLACEMENT_SCORE)
        mb = _require_metric(metricB, Metric.INTERRUPTION_FREE)
        t_from, t_to = _analysis_params(request)

        def compute() -> dict:
            cdf = analysis.correlation_cdf(store, ma, mb, grid, t_from, t_to)
            if cdf.pairs_total and not cdf.coefficients:
                raise ApiError(422, "AllUndefined", "every aligned pair has zero variance")
            return {
                "params": {"metricA": ma.value, "metricB": mb.value, "grid": grid},
                "coefficients": cdf.coefficients,
                "summary": cdf.summary(),
            }

        return _memoized("correlation", (ma.value, mb.value, grid, t_from, t_to), compute)

    @app.get("/v1/analysis/frequency")
    def analysis_frequency(metric: str | None = None):
        m = _require_metric(metric)

        def compute() -> dict:
            cdf = analysis.update_frequency_cdf(store, m)
            return {
                "params": {"metric": m.value},
                "gapsHours": cdf.gaps_hours,
                "seriesCount": cdf.series_count,
                "medianHours": cdf.median(),
            }

        return _memoized("frequency", (m.value,), compute)

    @app.get("/v1/analysis/heatmap")
    def analysis_heatmap(
        request: Request,
        rows: str = "familyClass",
        cols: str = "dayIndex",
        metric: str | None = None,
    ):
        m = _require_metric(metric, Metric.PLACEMENT_SCORE)
        t_from, t_to = _analysis_params(request)

        def compute() -> dict:
            try:
                grid = analysis.aggregate_heatmap(store, rows, cols, m, t_from, t_to)
            except ValueError as exc:
                raise ApiError(400, "BadParameter", str(exc)) from exc
            return {
                "params": {"rows": rows, "cols": cols, "metric": m.value},
                "rowLabels": grid.rows,
                "colLabels": grid.cols,
                "cells": grid.cells,
            }

        return _memoized("heatmap", (rows, cols, m.value, t_from, t_to), compute)

    @app.get("/v1/analysis/difference")
    def analysis_difference(request: Request, grid: int = analysis.DEFAULT_GRID_S):
        t_from, t_to = _analysis_params(request)

        def compute() -> dict:
            diff = analysis.score_difference_histogram(store, grid, t_from, t_to)
            return {
                "params": {"grid": grid},
                "fractions": {str(k): v for k, v in sorted(diff.histogram.fractions().items())},
                "total": diff.histogram.total,
                "fractionAt2": diff.fraction_at_2,
                "fractionGe15": diff.fraction_ge_1_5,
            }

        return _memoized("difference", (grid, t_from, t_to), compute)

    @app.get("/v1/meta")
    def meta():
        dims = store.dimensions()
        merged = {
            "instances": sorted(set(dims["instances"]) | set((catalog or {}).get("instances", []))),
            "regions": sorted(set(dims["regions"]) | set((catalog or {}).get("regions", []))),
            "azs": sorted(set(dims["azs"]) | set((catalog or {}).get("azs", []))),
            "metrics": sorted(set(dims["metrics"]) | {m.value for m in Metric}),
        }
        span = store.span()
        return {
            "catalog": merged,
            "span": None
            if span is None
            else {"from": format_rfc3339(span[0]), "to": format_rfc3339(span[1])},
            "records": store.count(),
        }

    @app.get("/v1/predict")
    def predict(request: Request, instance: str, az: str):
        if model is None:
            raise ApiError(404, "NoModel", "no prediction model loaded")
        as_of = _parse_ts("asOf", request.query_params.get("asOf"))
        if as_of is None:
            span = store.span()
            if span is None:
                raise ApiError(422, "InsufficientHistory", "archive is empty")
            as_of = span[1] + 1
        try:
            vector = featurize(store, instance, az, as_of)
        except NoHistory:
            return {"instance": instance, "az": az, "label": None, "status": "insufficient history"}
        return {
            "instance": instance,
            "az": az,
            "label": model.predict(vector),
            "status": "ok",
            "features": {name: v for name, v in zip(model.feature_names, vector)},
        }

    return app
