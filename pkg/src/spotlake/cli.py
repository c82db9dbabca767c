"""Command-line entry point.

Exit codes: 0 success, 1 runtime failure, 2 configuration/usage error.
Environment variables prefixed SPOTLAKE_ override config-file keys.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import report
from .analysis import (
    DEFAULT_GRID_S,
    aggregate_heatmap,
    correlation_cdf,
    group_by_size,
    score_difference_histogram,
    update_frequency_cdf,
    value_distribution,
)
from .collector import CollectionSchedule, SimVendor, run_loop
from .config import ConfigError, load_config, parse_duration
from .experiment import (
    Stratum,
    build_candidates,
    load_cases,
    run_campaign,
    save_cases,
    stratified_sample,
    summarize,
)
from .model import Metric, SpotlakeError, parse_rfc3339
from .pipeline import StageError, current_values, run_demo
from .planner import (
    DEFAULT_CAPACITY,
    DEFAULT_PER_ACCOUNT,
    load_plan,
    load_support_map,
    naive_query_count,
    plan_queries,
    save_plan,
    shard_accounts,
)
from .predictor import ForestModel, baseline_predict, evaluate, featurize, train
from .simulator import World
from .store import ArchiveStore
from .universe import default_universe, load_universe
from .vendor_http import HttpVendor


def _fixture_store() -> ArchiveStore:
    fixture = Path(__file__).parent / "fixtures" / "fixture_archive.jsonl"
    store = ArchiveStore(None)
    with open(fixture) as f:
        store.import_records(f)
    return store


def _open_store(args) -> ArchiveStore:
    if getattr(args, "fixture", False):
        return _fixture_store()
    if args.store is None:
        raise ConfigError("--store is required (or use --fixture)")
    return ArchiveStore(args.store)


def _parse_ts_arg(value: str | None):
    return None if value is None else parse_rfc3339(value)


def cmd_plan(args) -> int:
    support = load_support_map(args.support_map)
    counts = naive_query_count(support)
    queries = plan_queries(support, args.capacity)
    plan = shard_accounts(queries, args.per_account)
    save_plan(plan, args.out)
    print(
        json.dumps(
            {
                "naiveQueries": counts.naive,
                "supportedPairs": counts.pairs,
                "plannedQueries": len(queries),
                "accounts": len(plan.assignments),
                "out": str(args.out),
            }
        )
    )
    return 0


def _vendor_for(args, seed: int):
    if args.vendor == "sim":
        if args.universe:
            universe = load_universe(args.universe)
        else:
            universe = default_universe(seed)
        return SimVendor(World(universe, seed))
    return HttpVendor(args.vendor)


def cmd_collect(args) -> int:
    vendor = _vendor_for(args, args.seed)
    plan = load_plan(args.plan)
    store = ArchiveStore(args.store)
    period = parse_duration(args.period)
    schedule = CollectionSchedule(
        plan=plan,
        placement_period_s=period,
        advisor_period_s=period,
        price_period_s=period,
    )
    until = vendor.now() + args.ticks * period
    reports = run_loop(schedule, vendor, store, until)
    for rep in reports:
        print(rep.to_json())
    return 0


def cmd_simulate(args) -> int:
    import uvicorn

    from .vendor_http import create_vendor_app

    universe = load_universe(args.universe)
    world = World(universe, args.seed)
    app = create_vendor_app(world)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_experiment(args) -> int:
    if args.universe:
        universe = load_universe(args.universe)
    else:
        universe = default_universe(args.seed)
    world = World(universe, args.seed)
    if args.advance:
        world.advance(parse_duration(args.advance))
    strata = tuple(Stratum.parse(c) for c in args.strata.split(","))
    candidates = build_candidates(world)
    sampled = stratified_sample(candidates, args.seed, strata=strata, per_stratum_cap=args.per_stratum)
    cases = run_campaign(sampled, world, args.seed)
    save_cases(cases, args.out)
    for s in summarize(cases):
        print(
            json.dumps(
                {
                    "stratum": s.stratum,
                    "cases": s.cases,
                    "notFulfilledPct": round(s.not_fulfilled_pct, 2),
                    "interruptedPct": round(s.interrupted_pct, 2),
                }
            )
        )
    return 0


def cmd_analyze(args) -> int:
    store = _open_store(args)
    t_from = _parse_ts_arg(args.from_)
    t_to = _parse_ts_arg(args.to)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    figures = not args.no_figures

    if args.analysis == "distribution":
        metric = Metric(args.metric)
        hist = value_distribution(store, metric, t_from, t_to)
        report.write_distribution_csv(hist, metric.value, out)
        if figures:
            report.render_distribution(hist, metric.value, out)
    elif args.analysis == "correlation":
        cdf = correlation_cdf(
            store, Metric(args.metric_a), Metric(args.metric_b), args.grid, t_from, t_to
        )
        report.write_json(report.correlation_payload(cdf), out)
        if figures:
            report.render_correlation([cdf], out)
    elif args.analysis == "frequency":
        cdf = update_frequency_cdf(store, Metric(args.metric))
        report.write_json(report.frequency_payload([cdf]), out)
        if figures:
            report.render_frequency([cdf], out)
    elif args.analysis == "heatmap":
        grid = aggregate_heatmap(store, args.rows, args.cols, Metric(args.metric), t_from, t_to)
        report.write_heatmap_csv(grid, out)
        if figures:
            report.render_heatmap(grid, out)
    elif args.analysis == "difference":
        diff = score_difference_histogram(store, args.grid, t_from, t_to)
        report.write_difference_csv(diff, out)
        if figures:
            report.render_difference(diff, out)
    elif args.analysis == "sizes":
        rows = group_by_size(store, Metric(args.metric), args.min_types, t_from, t_to)
        report.write_sizes_csv(rows, out)
        if figures:
            report.render_sizes(rows, args.metric, out)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown analysis {args.analysis!r}")
    print(json.dumps({"analysis": args.analysis, "out": str(out)}))
    return 0


def cmd_train(args) -> int:
    store = ArchiveStore(args.store)
    cases = load_cases(args.cases)
    features = []
    labels = []
    for case in cases:
        features.append(featurize(store, case.instance, case.az, case.submitted_at))
        labels.append(case.label)
    model = train(features, labels, args.seed)
    model.save(args.out)
    print(json.dumps({"cases": len(cases), "classes": model.classes, "out": str(args.out)}))
    return 0


def cmd_evaluate(args) -> int:
    store = ArchiveStore(args.store)
    model = ForestModel.load(args.model)
    cases = load_cases(args.cases)
    truths = [c.label for c in cases]
    rf_preds = [
        model.predict(featurize(store, c.instance, c.az, c.submitted_at)) for c in cases
    ]
    results = {"RF": evaluate(rf_preds, truths)}
    for kind in ("SPS", "IF", "CostSave"):
        preds = []
        for c in cases:
            region = None
            try:
                from .model import region_of_az

                region = region_of_az(c.az)
            except ValueError:
                pass
            cur = current_values(store, c.instance, c.az, region, c.submitted_at)
            preds.append(baseline_predict(kind, cur))
        results[kind] = evaluate(preds, truths)
    if args.out:
        report.write_prediction_csv(results, args.out)
    print(report.format_prediction_table(results))
    return 0


def build_serve_apps(store_path, sim_universe=None, model_path=None, seed: int = 42):
    """Archive API app plus (optionally) the vendor simulator app for `serve`."""
    from .service import create_app
    from .vendor_http import create_vendor_app

    store = ArchiveStore(store_path)
    catalog = None
    vendor_app = None
    if sim_universe:
        universe = load_universe(sim_universe)
        world = World(universe, seed)
        vendor_app = create_vendor_app(world)
        catalog = {
            "instances": sorted(universe.types),
            "regions": sorted(universe.regions),
            "azs": sorted(az for azs in universe.regions.values() for az in azs),
        }
    model = ForestModel.load(model_path) if model_path else None
    return create_app(store, catalog=catalog, model=model), vendor_app


def cmd_serve(args) -> int:
    import threading

    import uvicorn

    app, vendor_app = build_serve_apps(args.store, args.sim_universe, args.model, args.seed)

    if vendor_app is not None:
        vendor_config = uvicorn.Config(vendor_app, host=args.host, port=args.vendor_port, log_level="warning")
        vendor_server = uvicorn.Server(vendor_config)
        threading.Thread(target=vendor_server.run, daemon=True).start()
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_export(args) -> int:
    store = ArchiveStore(args.store)
    metrics = [Metric(m) for m in args.metric] if args.metric else None
    with open(args.out, "w") as f:
        n = store.export_records(
            f,
            t_from=_parse_ts_arg(args.from_),
            t_to=_parse_ts_arg(args.to),
            instances=args.instance or None,
            regions=args.region or None,
            azs=args.az or None,
            metrics=metrics,
        )
    print(json.dumps({"exported": n, "out": str(args.out)}))
    return 0


def cmd_import(args) -> int:
    store = ArchiveStore(args.store)
    with open(args.file) as f:
        n = store.import_records(f)
    print(json.dumps({"imported": n}))
    return 0


def cmd_demo(args) -> int:
    config = load_config(
        args.config,
        overrides={
            "out": args.out,
            "seed": args.seed,
            "hours": args.hours,
            "universe": args.universe,
        },
    )
    art = run_demo(config)
    print(
        json.dumps(
            {
                "ticks": art.tick_count,
                "reports": [
                    str(p)
                    for p in (art.table3, art.table4, art.fig8, art.fig9, art.fig10)
                ],
            }
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spotlake", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="pack placement queries and shard them across accounts")
    p.add_argument("--support-map", required=True)
    p.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY)
    p.add_argument("--per-account", type=int, default=DEFAULT_PER_ACCOUNT)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("collect", help="run a plan against the vendor and archive the feeds")
    p.add_argument("--plan", required=True)
    p.add_argument("--vendor", default="sim", help="'sim' or a vendor base URL")
    p.add_argument("--store", required=True)
    p.add_argument("--ticks", type=int, default=1)
    p.add_argument("--period", default="10m")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--universe", default=None)
    p.set_defaults(fn=cmd_collect)

    p = sub.add_parser("simulate", help="serve the vendor simulator over HTTP")
    p.add_argument("--universe", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--port", type=int, default=8001)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("experiment", help="stratified 24 h spot request campaign")
    p.add_argument("--strata", default="HH,HL,MM,LH,LL")
    p.add_argument("--per-stratum", type=int, default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--universe", default=None)
    p.add_argument("--advance", default=None, help="advance the world before sampling, e.g. '36h'")
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("analyze", help="run an analysis and write CSV/JSON (+figure)")
    p.add_argument(
        "analysis",
        choices=["distribution", "correlation", "frequency", "heatmap", "difference", "sizes"],
    )
    p.add_argument("--store", default=None)
    p.add_argument("--fixture", action="store_true", help="run against the bundled fixture archive")
    p.add_argument("--metric", default="placementScore")
    p.add_argument("--metric-a", default="placementScore")
    p.add_argument("--metric-b", default="interruptionFree")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID_S)
    p.add_argument("--rows", default="familyClass")
    p.add_argument("--cols", default="dayIndex")
    p.add_argument("--min-types", type=int, default=10)
    p.add_argument("--from", dest="from_", default=None)
    p.add_argument("--to", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("train", help="train the outcome model from cases + archive")
    p.add_argument("--cases", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a model and the baselines on cases")
    p.add_argument("--model", required=True)
    p.add_argument("--cases", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("serve", help="serve the archive query API")
    p.add_argument("--store", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--sim-universe", default=None, help="also serve a vendor simulator")
    p.add_argument("--vendor-port", type=int, default=8001)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--model", default=None, help="model file for /v1/predict")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("export", help="export archive records as line-delimited JSON")
    p.add_argument("--store", required=True)
    p.add_argument("--instance", action="append", default=None)
    p.add_argument("--region", action="append", default=None)
    p.add_argument("--az", action="append", default=None)
    p.add_argument("--metric", action="append", default=None)
    p.add_argument("--from", dest="from_", default=None)
    p.add_argument("--to", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("import", help="import line-delimited JSON records")
    p.add_argument("--store", required=True)
    p.add_argument("file")
    p.set_defaults(fn=cmd_import)

    p = sub.add_parser("demo", help="full pipeline: simulate, plan, collect, analyze, experiment, train")
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--hours", type=int, default=None)
    p.add_argument("--universe", default=None)
    p.set_defaults(fn=cmd_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except StageError as exc:
        print(f"demo failed at {exc}", file=sys.stderr)
        return exc.exit_code
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return 2
    except SpotlakeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
