"""End-to-end demo pipeline: simulator -> plan -> collect -> analyze ->
experiment -> train, writing the report files (CSV/JSON plus rendered
figures) into a workspace directory. Deterministic under the config seed."""

from __future__ import annotations

import random
import shutil
from dataclasses import dataclass
from pathlib import Path

from . import report
from .analysis import (
    correlation_cdf,
    score_difference_histogram,
    update_frequency_cdf,
)
from .collector import CollectionSchedule, SimVendor, run_loop
from .config import Config
from .experiment import (
    ALL_STRATA,
    Candidate,
    STUDIED_STRATA,
    build_candidates,
    run_campaign,
    save_cases,
    stratified_sample,
    summarize,
)
from .model import Metric, SpotlakeError
from .planner import plan_queries, save_plan, shard_accounts
from .predictor import (
    EvalResult,
    baseline_predict,
    evaluate,
    featurize,
    stratified_split,
    train,
)
from .simulator import World
from .store import ArchiveStore
from .universe import Universe, default_universe, load_universe, save_universe


class StageError(SpotlakeError):
    def __init__(self, stage: str, message: str, exit_code: int = 1):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage
        self.exit_code = exit_code


@dataclass
class DemoArtifacts:
    outdir: Path
    store_dir: Path
    universe_file: Path
    plan_file: Path
    cases_file: Path
    model_file: Path
    table3: Path
    table4: Path
    fig8: Path
    fig9: Path
    fig10: Path
    collection_reports: Path
    tick_count: int = 0


def current_values(store: ArchiveStore, instance: str, az: str, region: str, as_of: int) -> dict[str, float]:
    """Latest archived observation per metric at or before as_of."""
    out: dict[str, float] = {}
    for name, metric in (("sps", Metric.PLACEMENT_SCORE), ("if", Metric.INTERRUPTION_FREE), ("savings", Metric.SAVINGS)):
        key = (metric.value, instance, region, az)
        if not store.has_series(key):
            continue
        samples = store.resample_ffill(key, 1, as_of, as_of)
        if samples:
            out[name] = samples[0][1]
    return out


def live_current_values(world: World, instance: str, az: str) -> dict[str, float]:
    """Scores as a user would read them from the vendor right now; what the
    current-value baselines key on at submission time."""
    from .model import BAND3_SCORE

    sps, if_ = world.pair_bands(instance, az)
    region = world.universe.region_of(az)
    return {
        "sps": BAND3_SCORE[sps],
        "if": BAND3_SCORE[if_],
        "savings": world.savings[(instance, region)],
    }


def sample_per_stratum(
    candidates: list[Candidate],
    seed: int,
    cases_per_stratum: int,
    pair_cap: int | None = None,
    strata=ALL_STRATA,
) -> list[Candidate]:
    """Exploratory campaign sampling: `cases_per_stratum` draws per stratum
    with replacement (repeat requests against a pair are legitimate samples),
    optionally concentrated on at most `pair_cap` pairs per stratum so
    per-pair statistics converge. Empty strata are skipped, unlike the
    paper-protocol under-sampling."""
    groups: dict = {}
    for cand in candidates:
        if cand.stratum in strata:
            groups.setdefault(cand.stratum, []).append(cand)
    out: list[Candidate] = []
    for stratum in strata:
        members = sorted(groups.get(stratum, []), key=lambda c: (c.instance, c.az))
        if not members:
            continue
        rng = random.Random(seed + hash_stable(stratum.code))
        if pair_cap is not None and len(members) > pair_cap:
            members = rng.sample(members, pair_cap)
        out.extend(rng.choices(members, k=cases_per_stratum))
    return out


def hash_stable(text: str) -> int:
    import hashlib

    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=4).digest(), "big")


def run_demo(config: Config, per_stratum_paper: int = 24, per_stratum_train: int = 556) -> DemoArtifacts:
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    store_dir = outdir / "store"
    if store_dir.exists():
        shutil.rmtree(store_dir)
    reports_dir = outdir / "reports"
    reports_dir.mkdir(exist_ok=True)

    art = DemoArtifacts(
        outdir=outdir,
        store_dir=store_dir,
        universe_file=outdir / "universe.json",
        plan_file=outdir / "plan.json",
        cases_file=outdir / "cases.jsonl",
        model_file=outdir / "model.json",
        table3=reports_dir / "table3.csv",
        table4=reports_dir / "table4.csv",
        fig8=reports_dir / "fig8.json",
        fig9=reports_dir / "fig9.csv",
        fig10=reports_dir / "fig10.json",
        collection_reports=reports_dir / "collection_reports.jsonl",
    )

    # simulate: build the world
    try:
        if config.universe is not None:
            universe: Universe = load_universe(config.universe)
        else:
            universe = default_universe(config.seed)
        save_universe(universe, art.universe_file)
        world = World(universe, config.seed)
    except (OSError, ValueError, KeyError) as exc:
        raise StageError("simulate", str(exc), exit_code=2) from exc

    # plan: pack and shard
    try:
        queries = plan_queries(universe.support)
        plan = shard_accounts(queries)
        save_plan(plan, art.plan_file)
    except SpotlakeError as exc:
        raise StageError("plan", str(exc)) from exc

    # collect: simulated clock, 10-minute cadence
    try:
        store = ArchiveStore(store_dir)
        vendor = SimVendor(world)
        schedule = CollectionSchedule(
            plan=plan,
            placement_period_s=config.period_s,
            advisor_period_s=config.period_s,
            price_period_s=config.period_s,
        )
        until = world.clock + config.hours * 3600
        reports = run_loop(schedule, vendor, store, until)
        art.tick_count = len(reports)
        with open(art.collection_reports, "w") as f:
            for rep in reports:
                f.write(rep.to_json() + "\n")
    except SpotlakeError as exc:
        raise StageError("collect", str(exc)) from exc

    # analyze: correlation CDF, score difference, update frequency
    try:
        cdfs = [
            correlation_cdf(store, Metric.PLACEMENT_SCORE, Metric.INTERRUPTION_FREE),
            correlation_cdf(store, Metric.INTERRUPTION_FREE, Metric.SPOT_PRICE),
            correlation_cdf(store, Metric.PLACEMENT_SCORE, Metric.SPOT_PRICE),
        ]
        report.write_json(
            {f"{c.metric_a}:{c.metric_b}": report.correlation_payload(c) for c in cdfs}, art.fig8
        )
        report.render_correlation(cdfs, art.fig8)

        diff = score_difference_histogram(store)
        report.write_difference_csv(diff, art.fig9)
        report.render_difference(diff, art.fig9)

        freq = [
            update_frequency_cdf(store, Metric.PLACEMENT_SCORE),
            update_frequency_cdf(store, Metric.INTERRUPTION_FREE),
            update_frequency_cdf(store, Metric.SAVINGS),
        ]
        report.write_json(report.frequency_payload(freq), art.fig10)
        report.render_frequency(freq, art.fig10)
    except SpotlakeError as exc:
        raise StageError("analyze", str(exc)) from exc

    # experiment: paper-protocol strata, Table 3 analogue
    try:
        candidates = build_candidates(world)
        sampled = stratified_sample(
            candidates, config.seed, strata=STUDIED_STRATA, per_stratum_cap=per_stratum_paper
        )
        cases = run_campaign(sampled, world, config.seed)
        save_cases(cases, art.cases_file)
        summaries = summarize(cases)
        report.write_outcomes_csv(summaries, art.table3)
        report.render_latency_cdfs(summaries, art.table3)
    except SpotlakeError as exc:
        raise StageError("experiment", str(exc)) from exc

    # train: exploratory campaign over all strata, Table 4 analogue
    try:
        world.advance(1)  # submissions land just after the final tick
        train_candidates = build_candidates(world)
        train_sampled = sample_per_stratum(
            train_candidates, config.seed + 1, per_stratum_train, pair_cap=3
        )
        train_cases = run_campaign(train_sampled, world, config.seed + 1, keep_traces=False)
        as_of = world.clock
        feature_cache: dict[tuple[str, str], list] = {}
        for c in train_cases:
            if (c.instance, c.az) not in feature_cache:
                feature_cache[(c.instance, c.az)] = featurize(store, c.instance, c.az, as_of)
        features = [feature_cache[(c.instance, c.az)] for c in train_cases]
        labels = [c.label for c in train_cases]
        train_idx, test_idx = stratified_split(labels, 0.3, config.seed)
        model = train([features[i] for i in train_idx], [labels[i] for i in train_idx], config.seed)
        model.save(art.model_file)

        test_truth = [labels[i] for i in test_idx]
        results: dict[str, EvalResult] = {}
        results["RF"] = evaluate([model.predict(features[i]) for i in test_idx], test_truth)
        for kind in ("SPS", "IF", "CostSave"):
            preds = []
            for i in test_idx:
                case = train_cases[i]
                preds.append(baseline_predict(kind, live_current_values(world, case.instance, case.az)))
            results[kind] = evaluate(preds, test_truth)
        report.write_prediction_csv(results, art.table4)
    except SpotlakeError as exc:
        raise StageError("train", str(exc)) from exc

    return art
