"""End-to-end benchmark: simulate, fit all candidates, score, select, evaluate."""

from __future__ import annotations

import csv
import json
import logging
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__, _kernels
from .core import RandomStream, ensure_writable_dir, make_splits, subset
from .dgp import load_catalog, sample
from .evaluation import test_tau_risk, test_value
from .learners import AlgoSpec, LearnerSettings
from .matching import mahalanobis_match
from .meta import enumerate_models, fit_grid
from .metrics import DIRECTION, TABLE_METRICS, best_index, predictions_for, score_models
from .nuisance import cross_estimate

log = logging.getLogger(__name__)

DESK_SCALE = dict(replications=20, split_sizes=(500, 500, 500))
FULL_SCALE = dict(replications=100, split_sizes=(1000, 1000, 1000))
TEST_COLUMNS = ("test_tau_risk", "test_value")


@dataclass
class ExperimentConfig:
    scenarios: list[int] = field(default_factory=lambda: list(range(1, 17)))
    replications: int = DESK_SCALE["replications"]
    split_sizes: tuple[int, int, int] = DESK_SCALE["split_sizes"]
    master_seed: int = 20180501
    metrics: list[str] = field(default_factory=lambda: list(TABLE_METRICS))
    lambda_log_range: tuple[float, float] = (-5.0, 2.0)
    lambda_count: int = 20
    tree_counts: list[int] = field(default_factory=lambda: [1, 2, 5, 10, 25, 50, 100, 200, 350, 500])
    alpha: float = 0.5
    depth: int = 3
    shrinkage: float = 0.2
    min_node: int = 3
    folds: int = 5
    use_known_propensity: bool = True
    jobs: int = 1
    out_dir: str = "results"

    def __post_init__(self):
        self.scenarios = [int(s) for s in self.scenarios]
        self.split_sizes = tuple(int(s) for s in self.split_sizes)
        self.tree_counts = [int(t) for t in self.tree_counts]
        self.lambda_log_range = tuple(float(v) for v in self.lambda_log_range)
        self.metrics = list(self.metrics)
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if len(self.split_sizes) != 3 or min(self.split_sizes) < 50:
            raise ValueError("split_sizes must be three sizes, each >= 50")
        unknown = set(self.metrics) - set(DIRECTION)
        if unknown:
            raise ValueError(f"unknown metrics {sorted(unknown)}")
        catalog = load_catalog()
        missing = set(self.scenarios) - set(catalog)
        if missing:
            raise ValueError(f"unknown scenarios {sorted(missing)}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config fields {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["split_sizes"] = list(self.split_sizes)
        d["lambda_log_range"] = list(self.lambda_log_range)
        return d

    def lambdas(self) -> list[float]:
        lo, hi = self.lambda_log_range
        return [float(v) for v in np.exp(np.linspace(lo, hi, self.lambda_count))]

    def algo_specs(self) -> list[AlgoSpec]:
        return ([AlgoSpec("elastic_net", l) for l in self.lambdas()]
                + [AlgoSpec("gbt", t) for t in self.tree_counts])

    def learner_settings(self) -> LearnerSettings:
        return LearnerSettings(self.alpha, self.depth, self.shrinkage, self.min_node)


@dataclass
class ReplicationResult:
    scenario: int
    replication: int
    ok: bool
    reason: str = ""
    models: list[tuple[str, str, str]] = field(default_factory=list)  # (meta, algo, hyper)
    scores: dict[str, list] = field(default_factory=dict)
    test: dict[str, list[float]] = field(default_factory=dict)
    selections: dict[str, int] = field(default_factory=dict)
    reconstructed: list[bool] = field(default_factory=list)
    seconds: float = 0.0


def replication_stream(config: ExperimentConfig, scenario: int, replication: int) -> RandomStream:
    return RandomStream(config.master_seed).child("scenario", scenario, "replication", replication)


def run_replication(scenario: int, replication: int, config: ExperimentConfig) -> ReplicationResult:
    """One cell of the experiment; failures are captured, not raised."""
    t0 = time.perf_counter()
    try:
        res = _replication(scenario, replication, config)
    except Exception as exc:  # noqa: BLE001 - any module failure aborts only this cell
        log.warning("scenario %d replication %d failed: %s", scenario, replication, exc)
        res = ReplicationResult(scenario, replication, False, f"{type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - t0
    return res


def _replication(scenario: int, replication: int, config: ExperimentConfig) -> ReplicationResult:
    spec = load_catalog()[scenario]
    stream = replication_stream(config, scenario, replication)
    settings = config.learner_settings()
    algos = config.algo_specs()
    n = sum(config.split_sizes)

    data, truth = sample(spec, n, stream.child("sample"))
    split = make_splits(n, config.split_sizes, stream.child("split"))
    train, val, test = (subset(data, idx) for idx in (split.train, split.validation, split.test))
    test_truth = truth.subset(split.test)
    known_p = 0.5 if (spec.randomized and config.use_known_propensity) else None

    train_nuis = cross_estimate(train, config.folds, algos, stream.child("train_nuisance"),
                                known_propensity=known_p, targets=("p", "m"), settings=settings)
    grid = enumerate_models(algos)
    models = fit_grid(grid, train, train_nuis.m_check, train_nuis.p_check, settings)

    val_nuis = cross_estimate(val, config.folds, algos, stream.child("val_nuisance"),
                              known_propensity=known_p, settings=settings)
    match = mahalanobis_match(val) if "tau_risk_match" in config.metrics else None

    preds = [predictions_for(m, val.X, val_nuis) for m in models]
    scores, selections = {}, {}
    for metric in config.metrics:
        s = score_models(metric, preds, val, val_nuis, match, stream.child("select", metric))
        scores[metric] = s
        selections[metric] = best_index(s, metric)

    tau_test = [m.predict_tau(test.X) for m in models]
    test_scores = {
        "test_tau_risk": [test_tau_risk(t, test_truth) for t in tau_test],
        "test_value": [test_value(t, test_truth) for t in tau_test],
    }
    return ReplicationResult(
        scenario, replication, True,
        models=[(meta, s.family, s.hyper) for meta, s in grid],
        scores=scores, test=test_scores, selections=selections,
        reconstructed=[p.reconstructed for p in preds],
    )


def _run_cell(args):
    scenario, replication, config = args
    return run_replication(scenario, replication, config)


def run_cells(config: ExperimentConfig) -> list[ReplicationResult]:
    cells = [(s, r, config) for s in config.scenarios for r in range(config.replications)]
    if config.jobs == 1:
        results = []
        for c in cells:
            res = _run_cell(c)
            log.info("scenario %d rep %d done in %.1fs", res.scenario, res.replication, res.seconds)
            results.append(res)
        return results
    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
        return list(pool.map(_run_cell, cells, chunksize=1))


# ---------------------------------------------------------------- records

RAW_HEADER = ("scenario", "replication", "metric", "model_id", "meta_learner", "algo", "hyper", "score")
SEL_HEADER = ("scenario", "replication", "metric", "model_id", "meta_learner", "algo", "hyper",
              "tau_risk_test", "value_test")


def _fmt(v) -> str:
    return "NA" if v is None else format(float(v), ".17g")


def raw_rows(results: Iterable[ReplicationResult]):
    for res in results:
        if not res.ok:
            continue
        columns = list(res.scores.items()) + list(res.test.items())
        for metric, vals in columns:
            for mid, ((meta, algo, hyper), v) in enumerate(zip(res.models, vals)):
                yield (res.scenario, res.replication, metric, mid, meta, algo, hyper, _fmt(v))


def selection_records(results: Iterable[ReplicationResult]) -> list[dict]:
    out = []
    for res in results:
        if not res.ok:
            continue
        for metric, mid in res.selections.items():
            meta, algo, hyper = res.models[mid]
            out.append(dict(
                scenario=res.scenario, replication=res.replication, metric=metric,
                model_id=mid, meta_learner=meta, algo=algo, hyper=hyper,
                tau_risk_test=res.test["test_tau_risk"][mid],
                value_test=res.test["test_value"][mid],
            ))
    return out


def read_selections(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["scenario"] = int(r["scenario"])
        r["replication"] = int(r["replication"])
        r["model_id"] = int(r["model_id"])
        r["tau_risk_test"] = float(r["tau_risk_test"])
        r["value_test"] = float(r["value_test"])
    return rows


def selections_from_raw(path, metrics: Sequence[str] | None = None) -> list[dict]:
    """Recompute every selection from ``raw_scores.csv`` alone."""
    cells: dict[tuple[int, int], dict[str, dict[int, float | None]]] = {}
    labels: dict[tuple[int, int], dict[int, tuple[str, str, str]]] = {}
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            key = (int(r["scenario"]), int(r["replication"]))
            mid = int(r["model_id"])
            v = None if r["score"] == "NA" else float(r["score"])
            cells.setdefault(key, {}).setdefault(r["metric"], {})[mid] = v
            labels.setdefault(key, {})[mid] = (r["meta_learner"], r["algo"], r["hyper"])
    out = []
    for (s, rep), by_metric in sorted(cells.items()):
        for metric, vals in by_metric.items():
            if metric in TEST_COLUMNS or (metrics is not None and metric not in metrics):
                continue
            ordered = [vals[i] for i in sorted(vals)]
            mid = best_index(ordered, metric)
            meta, algo, hyper = labels[(s, rep)][mid]
            out.append(dict(scenario=s, replication=rep, metric=metric, model_id=mid,
                            meta_learner=meta, algo=algo, hyper=hyper,
                            tau_risk_test=by_metric["test_tau_risk"][mid],
                            value_test=by_metric["test_value"][mid]))
    return out


# ------------------------------------------------------------- aggregation

@dataclass
class SummaryCell:
    metric: str
    scenario: int
    n: int
    mean_tau_risk: float
    se_tau_risk: float
    mean_value: float
    se_value: float
    wins_tau_risk: int
    wins_value: int


def _mean_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=np.float64)
    if x.size == 1:
        return float(x[0]), math.nan
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def aggregate(records: Sequence[dict]) -> list[SummaryCell]:
    """Mean, standard error and win counts per (metric, scenario).

    A metric wins a replication when it attains the best test value of
    all metrics in that replication (lowest tau-risk, highest value); ties
    all count as wins.
    """
    by_cell: dict[tuple[str, int], list[dict]] = {}
    by_rep: dict[tuple[int, int], list[dict]] = {}
    metrics: list[str] = []
    for r in records:
        by_cell.setdefault((r["metric"], r["scenario"]), []).append(r)
        by_rep.setdefault((r["scenario"], r["replication"]), []).append(r)
        if r["metric"] not in metrics:
            metrics.append(r["metric"])
    wins_t: dict[tuple[str, int], int] = {}
    wins_v: dict[tuple[str, int], int] = {}
    for (s, _), rows in by_rep.items():
        best_t = min(r["tau_risk_test"] for r in rows)
        best_v = max(r["value_test"] for r in rows)
        for r in rows:
            key = (r["metric"], s)
            wins_t[key] = wins_t.get(key, 0) + (r["tau_risk_test"] == best_t)
            wins_v[key] = wins_v.get(key, 0) + (r["value_test"] == best_v)
    out = []
    scenarios = sorted({s for _, s in by_cell})
    for m in metrics:
        for s in scenarios:
            rows = by_cell.get((m, s))
            if not rows:
                continue
            mt, st = _mean_se([r["tau_risk_test"] for r in rows])
            mv, sv = _mean_se([r["value_test"] for r in rows])
            out.append(SummaryCell(m, s, len(rows), mt, st, mv, sv,
                                   wins_t.get((m, s), 0), wins_v.get((m, s), 0)))
    return out


def write_long_summary(path, cells: Sequence[SummaryCell]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(SummaryCell.__dataclass_fields__))
        for c in cells:
            w.writerow([c.metric, c.scenario, c.n, _fmt(c.mean_tau_risk), _fmt(c.se_tau_risk),
                        _fmt(c.mean_value), _fmt(c.se_value), c.wins_tau_risk, c.wins_value])


def write_wide_summary(path, cells: Sequence[SummaryCell], attr: str,
                       metrics: Sequence[str], scenarios: Sequence[int]) -> None:
    """Rows are metrics, columns scenarios; missing cells are written as NA."""
    lookup = {(c.metric, c.scenario): getattr(c, attr) for c in cells}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric"] + [str(s) for s in scenarios])
        for m in metrics:
            w.writerow([m] + [_fmt(lookup.get((m, s))) for s in scenarios])


# --------------------------------------------------------------------- run

def write_outputs(out_dir, config: ExperimentConfig, results: Sequence[ReplicationResult],
                  elapsed: float | None = None) -> dict:
    out = Path(out_dir)
    with open(out / "raw_scores.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_HEADER)
        w.writerows(raw_rows(results))
    records = selection_records(results)
    with open(out / "selections.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SEL_HEADER)
        for r in records:
            w.writerow([r["scenario"], r["replication"], r["metric"], r["model_id"],
                        r["meta_learner"], r["algo"], r["hyper"],
                        _fmt(r["tau_risk_test"]), _fmt(r["value_test"])])
    cells = aggregate(records)
    write_wide_summary(out / "summary_tau_risk.csv", cells, "mean_tau_risk",
                       config.metrics, config.scenarios)
    write_wide_summary(out / "summary_value.csv", cells, "mean_value",
                       config.metrics, config.scenarios)
    write_long_summary(out / "summary_long.csv", cells)

    failures = [dict(scenario=r.scenario, replication=r.replication, reason=r.reason)
                for r in results if not r.ok]
    reconstructed = sorted({f"{m[0]}/{m[1]}" for r in results if r.ok
                            for m, flag in zip(r.models, r.reconstructed) if flag})
    manifest = dict(
        config=config.to_dict(),
        master_seed=config.master_seed,
        versions=dict(itesel=__version__, numpy=np.__version__, python=platform.python_version(),
                      kernel_backend=_kernels.BACKEND_NAME),
        n_cells=len(results),
        n_succeeded=sum(r.ok for r in results),
        failures=failures,
        reconstructed_outcome_models=reconstructed,
        elapsed_seconds=elapsed,
    )
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest


def run(config: ExperimentConfig) -> list[ReplicationResult]:
    """Run every (scenario, replication) cell and write all outputs."""
    out = ensure_writable_dir(config.out_dir)
    t0 = time.perf_counter()
    results = run_cells(config)
    write_outputs(out, config, results, time.perf_counter() - t0)
    return results
