"""Declarative experiment campaigns: strategy x repetition runs on one dataset.

A campaign loads a CSV, optionally subsamples it, fixes one stratified
train/test split and then, for every strategy and repetition, tunes a random
forest with k-fold CV on the training split, retrains the winner on the whole
training split and scores it on the test split.

Results directory layout::

    <out>/experiment.json                  resolved configuration
    <out>/<strategy>/<rep>/trials.jsonl    one line per objective call
    <out>/<strategy>/<rep>/result.json     written once the repetition is done
    <out>/summary.json                     every repetition plus both report tables
    <out>/report.md

A repetition whose ``result.json`` exists is loaded instead of rerun, so an
interrupted campaign resumes where it stopped.
"""
from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .core import STRATEGIES, StrategyResult, JsonlSink, read_trials, run_strategy
from .data import ELEC2_SCHEMA, DatasetSchema, load_csv, subsample_stratified
from .errors import ConfigError, EmptyCampaign
from .evaluation import EvaluationReport, CVObjective, holdout_evaluate, stratified_holdout
from .rng import SeededRandomStream
from .space import SearchSpace

log = logging.getLogger(__name__)

TIMING_KEYS = frozenset({"wall_time", "wall_time_seconds", "cpu_time_seconds"})


# ---------------------------------------------------------------- configuration

@dataclass(frozen=True)
class StrategySpec:
    name: str
    space: SearchSpace
    budget: int | None = None
    params: dict = field(default_factory=dict)
    label: str | None = None

    @property
    def key(self) -> str:
        return self.label or self.name

    def to_dict(self) -> dict:
        return {"name": self.name, "label": self.key, "space": self.space.to_dicts(),
                "budget": self.budget, "params": dict(self.params)}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    schema: DatasetSchema = ELEC2_SCHEMA
    strategies: tuple = ()
    subsample: int | None = None
    test_fraction: float = 0.2
    cv_folds: int = 5
    repetitions: int = 15
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if not self.strategies:
            raise ConfigError("experiment lists no strategies")
        keys = [s.key for s in self.strategies]
        if len(set(keys)) != len(keys):
            raise ConfigError(f"strategy labels must be unique, got {keys}")
        for s in self.strategies:
            if s.name not in STRATEGIES:
                raise ConfigError(f"unknown strategy {s.name!r}; expected one of {STRATEGIES}")
            if s.name == "grid" and not s.space.is_finite:
                raise ConfigError(f"strategy {s.key!r}: grid search needs finite axes")
            if s.name != "grid" and s.budget is None:
                raise ConfigError(f"strategy {s.key!r} needs a budget")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        if self.subsample is not None and self.subsample < 1:
            raise ConfigError("subsample must be positive")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie in (0, 1)")

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> ExperimentConfig:
        try:
            ds = d["dataset"]
            path = ds["path"] if isinstance(ds, dict) else ds
            schema_d = ds.get("schema") if isinstance(ds, dict) else None
            if base_dir is not None and not os.path.isabs(path):
                path = os.path.normpath(os.path.join(base_dir, path))
            schema = ELEC2_SCHEMA if schema_d is None else DatasetSchema.from_dict(schema_d)
            if isinstance(ds, dict) and ds.get("drop_columns"):
                drop = set(ds["drop_columns"])
                schema = replace(schema, feature_columns=tuple(c for c in schema.feature_columns if c not in drop))
            strategies = [
                StrategySpec(s["name"], SearchSpace.from_dicts(s["space"]), s.get("budget"),
                             dict(s.get("params") or {}), s.get("label"))
                for s in d["strategies"]
            ]
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed experiment config: {exc!r}") from None
        return cls(
            dataset=path,
            schema=schema,
            strategies=tuple(strategies),
            subsample=d.get("subsample"),
            test_fraction=float(d.get("test_fraction", 0.2)),
            cv_folds=int(d.get("cv_folds", 5)),
            repetitions=int(d.get("repetitions", 15)),
            seed=int(d.get("seed", 0)),
        )

    @classmethod
    def from_file(cls, path) -> ExperimentConfig:
        """Read a YAML (or JSON, which is valid YAML) experiment file."""
        path = Path(path)
        with path.open(encoding="utf-8") as fh:
            d = yaml.safe_load(fh)
        if not isinstance(d, dict):
            raise ConfigError(f"{path}: expected a mapping at the top level")
        return cls.from_dict(d, base_dir=path.resolve().parent)

    def to_dict(self) -> dict:
        return {
            "dataset": {"path": str(self.dataset), "schema": self.schema.to_dict()},
            "subsample": self.subsample,
            "test_fraction": self.test_fraction,
            "cv_folds": self.cv_folds,
            "repetitions": self.repetitions,
            "seed": self.seed,
            "strategies": [s.to_dict() for s in self.strategies],
        }


# ---------------------------------------------------------------- results

@dataclass
class RepetitionResult:
    strategy: str
    repetition: int
    seed: int
    search: StrategyResult
    test_report: EvaluationReport
    train_accuracy: float
    wall_time_seconds: float

    @property
    def test_accuracy(self) -> float:
        return self.test_report.accuracy

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "repetition": self.repetition,
            "seed": self.seed,
            "search": self.search.to_dict(),
            "test": self.test_report.to_dict(),
            "train_accuracy": self.train_accuracy,
            "wall_time_seconds": self.wall_time_seconds,
        }

    @classmethod
    def from_dict(cls, d: dict, history=()) -> RepetitionResult:
        s = d["search"]
        search = StrategyResult(dict(s["best_config"]), float(s["best_score"]), list(history),
                                s["strategy"], int(s["seed"]), dict(s.get("extras", {})))
        return cls(d["strategy"], int(d["repetition"]), int(d["seed"]), search,
                   EvaluationReport.from_dict(d["test"]), float(d["train_accuracy"]),
                   float(d["wall_time_seconds"]))


@dataclass
class CampaignResult:
    config: dict
    data_info: dict
    runs: list

    def strategies(self) -> list[str]:
        seen = []
        for r in self.runs:
            if r.strategy not in seen:
                seen.append(r.strategy)
        return seen

    def runs_for(self, strategy: str) -> list[RepetitionResult]:
        return sorted((r for r in self.runs if r.strategy == strategy), key=lambda r: r.repetition)

    def to_dict(self) -> dict:
        return {"config": self.config, "data": self.data_info,
                "runs": [r.to_dict() for r in sorted(self.runs, key=lambda r: (r.strategy, r.repetition))]}


def strip_timing(obj):
    """Copy of a JSON-like object without wall-clock fields."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def _write_json(path: Path, obj) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, path)


# ---------------------------------------------------------------- running

def prepare_data(config: ExperimentConfig):
    """Load, subsample and split. Returns ``(train, test, info)``."""
    root = SeededRandomStream(config.seed)
    data = load_csv(config.dataset, config.schema)
    info = {"rows_loaded": data.n_rows, "class_counts_loaded": data.class_counts()}
    if config.subsample is not None and config.subsample < data.n_rows:
        data = subsample_stratified(data, config.subsample, root.derive_seed("subsample"))
    train, test = stratified_holdout(data, config.test_fraction, root.derive_seed("holdout"))
    info.update(rows_used=data.n_rows, train_rows=train.n_rows, test_rows=test.n_rows,
                features=list(data.feature_names))
    return train, test, info


def _same_experiment(a: dict, b: dict) -> bool:
    # the dataset may be addressed by a different path on resume
    def norm(d):
        d = json.loads(json.dumps(d))
        d["dataset"].pop("path", None)
        return d
    return norm(a) == norm(b)


def repetition_seed(root_seed: int, strategy: str, rep: int) -> int:
    return SeededRandomStream(root_seed).derive_seed("run", strategy, rep)


def run_experiment(config: ExperimentConfig, out_dir=None, *, threads: int | None = None) -> CampaignResult:
    """Run (or resume) every strategy x repetition of ``config``.

    With ``out_dir`` set, trial logs and per-repetition results are written as
    they complete, then ``summary.json`` and ``report.md``. A directory
    created for a different configuration is refused rather than mixed.
    """
    out = Path(out_dir) if out_dir is not None else None
    cfg_dict = config.to_dict()
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        stamp = out / "experiment.json"
        if stamp.exists() and not _same_experiment(json.loads(stamp.read_text(encoding="utf-8")), cfg_dict):
            raise ConfigError(f"{out} holds results for a different configuration")
        _write_json(stamp, cfg_dict)

    train, test, info = prepare_data(config)
    log.info("train %d rows, test %d rows, features %s", train.n_rows, test.n_rows, info["features"])
    root = SeededRandomStream(config.seed)
    objective = CVObjective(train, None, config.cv_folds, root.derive_seed("cv"), cache=True, threads=threads)

    runs = []
    for spec in config.strategies:
        objective.space = spec.space
        for rep in range(config.repetitions):
            rep_dir = out / spec.key / str(rep) if out is not None else None
            if rep_dir is not None and (rep_dir / "result.json").exists():
                d = json.loads((rep_dir / "result.json").read_text(encoding="utf-8"))
                runs.append(RepetitionResult.from_dict(d, read_trials(rep_dir / "trials.jsonl")))
                log.info("%s rep %d: loaded from %s", spec.key, rep, rep_dir)
                continue
            runs.append(_run_repetition(spec, rep, config, objective, train, test, rep_dir))

    campaign = CampaignResult(cfg_dict, info, runs)
    if out is not None:
        write_outputs(campaign, out)
    return campaign


def _run_repetition(spec: StrategySpec, rep: int, config: ExperimentConfig, objective: CVObjective,
                    train, test, rep_dir: Path | None) -> RepetitionResult:
    seed = repetition_seed(config.seed, spec.key, rep)
    objective.clear_cache()
    t0 = time.perf_counter()
    sink = None
    if rep_dir is not None:
        rep_dir.mkdir(parents=True, exist_ok=True)
        sink = JsonlSink(rep_dir / "trials.jsonl")
    try:
        search = run_strategy(spec.name, spec.space, objective, spec.budget, seed, spec.params, sink=sink)
    finally:
        if sink is not None:
            sink.close()
    final_seed = SeededRandomStream(config.seed).derive_seed("final", spec.key, rep)
    report, train_acc = holdout_evaluate(train, test, search.best_config, final_seed)
    result = RepetitionResult(spec.key, rep, seed, search, report, train_acc, time.perf_counter() - t0)
    log.info("%s rep %d: %d trials, cv %.4f, test %.4f, train %.4f, %.1fs", spec.key, rep,
             len(search.history), search.best_score, report.accuracy, train_acc, result.wall_time_seconds)
    if rep_dir is not None:
        _write_json(rep_dir / "result.json", result.to_dict())
    return result


# ---------------------------------------------------------------- reporting

def load_campaign(results_dir) -> CampaignResult:
    """Rebuild a campaign from a results directory (complete or partial)."""
    out = Path(results_dir)
    stamp = out / "experiment.json"
    if not stamp.exists():
        raise EmptyCampaign(f"{out} is not a results directory")
    cfg = json.loads(stamp.read_text(encoding="utf-8"))
    info = {}
    if (out / "summary.json").exists():
        info = json.loads((out / "summary.json").read_text(encoding="utf-8")).get("data", {})
    runs = []
    for s in cfg["strategies"]:
        sdir = out / s["label"]
        if not sdir.is_dir():
            continue
        reps = sorted((p for p in sdir.iterdir() if p.name.isdigit()), key=lambda p: int(p.name))
        for rdir in reps:
            if (rdir / "result.json").exists():
                d = json.loads((rdir / "result.json").read_text(encoding="utf-8"))
                runs.append(RepetitionResult.from_dict(d, read_trials(rdir / "trials.jsonl")))
    return CampaignResult(cfg, info, runs)


def best_run(runs: list[RepetitionResult]) -> RepetitionResult:
    """Highest test accuracy; ties go to the lowest repetition index."""
    return min(runs, key=lambda r: (-r.test_accuracy, r.repetition))


def render_report(campaign: CampaignResult) -> dict:
    """Per-class table of each strategy's best repetition and a per-strategy summary.

    Returns a JSON-ready dict with keys ``per_class``, ``summary`` and
    ``markdown``.
    """
    if not campaign.runs:
        raise EmptyCampaign("no completed repetitions to report")
    per_class, summary = [], []
    for name in sorted(campaign.strategies()):
        runs = campaign.runs_for(name)
        best = best_run(runs)
        for cls in best.test_report.confusion.labels:
            m = best.test_report.per_class[cls]
            per_class.append({"strategy": name, "repetition": best.repetition, "class": cls,
                              "precision": m["precision"], "recall": m["recall"], "f1": m["f1"]})
        summary.append({
            "strategy": name,
            "repetitions": len(runs),
            "test_accuracy": float(np.mean([r.test_accuracy for r in runs])),
            "train_accuracy": float(np.mean([r.train_accuracy for r in runs])),
            "cv_accuracy": float(np.mean([r.search.best_score for r in runs])),
            "trials": int(sum(len(r.search.history) for r in runs)),
            "cpu_time_seconds": float(sum(r.wall_time_seconds for r in runs)),
        })
    return {"per_class": per_class, "summary": summary, "markdown": _markdown(per_class, summary)}


def _markdown(per_class: list, summary: list) -> str:
    lines = ["# Tuning campaign report", "",
             "## Best repetition per strategy (test split)", "",
             "| Algorithm | Rep | Class | Precision | Recall | F1-score |",
             "|---|---|---|---|---|---|"]
    for row in per_class:
        lines.append(f"| {row['strategy']} | {row['repetition']} | {row['class']} | {row['precision']:.2f} "
                     f"| {row['recall']:.2f} | {row['f1']:.2f} |")
    lines += ["", "## Mean over repetitions", "",
              "| Algorithm | Test Accuracy | Train Accuracy | CPU Time | Reps |",
              "|---|---|---|---|---|"]
    for row in summary:
        lines.append(f"| {row['strategy']} | {row['test_accuracy']:.4f} | {row['train_accuracy']:.4f} "
                     f"| {row['cpu_time_seconds']:.2f} | {row['repetitions']} |")
    lines += ["", "CPU Time is wall-clock seconds summed over repetitions.", ""]
    return "\n".join(lines)


def write_outputs(campaign: CampaignResult, out_dir) -> dict:
    out = Path(out_dir)
    report = render_report(campaign)
    summary = campaign.to_dict()
    summary["report"] = {"per_class": report["per_class"], "summary": report["summary"]}
    _write_json(out / "summary.json", summary)
    (out / "report.md").write_text(report["markdown"], encoding="utf-8")
    return report
