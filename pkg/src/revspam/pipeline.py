"""Staged pipeline: prepare -> train -> evaluate -> analyze -> report.

Every stage writes its artifacts plus a ``manifest.json`` under the output
directory. A manifest carries a digest of the configuration the stage
depends on; downstream stages recompute that digest from their own
configuration and refuse to run against artifacts built from another one.

Configuration files are INI documents::

    [pipeline]
    input = reviews.jsonl.gz
    output = out
    seed = 42
    models = lr, svm, dt, rf, gb

    [model.rf]
    n_trees = 50

Every key is optional except ``input``; see :class:`PipelineConfig` for the
defaults.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from revspam import analysis, corpus
from revspam.corpus import CorpusError, CorpusStats, SplitSpec
from revspam.evaluation import (
    MetricsReport,
    compare_models,
    comparison_csv,
    confusion,
    metrics,
)
from revspam.featurize import Featurizer, behavioral_block, tokenize_records
from revspam.features import (
    BEHAVIORAL_COLUMNS,
    DEFAULT_TEXT_K,
    correlation_variables,
    reviewer_counts,
    pearson_correlation_matrix,
    write_chi_square_csv,
)
from revspam.models import DEFAULT_CONFIGS, MODEL_NAMES, TrainConfig, TrainedModel, TrainingError, train
from revspam.textproc import DEFAULT_MAX_TERMS, DEFAULT_MIN_DF

log = logging.getLogger(__name__)

PREPARE_DIR = "prepared"
TRAIN_DIR = "trained"
EVAL_DIR = "evaluation"
ANALYSIS_DIR = "analysis"
MANIFEST = "manifest.json"


class ConfigError(ValueError):
    """Invalid or incomplete configuration (exit code 1)."""


class DataError(RuntimeError):
    """Bad input data or stale/missing upstream artifacts (exit code 2)."""


@dataclass
class PipelineConfig:
    input_path: str | None = None
    output_dir: str = "out"
    on_error: str = "skip"
    train_fraction: float = 0.8
    seed: int = 42
    stratified: bool = True
    max_terms: int = DEFAULT_MAX_TERMS
    min_df: int = DEFAULT_MIN_DF
    selection_k: int = DEFAULT_TEXT_K
    models: tuple[str, ...] = MODEL_NAMES
    model_overrides: dict = field(default_factory=dict)
    segment_bounds: tuple[int, int] = analysis.DEFAULT_BOUNDS
    threshold: float = 0.5
    workers: int = 1

    def validate(self, require_input: bool = False) -> "PipelineConfig":
        if require_input:
            if not self.input_path:
                raise ConfigError("no input corpus given (set 'input' or pass --input)")
            if not Path(self.input_path).is_file():
                raise ConfigError(f"input corpus {self.input_path} does not exist")
        if self.on_error not in ("skip", "abort"):
            raise ConfigError(f"on_error must be skip or abort, got {self.on_error!r}")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.max_terms < 1 or self.min_df < 1 or self.selection_k < 1 or self.workers < 1:
            raise ConfigError("max_terms, min_df, selection_k and workers must be >= 1")
        unknown = [m for m in self.models if m not in MODEL_NAMES]
        if unknown or not self.models:
            raise ConfigError(f"unknown or empty model list {unknown or self.models}")
        a, b = self.segment_bounds
        if not 1 <= a < b:
            raise ConfigError("segment bounds must satisfy 1 <= a < b")
        for name in self.model_overrides:
            if name not in MODEL_NAMES:
                raise ConfigError(f"overrides given for unknown model {name!r}")
        try:
            for name in self.models:
                self.model_config(name)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def model_config(self, name: str) -> TrainConfig:
        overrides = {"seed": self.seed, **self.model_overrides.get(name, {})}
        return replace(DEFAULT_CONFIGS[name], **overrides)

    @property
    def out(self) -> Path:
        return Path(self.output_dir)

    # digests leave out workers and output_dir (neither may change results) and the
    # input path; the prepare manifest records the input's content hash instead
    def prepare_digest(self) -> str:
        return _digest({"on_error": self.on_error,
                        "train_fraction": self.train_fraction, "seed": self.seed,
                        "stratified": self.stratified})

    def train_digest(self) -> str:
        return _digest({"prepare": self.prepare_digest(), "max_terms": self.max_terms,
                        "min_df": self.min_df, "selection_k": self.selection_k,
                        "models": {m: self.model_config(m).to_dict() for m in self.models}})

    def evaluate_digest(self) -> str:
        return _digest({"train": self.train_digest(), "threshold": self.threshold})

    def analyze_digest(self) -> str:
        return _digest({"prepare": self.prepare_digest(),
                        "segment_bounds": list(self.segment_bounds)})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["models"] = list(self.models)
        d["segment_bounds"] = list(self.segment_bounds)
        return d


def _digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


_BOOL = {"true": True, "yes": True, "1": True, "on": True,
         "false": False, "no": False, "0": False, "off": False}


def _coerce(value: str, kind):
    if kind is bool:
        try:
            return _BOOL[value.strip().lower()]
        except KeyError:
            raise ConfigError(f"not a boolean: {value!r}") from None
    if kind is type(None):
        return None
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"cannot read {value!r} as {kind.__name__}") from None


def _split_list(value: str) -> list[str]:
    return [v.strip() for v in value.replace(";", ",").split(",") if v.strip()]


_PIPELINE_KEYS = {
    "input": ("input_path", str), "input_path": ("input_path", str),
    "output": ("output_dir", str), "output_dir": ("output_dir", str),
    "on_error": ("on_error", str), "train_fraction": ("train_fraction", float),
    "seed": ("seed", int), "stratified": ("stratified", bool),
    "max_terms": ("max_terms", int), "min_df": ("min_df", int),
    "selection_k": ("selection_k", int), "threshold": ("threshold", float),
    "workers": ("workers", int),
}
_TRAIN_TYPES = {"seed": int, "epochs": int, "learning_rate": float, "l2_penalty": float,
                "batch_size": int, "max_depth": int, "min_samples_leaf": int, "n_trees": int,
                "feature_subsample_ratio": float, "bootstrap": bool}


def load_config(path: str | os.PathLike) -> PipelineConfig:
    """Read an INI pipeline configuration; relative paths resolve against its folder."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    cfg = PipelineConfig()
    base = Path(path).resolve().parent
    if parser.has_section("pipeline"):
        for key, raw in parser.items("pipeline"):
            if key == "models":
                cfg.models = tuple(_split_list(raw))
            elif key == "segment_bounds":
                parts = _split_list(raw)
                if len(parts) != 2:
                    raise ConfigError("segment_bounds needs two integers")
                cfg.segment_bounds = (_coerce(parts[0], int), _coerce(parts[1], int))
            elif key in _PIPELINE_KEYS:
                attr, kind = _PIPELINE_KEYS[key]
                setattr(cfg, attr, _coerce(raw, kind))
            else:
                raise ConfigError(f"unknown key [pipeline] {key}")
    for section in parser.sections():
        if section == "pipeline":
            continue
        if not section.startswith("model."):
            raise ConfigError(f"unknown section [{section}]")
        name = section.split(".", 1)[1]
        overrides = {}
        for key, raw in parser.items(section):
            if key not in _TRAIN_TYPES:
                raise ConfigError(f"unknown key [{section}] {key}")
            if key == "feature_subsample_ratio" and raw.strip().lower() in ("sqrt", "none"):
                overrides[key] = None
            else:
                overrides[key] = _coerce(raw, _TRAIN_TYPES[key])
        cfg.model_overrides[name] = overrides
    for attr in ("input_path", "output_dir"):
        value = getattr(cfg, attr)
        if value and not Path(value).is_absolute():
            setattr(cfg, attr, str(base / value))
    return cfg


# --------------------------------------------------------------------------- artifact helpers

def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _read_manifest(stage_dir: Path, expected_digest: str, stage: str) -> dict:
    path = stage_dir / MANIFEST
    if not path.exists():
        raise DataError(f"{stage} outputs missing under {stage_dir}; run '{stage}' first")
    manifest = json.loads(path.read_text(encoding="utf-8"))
    if manifest.get("config_digest") != expected_digest:
        raise DataError(f"{stage} outputs in {stage_dir} were built with a different "
                        f"configuration ({manifest.get('config_digest')} != {expected_digest}); "
                        f"re-run '{stage}'")
    return manifest


def _load_split(cfg: PipelineConfig):
    d = cfg.out / PREPARE_DIR
    _read_manifest(d, cfg.prepare_digest(), "prepare")
    train_recs, _ = corpus.load_corpus(d / "train.jsonl", on_error="abort")
    test_recs, _ = corpus.load_corpus(d / "test.jsonl", on_error="abort")
    return train_recs, test_recs


# --------------------------------------------------------------------------- stages

def run_prepare(cfg: PipelineConfig) -> CorpusStats:
    """Load, clean and split the corpus; write train/test JSON lines and stats."""
    cfg.validate(require_input=True)
    digest = hashlib.sha256()
    stats = CorpusStats()
    try:
        records = list(corpus.iter_records(cfg.input_path, on_error=cfg.on_error,
                                           workers=cfg.workers, stats=stats, digest=digest))
    except CorpusError as exc:
        raise DataError(str(exc)) from exc
    cleaned, clean_stats = corpus.clean(records)
    stats.dropped_null = clean_stats.dropped_null
    stats.dropped_duplicate = clean_stats.dropped_duplicate
    stats.kept = clean_stats.kept
    stats.check()
    if not cleaned:
        raise DataError("no records left after cleaning")
    try:
        train_recs, test_recs = corpus.split(
            cleaned, SplitSpec(cfg.train_fraction, cfg.seed, cfg.stratified))
    except ValueError as exc:
        raise DataError(str(exc)) from exc

    out = cfg.out / PREPARE_DIR
    out.mkdir(parents=True, exist_ok=True)
    corpus.write_jsonl(train_recs, out / "train.jsonl")
    corpus.write_jsonl(test_recs, out / "test.jsonl")
    (out / "corpus_stats.json").write_text(stats.to_json(), encoding="utf-8")
    _write_json(out / MANIFEST, {
        "stage": "prepare",
        "config_digest": cfg.prepare_digest(),
        "input_sha256": digest.hexdigest(),
        "train_records": len(train_recs),
        "test_records": len(test_recs),
    })
    log.info("prepare: kept %d of %d lines (%d train / %d test)", stats.kept,
             stats.total_read, len(train_recs), len(test_recs))
    return stats


def run_train(cfg: PipelineConfig) -> dict:
    """Fit features on the training split and train every configured model.

    A model whose training fails is reported in ``train_report.json`` and
    skipped; the others are still trained and saved.
    """
    cfg.validate()
    train_recs, _ = _load_split(cfg)
    featurizer, matrix, scores = Featurizer.fit(
        train_recs, max_terms=cfg.max_terms, min_df=cfg.min_df, text_k=cfg.selection_k,
        workers=cfg.workers)

    out = cfg.out / TRAIN_DIR
    (out / "models").mkdir(parents=True, exist_ok=True)
    featurizer.save(out / "featurizer.json")
    featurizer.tfidf.save(out / "tfidf.json")
    names = featurizer.tfidf.vocabulary.terms + list(BEHAVIORAL_COLUMNS)
    write_chi_square_csv(scores, names, out / "chi_square.csv")

    report = {"trained": [], "failed": {}, "rows": matrix.n_rows,
              "dimension": matrix.dimension}
    for name in cfg.models:
        path = out / "models" / f"{name}.json"
        try:
            model = train(name, matrix, cfg.model_config(name), workers=cfg.workers)
        except TrainingError as exc:
            log.error("train: %s failed: %s", name, exc)
            report["failed"][name] = str(exc)
            if path.exists():
                path.unlink()
            continue
        model.threshold = cfg.threshold
        model.info["config_digest"] = cfg.train_digest()
        scores_train = model.predict_scores(matrix.X)
        model.info["train_accuracy"] = float(((scores_train >= model.threshold)
                                              == (matrix.labels == 1)).mean())
        model.save(path)
        report["trained"].append(name)
        log.info("train: %s done (train accuracy %.4f)", name, model.info["train_accuracy"])
    _write_json(out / "train_report.json", report)
    _write_json(out / MANIFEST, {"stage": "train", "config_digest": cfg.train_digest(),
                                 "prepare_digest": cfg.prepare_digest(),
                                 "models": report["trained"]})
    return report


def run_evaluate(cfg: PipelineConfig) -> list[MetricsReport]:
    """Score each trained model on the held-out split; write JSON and CSV reports."""
    cfg.validate()
    _, test_recs = _load_split(cfg)
    tdir = cfg.out / TRAIN_DIR
    manifest = _read_manifest(tdir, cfg.train_digest(), "train")
    featurizer = Featurizer.load(tdir / "featurizer.json")
    matrix = featurizer.transform(test_recs, workers=cfg.workers)

    out = cfg.out / EVAL_DIR
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for name in manifest["models"]:
        model = TrainedModel.load(tdir / "models" / f"{name}.json")
        if model.dimension != matrix.dimension:
            raise DataError(f"model {name} expects {model.dimension} features but the test "
                            f"matrix has {matrix.dimension}; artifacts are stale")
        cm = confusion(model.predict_scores(matrix.X), matrix.labels, cfg.threshold)
        rep = metrics(cm, name)
        (out / f"metrics_{name}.json").write_text(rep.to_json(), encoding="utf-8")
        reports.append(rep)
    if not reports:
        raise DataError("no trained models to evaluate")
    table = compare_models(reports)
    (out / "comparison.csv").write_text(comparison_csv(table), encoding="utf-8")
    _write_json(out / "comparison.json", {"table": table,
                                          "reports": [r.to_dict() for r in reports]})
    _write_json(out / MANIFEST, {"stage": "evaluate", "config_digest": cfg.evaluate_digest(),
                                 "test_records": matrix.n_rows})
    return reports


def run_analyze(cfg: PipelineConfig) -> dict:
    """Monthly series, reviewer segments and the correlation matrix of the cleaned corpus."""
    cfg.validate()
    train_recs, test_recs = _load_split(cfg)
    records = train_recs + test_recs
    out = cfg.out / ANALYSIS_DIR
    out.mkdir(parents=True, exist_ok=True)

    series = analysis.monthly_series(records)
    segments = analysis.segment_reviewers(records, cfg.segment_bounds)
    analysis.write_series_csv(series, out / "monthly_series.csv")
    analysis.write_segments_csv(segments, out / "reviewer_segments.csv")

    beh = behavioral_block(records, tokenize_records(records, cfg.workers),
                            reviewer_counts(records))
    corr = pearson_correlation_matrix(correlation_variables(records, beh))
    corr.to_csv(out / "correlation.csv")

    summary = {
        "records": len(records),
        "months": len(series),
        "reviewers": sum(s.reviewer_count for s in segments),
        "segments": {s.name: {"reviewers": s.reviewer_count, "reviews": s.review_count,
                              "spam_rate": s.spam_rate} for s in segments},
        "constant_variables": corr.constant,
    }
    _write_json(out / "summary.json", summary)
    _write_json(out / MANIFEST, {"stage": "analyze", "config_digest": cfg.analyze_digest()})
    return summary


def run_report(cfg: PipelineConfig) -> dict:
    """Gather every stage's outputs into ``report.json``."""
    cfg.validate()
    out = cfg.out
    _read_manifest(out / PREPARE_DIR, cfg.prepare_digest(), "prepare")
    report = {"config_digest": cfg.evaluate_digest(),
              "corpus": json.loads((out / PREPARE_DIR / "corpus_stats.json").read_text())}
    tdir, edir, adir = out / TRAIN_DIR, out / EVAL_DIR, out / ANALYSIS_DIR
    if (tdir / MANIFEST).exists():
        _read_manifest(tdir, cfg.train_digest(), "train")
        report["training"] = json.loads((tdir / "train_report.json").read_text())
    if (edir / MANIFEST).exists():
        _read_manifest(edir, cfg.evaluate_digest(), "evaluate")
        report["evaluation"] = json.loads((edir / "comparison.json").read_text())
    if (adir / MANIFEST).exists():
        _read_manifest(adir, cfg.analyze_digest(), "analyze")
        report["analysis"] = json.loads((adir / "summary.json").read_text())
    _write_json(out / "report.json", report)
    return report


def run_all(cfg: PipelineConfig) -> dict:
    run_prepare(cfg)
    run_train(cfg)
    run_evaluate(cfg)
    run_analyze(cfg)
    return run_report(cfg)
