"""End-to-end experiment orchestration with caching and a run manifest.

Stage order: ingest -> one-hot encode -> standardize -> symmetry break ->
point clouds -> diagrams -> distance matrix -> k-NN evaluation. Diagram
and distance caches carry a manifest with a fingerprint of everything
upstream of them; a mismatch means the cache is stale and it is recomputed
(and logged), never silently reused. All artifacts are plain text with
deterministic float formatting, so identical configs produce byte-identical
outputs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .cloud import build_point_cloud, pairwise_distances
from .errors import ContractError, TopmixError
from .evaluate import (
    EvaluationReport,
    SplitResult,
    SplitSpec,
    evaluate_kfold,
    evaluate_split,
    format_report_kv,
    format_report_text,
    format_validation_table,
    holdout_indices,
    select_k_kfold,
)
from .ingest import ParseReport, RawDataset, parse_dataset
from .metric import distance_matrix, load_distance_matrix, save_distance_matrix
from .persistence import (
    PersistenceDiagram,
    choose_maxscale,
    load_diagrams,
    rips_dim0_diagram,
    save_diagrams,
)
from .preprocess import (
    FeatureMatrix,
    default_symmetry_vector,
    fit_standardizer,
    one_hot_encode,
    standardize,
    symmetry_break,
)
from .schema import load_schema

logger = logging.getLogger("topmix")


@dataclass
class ExperimentConfig:
    """Every knob of a run; anything the method leaves open surfaces here."""

    data_path: Path
    schema_path: Path
    delimiter: str = ","
    has_header: bool = False
    symmetry_vector: str | tuple[float, ...] = "default"  # "default" | "zero" | explicit
    standardize_scope: str = "full"  # "full" | "train"
    maxscale: float | None = None
    maxscale_safety: float = 1.1
    wasserstein_p: float = 1.0
    split: SplitSpec = SplitSpec()
    k: int | None = None
    k_grid: tuple[int, ...] = tuple(range(1, 11))
    cache_dir: Path | None = None
    out_dir: Path = Path("out")
    threads: int = 1

    def __post_init__(self):
        if self.standardize_scope not in ("full", "train"):
            raise ContractError(f"unknown standardize scope {self.standardize_scope!r}")
        if self.standardize_scope == "train" and self.split.mode != "holdout":
            raise ContractError(
                "train-only standardization needs a holdout split; "
                "k-fold evaluation shares one diagram set across folds"
            )
        if isinstance(self.symmetry_vector, str):
            if self.symmetry_vector not in ("default", "zero"):
                raise ContractError(
                    f"symmetry_vector must be 'default', 'zero', or a list, "
                    f"got {self.symmetry_vector!r}"
                )
        else:
            self.symmetry_vector = tuple(float(v) for v in self.symmetry_vector)
        if self.maxscale is not None and self.maxscale <= 0:
            raise ContractError("explicit maxscale must be positive")
        if self.maxscale_safety < 1:
            raise ContractError("maxscale safety factor must be >= 1")
        if self.threads < 1:
            raise ContractError("threads must be >= 1")


def load_experiment_config(path: str | Path, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Read a JSON experiment config; relative paths resolve against it."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if overrides:
        for key, value in overrides.items():
            if value is not None:
                if key in ("split_seed",):
                    doc.setdefault("split", {})["seed"] = value
                else:
                    doc[key] = value
    base = path.parent

    def respath(key: str, default: str | None = None) -> Path | None:
        raw = doc.get(key, default)
        if raw is None:
            return None
        p = Path(raw)
        return p if p.is_absolute() else base / p

    split_doc = doc.get("split", {})
    split = SplitSpec(
        mode=split_doc.get("mode", "holdout"),
        seed=int(split_doc.get("seed", 0)),
        stratified=bool(split_doc.get("stratified", False)),
        train_frac=float(split_doc.get("train_frac", 0.6)),
        val_frac=float(split_doc.get("val_frac", 0.2)),
        test_frac=float(split_doc.get("test_frac", 0.2)),
        folds=int(split_doc.get("folds", 10)),
    )
    data_path = respath("data")
    schema_path = respath("schema")
    if data_path is None or schema_path is None:
        raise ContractError("config must set 'data' and 'schema' paths")
    for p, what in ((data_path, "data"), (schema_path, "schema")):
        if not p.exists():
            raise ContractError(f"{what} path does not exist: {p}")
    return ExperimentConfig(
        data_path=data_path,
        schema_path=schema_path,
        delimiter=doc.get("delimiter", ","),
        has_header=bool(doc.get("has_header", False)),
        symmetry_vector=doc.get("symmetry_vector", "default"),
        standardize_scope=doc.get("standardize_scope", "full"),
        maxscale=(None if doc.get("maxscale") is None else float(doc["maxscale"])),
        maxscale_safety=float(doc.get("maxscale_safety", 1.1)),
        wasserstein_p=float(doc.get("wasserstein_p", 1.0)),
        split=split,
        k=(None if doc.get("k") is None else int(doc["k"])),
        k_grid=tuple(int(k) for k in doc.get("k_grid", range(1, 11))),
        cache_dir=respath("cache_dir"),
        out_dir=respath("out_dir", "out"),
        threads=int(doc.get("threads", 1)),
    )


@contextmanager
def _stage(name: str):
    """Log stage wall time; tag errors with the stage that raised them."""
    start = time.perf_counter()
    try:
        yield
    except TopmixError as exc:
        raise type(exc)(f"[stage {name}] {exc}") from exc
    logger.info("stage %-12s %8.3fs", name, time.perf_counter() - start)


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def features_fingerprint(config: ExperimentConfig) -> str:
    """Hash of everything that can change the diagrams.

    The split enters only under train-only standardization, where the fit
    rows depend on the seed; under full-dataset scope a seed change must
    not invalidate warm diagram caches.
    """
    doc: dict[str, Any] = {
        "data_sha256": _sha256_file(config.data_path),
        "schema_sha256": _sha256_file(config.schema_path),
        "delimiter": config.delimiter,
        "has_header": config.has_header,
        "symmetry_vector": (
            config.symmetry_vector
            if isinstance(config.symmetry_vector, str)
            else list(config.symmetry_vector)
        ),
        "standardize_scope": config.standardize_scope,
        "maxscale": config.maxscale,
        "maxscale_safety": config.maxscale_safety,
        "version": __version__,
    }
    if config.standardize_scope == "train":
        doc["split"] = [
            config.split.mode,
            config.split.seed,
            config.split.stratified,
            config.split.train_frac,
            config.split.val_frac,
            config.split.test_frac,
        ]
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class PreparedData:
    raw: RawDataset
    parse_report: ParseReport
    features: FeatureMatrix  # symmetry-broken
    symmetry_vector: np.ndarray


def prepare_features(config: ExperimentConfig) -> PreparedData:
    """Ingest and transform up to the symmetry-broken feature matrix."""
    with _stage("ingest"):
        schema = load_schema(config.schema_path)
        raw, report = parse_dataset(
            config.data_path, schema, delimiter=config.delimiter, has_header=config.has_header
        )
        logger.info(
            "parsed %d rows: kept %d, dropped %d incomplete",
            report.total_rows, report.kept_rows, report.dropped_rows,
        )
    with _stage("encode"):
        encoded = one_hot_encode(raw)
    with _stage("standardize"):
        if config.standardize_scope == "train":
            train, _, _ = holdout_indices(encoded.labels, config.split)
            params = fit_standardizer(encoded, scope="train", fit_rows=train)
        else:
            params = fit_standardizer(encoded, scope="full")
        standardized = standardize(encoded, params)
    with _stage("symmetry-break"):
        if config.symmetry_vector == "default":
            vector = default_symmetry_vector(standardized.m)
        elif config.symmetry_vector == "zero":
            vector = np.zeros(standardized.m)
        else:
            vector = np.asarray(config.symmetry_vector, dtype=np.float64)
        broken = symmetry_break(standardized, vector)
    return PreparedData(
        raw=raw, parse_report=report, features=broken, symmetry_vector=vector
    )


def _read_manifest(path: Path) -> dict | None:
    if not path.exists():
        return None
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError):
        return None


def _write_manifest(path: Path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class DiagramSet:
    diagrams: list[PersistenceDiagram]
    maxscale: float
    labels: np.ndarray
    prepared: PreparedData


def compute_diagrams(config: ExperimentConfig) -> DiagramSet:
    """Clouds and dimension-0 diagrams for every row, cache-aware."""
    fingerprint = features_fingerprint(config)
    cache_dir = config.cache_dir
    if cache_dir is not None:
        cache_dir.mkdir(parents=True, exist_ok=True)
        cache_file = cache_dir / "diagrams.csv"
        manifest_file = cache_dir / "diagrams.manifest.json"
        manifest = _read_manifest(manifest_file)
        if manifest is not None and manifest.get("fingerprint") == fingerprint:
            prepared = prepare_features(config)
            with _stage("diagrams"):
                diagrams = load_diagrams(cache_file, maxscale=manifest["maxscale"])
                logger.info("diagram cache hit: %s", cache_file)
            return DiagramSet(diagrams, manifest["maxscale"], prepared.features.labels, prepared)
        if manifest is not None:
            logger.info("diagram cache stale (fingerprint mismatch), recomputing")

    prepared = prepare_features(config)
    with _stage("clouds"):
        clouds = [
            build_point_cloud(row, source_row=i)
            for i, row in enumerate(prepared.features.values)
        ]
    with _stage("diagrams"):
        if config.maxscale is not None:
            maxscale = float(config.maxscale)
        else:
            maxscale = choose_maxscale(clouds, safety=config.maxscale_safety)
        diagrams = [rips_dim0_diagram(pairwise_distances(c), maxscale) for c in clouds]
        if cache_dir is not None:
            save_diagrams(diagrams, cache_file)
            _write_manifest(
                manifest_file,
                {
                    "fingerprint": fingerprint,
                    "maxscale": maxscale,
                    "safety": config.maxscale_safety,
                    "version": __version__,
                },
            )
    return DiagramSet(diagrams, maxscale, prepared.features.labels, prepared)


def compute_distances(config: ExperimentConfig, diagram_set: DiagramSet) -> np.ndarray:
    """Pairwise Wasserstein matrix over all rows, cache-aware."""
    fingerprint = features_fingerprint(config) + f":p={config.wasserstein_p!r}"
    cache_dir = config.cache_dir
    if cache_dir is not None:
        cache_file = cache_dir / "distances.csv"
        manifest_file = cache_dir / "distances.manifest.json"
        manifest = _read_manifest(manifest_file)
        if manifest is not None and manifest.get("fingerprint") == fingerprint:
            with _stage("distances"):
                matrix = load_distance_matrix(cache_file)
                logger.info("distance cache hit: %s", cache_file)
            if matrix.shape[0] == len(diagram_set.diagrams):
                return matrix
            logger.info("distance cache has wrong shape, recomputing")
        elif manifest is not None:
            logger.info("distance cache stale (fingerprint mismatch), recomputing")

    with _stage("distances"):
        matrix = distance_matrix(
            diagram_set.diagrams, config.wasserstein_p, threads=config.threads
        )
        if cache_dir is not None:
            cache_dir.mkdir(parents=True, exist_ok=True)
            save_distance_matrix(matrix, cache_file)
            _write_manifest(
                manifest_file,
                {
                    "fingerprint": fingerprint,
                    "maxscale": diagram_set.maxscale,
                    "p": config.wasserstein_p,
                    "version": __version__,
                },
            )
    return matrix


@dataclass
class RunResult:
    config: ExperimentConfig
    diagram_set: DiagramSet
    distances: np.ndarray
    split_result: SplitResult | None
    report: EvaluationReport
    artifacts: dict[str, Path]


def run_pipeline(config: ExperimentConfig) -> RunResult:
    """Execute the full experiment and write report artifacts."""
    diagram_set = compute_diagrams(config)
    distances = compute_distances(config, diagram_set)
    labels = diagram_set.labels

    split_result: SplitResult | None = None
    with _stage("classify"):
        if config.split.mode == "holdout":
            k_grid = [config.k] if config.k is not None else list(config.k_grid)
            split_result = evaluate_split(
                None, labels, config.split, k_grid,
                p=config.wasserstein_p, distances=distances,
            )
            report = split_result.test_report
        else:
            if config.k is not None:
                report = evaluate_kfold(
                    None, labels, config.split.folds, config.k,
                    p=config.wasserstein_p, seed=config.split.seed,
                    stratified=config.split.stratified, distances=distances,
                )
            else:
                chosen, reports = select_k_kfold(
                    None, labels, config.split.folds, config.k_grid,
                    p=config.wasserstein_p, seed=config.split.seed,
                    stratified=config.split.stratified, distances=distances,
                )
                report = next(r for r in reports if r.k == chosen)

    with _stage("report"):
        artifacts = write_artifacts(config, diagram_set, split_result, report)
    return RunResult(
        config=config,
        diagram_set=diagram_set,
        distances=distances,
        split_result=split_result,
        report=report,
        artifacts=artifacts,
    )


def write_artifacts(
    config: ExperimentConfig,
    diagram_set: DiagramSet,
    split_result: SplitResult | None,
    report: EvaluationReport,
) -> dict[str, Path]:
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    artifacts: dict[str, Path] = {}

    manifest = {
        "fingerprint": features_fingerprint(config),
        "version": __version__,
        "maxscale": diagram_set.maxscale,
        "maxscale_safety": config.maxscale_safety,
        "wasserstein_p": config.wasserstein_p,
        "split_mode": config.split.mode,
        "seed": config.split.seed,
        "stratified": config.split.stratified,
        "k": report.k,
        "rows_kept": diagram_set.prepared.parse_report.kept_rows,
        "rows_dropped": diagram_set.prepared.parse_report.dropped_rows,
    }
    _write_manifest(out / "run_manifest.json", manifest)
    artifacts["manifest"] = out / "run_manifest.json"

    title = "test set" if config.split.mode == "holdout" else f"{config.split.folds}-fold cross-validation"
    text = format_report_text(report, title=title)
    if split_result is not None:
        text += "\nvalidation sweep (k chosen = %d):\n" % split_result.chosen_k
        text += format_validation_table(split_result)
    (out / "report.txt").write_text(text, encoding="utf-8")
    artifacts["report"] = out / "report.txt"

    (out / "report.kv").write_text(format_report_kv(report), encoding="utf-8")
    artifacts["report_kv"] = out / "report.kv"

    lines = ["row,true,predicted"]
    lines += [f"{r},{t},{pr}" for r, t, pr in report.predictions]
    (out / "predictions.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    artifacts["predictions"] = out / "predictions.csv"

    if split_result is not None:
        (out / "validation.csv").write_text(
            format_validation_table(split_result), encoding="utf-8"
        )
        artifacts["validation"] = out / "validation.csv"
    return artifacts
