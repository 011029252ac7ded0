"""Experiment harness: splits, k selection, cross-validation, and metrics.

Splits are seeded shuffles (optionally stratified). Hold-out sizing puts
the rounding remainder in the training set: floor(val_frac*n) and
floor(test_frac*n) rows go to validation and test, the rest to training,
which reproduces the 179/59/59 partition of 297 rows at 60:20:20.
Metrics are kept at full precision internally; rounding happens only in
the text formatters. Undefined ratios (zero denominators) are reported as
None, never NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .classify import knn_predict
from .errors import ContractError, EvaluationError
from .metric import distance_matrix
from .persistence import PersistenceDiagram


@dataclass(frozen=True)
class SplitSpec:
    """How to partition rows: seeded hold-out fractions or k folds."""

    mode: Literal["holdout", "kfold"] = "holdout"
    seed: int = 0
    stratified: bool = False
    train_frac: float = 0.6
    val_frac: float = 0.2
    test_frac: float = 0.2
    folds: int = 10

    def __post_init__(self):
        if self.mode == "holdout":
            total = self.train_frac + self.val_frac + self.test_frac
            if abs(total - 1.0) > 1e-9:
                raise ContractError(f"hold-out fractions sum to {total}, expected 1")
            if min(self.train_frac, self.val_frac, self.test_frac) <= 0:
                raise ContractError("hold-out fractions must be positive")
        elif self.mode == "kfold":
            if self.folds < 2:
                raise ContractError("kfold needs folds >= 2")
        else:
            raise ContractError(f"unknown split mode {self.mode!r}")


def _per_class_indices(labels: np.ndarray) -> list[np.ndarray]:
    return [np.flatnonzero(labels == cls) for cls in sorted(set(labels.tolist()))]


def holdout_indices(
    labels: np.ndarray, spec: SplitSpec
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Disjoint (train, val, test) row-index arrays covering all rows."""
    if spec.mode != "holdout":
        raise ContractError("holdout_indices needs a holdout SplitSpec")
    labels = np.asarray(labels)
    rng = np.random.default_rng(spec.seed)

    def carve(indices: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        perm = rng.permutation(indices)
        n = perm.size
        n_val = int(np.floor(spec.val_frac * n))
        n_test = int(np.floor(spec.test_frac * n))
        n_train = n - n_val - n_test
        return perm[:n_train], perm[n_train : n_train + n_val], perm[n_train + n_val :]

    if spec.stratified:
        parts = [carve(idx) for idx in _per_class_indices(labels)]
        train = np.concatenate([p[0] for p in parts])
        val = np.concatenate([p[1] for p in parts])
        test = np.concatenate([p[2] for p in parts])
    else:
        train, val, test = carve(np.arange(labels.size))
    return np.sort(train), np.sort(val), np.sort(test)


def kfold_indices(labels: np.ndarray, spec: SplitSpec) -> list[np.ndarray]:
    """Seeded fold assignment; every row lands in exactly one fold."""
    if spec.mode != "kfold":
        raise ContractError("kfold_indices needs a kfold SplitSpec")
    labels = np.asarray(labels)
    if spec.folds > labels.size:
        raise EvaluationError(f"cannot split {labels.size} rows into {spec.folds} folds")
    rng = np.random.default_rng(spec.seed)
    if spec.stratified:
        buckets: list[list[int]] = [[] for _ in range(spec.folds)]
        offset = 0
        for idx in _per_class_indices(labels):
            for j, row in enumerate(rng.permutation(idx)):
                buckets[(offset + j) % spec.folds].append(int(row))
            offset += idx.size
        folds = [np.asarray(b, dtype=np.intp) for b in buckets]
    else:
        folds = np.array_split(rng.permutation(labels.size), spec.folds)
    return [np.sort(f) for f in folds]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @staticmethod
    def from_predictions(y_true: np.ndarray, y_pred: np.ndarray) -> "ConfusionCounts":
        y_true = np.asarray(y_true)
        y_pred = np.asarray(y_pred)
        return ConfusionCounts(
            tp=int(((y_true == 1) & (y_pred == 1)).sum()),
            tn=int(((y_true == 0) & (y_pred == 0)).sum()),
            fp=int(((y_true == 0) & (y_pred == 1)).sum()),
            fn=int(((y_true == 1) & (y_pred == 0)).sum()),
        )


@dataclass(frozen=True)
class EvaluationReport:
    """Confusion counts plus derived percentages (full precision, None = n/a)."""

    counts: ConfusionCounts
    accuracy: float
    sensitivity: float | None
    specificity: float | None
    precision_class0: float | None
    precision_class1: float | None
    f1_class0: float | None
    f1_class1: float | None
    k: int
    seed: int | None = None
    fold_accuracies: tuple[float, ...] = ()
    predictions: tuple[tuple[int, int, int], ...] = ()  # (row, true, predicted)


def _pct(numerator: float, denominator: float) -> float | None:
    if denominator == 0:
        return None
    return 100.0 * numerator / denominator


def _f1(precision: float | None, recall: float | None) -> float | None:
    if precision is None or recall is None or precision + recall == 0:
        return None
    return 2.0 * precision * recall / (precision + recall)


def compute_metrics(
    counts: ConfusionCounts,
    k: int,
    seed: int | None = None,
    fold_accuracies: Sequence[float] = (),
    predictions: Sequence[tuple[int, int, int]] = (),
) -> EvaluationReport:
    """Standard binary-classification metrics from confusion counts."""
    if counts.total <= 0:
        raise ContractError("metrics need at least one prediction")
    sens = _pct(counts.tp, counts.tp + counts.fn)
    spec = _pct(counts.tn, counts.tn + counts.fp)
    prec1 = _pct(counts.tp, counts.tp + counts.fp)
    prec0 = _pct(counts.tn, counts.tn + counts.fn)
    return EvaluationReport(
        counts=counts,
        accuracy=100.0 * (counts.tp + counts.tn) / counts.total,
        sensitivity=sens,
        specificity=spec,
        precision_class0=prec0,
        precision_class1=prec1,
        f1_class0=_f1(prec0, spec),
        f1_class1=_f1(prec1, sens),
        k=k,
        seed=seed,
        fold_accuracies=tuple(fold_accuracies),
        predictions=tuple(predictions),
    )


def _predict_rows(
    rows: np.ndarray,
    candidates: np.ndarray,
    distances: np.ndarray,
    labels: np.ndarray,
    k: int,
) -> np.ndarray:
    return np.asarray(
        [knn_predict(int(r), candidates, distances, labels, k) for r in rows],
        dtype=np.int64,
    )


def _require_both_classes(labels: np.ndarray, where: str) -> None:
    present = set(np.asarray(labels).tolist())
    if not {0, 1} <= present:
        missing = sorted({0, 1} - present)
        raise EvaluationError(f"degenerate split: {where} lacks class(es) {missing}")


@dataclass(frozen=True)
class ValidationRow:
    """One k's metrics on the validation set."""

    k: int
    accuracy: float
    sensitivity: float | None
    specificity: float | None


@dataclass(frozen=True)
class SplitResult:
    chosen_k: int
    validation: tuple[ValidationRow, ...]
    test_report: EvaluationReport
    train_rows: tuple[int, ...]
    val_rows: tuple[int, ...]
    test_rows: tuple[int, ...]


def evaluate_split(
    diagrams: Sequence[PersistenceDiagram] | None,
    labels: np.ndarray,
    split: SplitSpec,
    k_grid: Sequence[int],
    p: float = 1.0,
    distances: np.ndarray | None = None,
    threads: int = 1,
) -> SplitResult:
    """Hold-out protocol: sweep k on validation, report the winner on test.

    k is chosen to maximize validation accuracy, ties going to the smaller
    k. Pass a precomputed ``distances`` matrix to skip recomputation.
    """
    labels = np.asarray(labels)
    if distances is None:
        if diagrams is None:
            raise ContractError("need diagrams or a precomputed distance matrix")
        distances = distance_matrix(diagrams, p, threads=threads)
    k_grid = list(k_grid)
    if not k_grid or min(k_grid) < 1:
        raise ContractError("k grid must be non-empty positive integers")

    train, val, test = holdout_indices(labels, split)
    _require_both_classes(labels[train], "training set")
    if max(k_grid) > train.size:
        raise ContractError(f"k grid exceeds training size {train.size}")

    table = []
    for k in sorted(k_grid):
        preds = _predict_rows(val, train, distances, labels, k)
        counts = ConfusionCounts.from_predictions(labels[val], preds)
        table.append(
            ValidationRow(
                k=k,
                accuracy=100.0 * (counts.tp + counts.tn) / counts.total,
                sensitivity=_pct(counts.tp, counts.tp + counts.fn),
                specificity=_pct(counts.tn, counts.tn + counts.fp),
            )
        )
    chosen = max(table, key=lambda r: (r.accuracy, -r.k)).k

    test_preds = _predict_rows(test, train, distances, labels, chosen)
    counts = ConfusionCounts.from_predictions(labels[test], test_preds)
    report = compute_metrics(
        counts,
        k=chosen,
        seed=split.seed,
        predictions=[(int(r), int(labels[r]), int(pr)) for r, pr in zip(test, test_preds)],
    )
    return SplitResult(
        chosen_k=chosen,
        validation=tuple(table),
        test_report=report,
        train_rows=tuple(int(i) for i in train),
        val_rows=tuple(int(i) for i in val),
        test_rows=tuple(int(i) for i in test),
    )


def evaluate_kfold(
    diagrams: Sequence[PersistenceDiagram] | None,
    labels: np.ndarray,
    folds: int,
    k: int,
    p: float = 1.0,
    seed: int = 0,
    stratified: bool = False,
    distances: np.ndarray | None = None,
    threads: int = 1,
) -> EvaluationReport:
    """k-fold cross-validation with pooled confusion counts.

    Every row is classified exactly once, against all rows outside its
    fold; per-fold accuracies are kept in the report for the breakdown.
    """
    labels = np.asarray(labels)
    if distances is None:
        if diagrams is None:
            raise ContractError("need diagrams or a precomputed distance matrix")
        distances = distance_matrix(diagrams, p, threads=threads)
    _require_both_classes(labels, "dataset")

    spec = SplitSpec(mode="kfold", folds=folds, seed=seed, stratified=stratified)
    fold_sets = kfold_indices(labels, spec)
    all_rows = np.arange(labels.size)
    predictions: list[tuple[int, int, int]] = []
    fold_accuracies = []
    for fold in fold_sets:
        candidates = np.setdiff1d(all_rows, fold)
        if candidates.size == 0:
            raise EvaluationError("fold without candidates")
        if candidates.size < k:
            raise EvaluationError(
                f"fold leaves only {candidates.size} candidates for k={k}"
            )
        preds = _predict_rows(fold, candidates, distances, labels, k)
        correct = (preds == labels[fold]).sum()
        fold_accuracies.append(100.0 * correct / fold.size if fold.size else 0.0)
        predictions.extend(
            (int(r), int(labels[r]), int(pr)) for r, pr in zip(fold, preds)
        )
    predictions.sort()
    y_true = np.asarray([t for _, t, _ in predictions])
    y_pred = np.asarray([pr for _, _, pr in predictions])
    counts = ConfusionCounts.from_predictions(y_true, y_pred)
    return compute_metrics(
        counts, k=k, seed=seed, fold_accuracies=fold_accuracies, predictions=predictions
    )


def select_k_kfold(
    diagrams: Sequence[PersistenceDiagram] | None,
    labels: np.ndarray,
    folds: int,
    k_grid: Sequence[int],
    p: float = 1.0,
    seed: int = 0,
    stratified: bool = False,
    distances: np.ndarray | None = None,
    threads: int = 1,
) -> tuple[int, list[EvaluationReport]]:
    """Choose k by pooled cross-validation accuracy (ties to the smaller k)."""
    labels = np.asarray(labels)
    if distances is None:
        if diagrams is None:
            raise ContractError("need diagrams or a precomputed distance matrix")
        distances = distance_matrix(diagrams, p, threads=threads)
    reports = [
        evaluate_kfold(
            None, labels, folds, k, p, seed=seed, stratified=stratified, distances=distances
        )
        for k in sorted(set(int(k) for k in k_grid))
    ]
    best = max(reports, key=lambda r: (r.accuracy, -r.k))
    return best.k, reports


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def format_report_text(report: EvaluationReport, title: str = "evaluation") -> str:
    """Human-readable summary table (percentages rounded to 2 decimals)."""
    c = report.counts
    lines = [
        f"== {title} (k={report.k}"
        + (f", seed={report.seed}" if report.seed is not None else "")
        + ") ==",
        f"rows: {c.total}   TP={c.tp} TN={c.tn} FP={c.fp} FN={c.fn}",
        f"accuracy:    {_fmt(report.accuracy)}%",
        f"sensitivity: {_fmt(report.sensitivity)}%",
        f"specificity: {_fmt(report.specificity)}%",
        f"precision:   class0 {_fmt(report.precision_class0)}%  class1 {_fmt(report.precision_class1)}%",
        f"F1:          class0 {_fmt(report.f1_class0)}%  class1 {_fmt(report.f1_class1)}%",
    ]
    if report.fold_accuracies:
        folds = " ".join(f"{a:.2f}" for a in report.fold_accuracies)
        lines.append(f"fold accuracies: {folds}")
    return "\n".join(lines) + "\n"


def format_report_kv(report: EvaluationReport) -> str:
    """Machine-readable ``name=value`` lines, one metric per line."""
    c = report.counts
    kv = [
        ("k", report.k),
        ("seed", report.seed if report.seed is not None else ""),
        ("rows", c.total),
        ("tp", c.tp),
        ("tn", c.tn),
        ("fp", c.fp),
        ("fn", c.fn),
        ("accuracy", _fmt_raw(report.accuracy)),
        ("sensitivity", _fmt_raw(report.sensitivity)),
        ("specificity", _fmt_raw(report.specificity)),
        ("precision_class0", _fmt_raw(report.precision_class0)),
        ("precision_class1", _fmt_raw(report.precision_class1)),
        ("f1_class0", _fmt_raw(report.f1_class0)),
        ("f1_class1", _fmt_raw(report.f1_class1)),
    ]
    lines = [f"{name}={value}" for name, value in kv]
    for i, acc in enumerate(report.fold_accuracies):
        lines.append(f"fold{i}_accuracy={_fmt_raw(acc)}")
    return "\n".join(lines) + "\n"


def _fmt_raw(value: float | None) -> str:
    return "n/a" if value is None else repr(float(value))


def format_validation_table(result: SplitResult) -> str:
    """Per-k validation metrics table for the hold-out protocol."""
    lines = ["k,accuracy,sensitivity,specificity"]
    for row in result.validation:
        lines.append(
            f"{row.k},{_fmt_raw(row.accuracy)},{_fmt_raw(row.sensitivity)},{_fmt_raw(row.specificity)}"
        )
    return "\n".join(lines) + "\n"
