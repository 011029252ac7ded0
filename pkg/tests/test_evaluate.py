import numpy as np
import pytest

from topmix.errors import ContractError, EvaluationError
from topmix.evaluate import (
    ConfusionCounts,
    SplitSpec,
    compute_metrics,
    evaluate_kfold,
    evaluate_split,
    format_report_kv,
    format_report_text,
    holdout_indices,
    kfold_indices,
    select_k_kfold,
)
from topmix.metric import distance_matrix
from topmix.persistence import PersistenceDiagram


def _diag(pairs, cap=50.0):
    return PersistenceDiagram(np.asarray(pairs, dtype=np.float64).reshape(-1, 2), maxscale=cap)


class TestHoldout:
    def test_sizes_179_59_59(self):
        labels = np.zeros(297, dtype=int)
        labels[150:] = 1
        for seed in range(5):
            train, val, test = holdout_indices(labels, SplitSpec(seed=seed))
            assert (train.size, val.size, test.size) == (179, 59, 59)

    def test_partition_covers_and_disjoint(self):
        labels = np.zeros(100, dtype=int)
        train, val, test = holdout_indices(labels, SplitSpec(seed=3))
        combined = np.concatenate([train, val, test])
        assert sorted(combined.tolist()) == list(range(100))

    def test_seed_determinism(self):
        labels = np.zeros(50, dtype=int)
        a = holdout_indices(labels, SplitSpec(seed=9))
        b = holdout_indices(labels, SplitSpec(seed=9))
        c = holdout_indices(labels, SplitSpec(seed=10))
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
        assert any(not np.array_equal(x, y) for x, y in zip(a, c))

    def test_stratified_preserves_class_fractions(self):
        labels = np.array([0] * 160 + [1] * 137)
        train, val, test = holdout_indices(labels, SplitSpec(seed=0, stratified=True))
        assert (train.size, val.size, test.size) == (179, 59, 59)
        assert (labels[val] == 0).sum() == 32 and (labels[val] == 1).sum() == 27
        assert (labels[test] == 0).sum() == 32 and (labels[test] == 1).sum() == 27

    def test_fraction_validation(self):
        with pytest.raises(ContractError):
            SplitSpec(train_frac=0.5, val_frac=0.2, test_frac=0.2)


class TestKfold:
    def test_folds_partition_rows(self):
        labels = np.zeros(47, dtype=int)
        folds = kfold_indices(labels, SplitSpec(mode="kfold", folds=10, seed=1))
        combined = np.concatenate(folds)
        assert sorted(combined.tolist()) == list(range(47))
        sizes = sorted(f.size for f in folds)
        assert sizes == [4] * 3 + [5] * 7

    def test_stratified_folds(self):
        labels = np.array([0] * 30 + [1] * 20)
        folds = kfold_indices(labels, SplitSpec(mode="kfold", folds=5, seed=2, stratified=True))
        for fold in folds:
            assert (labels[fold] == 0).sum() == 6
            assert (labels[fold] == 1).sum() == 4

    def test_too_many_folds(self):
        with pytest.raises(EvaluationError):
            kfold_indices(np.zeros(3, dtype=int), SplitSpec(mode="kfold", folds=5))


class TestComputeMetrics:
    def test_integer_counts_consistent_with_reported_table(self):
        # 59 test rows: TP=24 FN=3 TN=29 FP=3 reproduces all seven headline figures
        report = compute_metrics(ConfusionCounts(tp=24, tn=29, fp=3, fn=3), k=5)
        assert f"{report.accuracy:.2f}" == "89.83"
        assert f"{report.sensitivity:.2f}" == "88.89"
        assert f"{report.specificity:.2f}" == "90.62"
        assert f"{report.precision_class0:.2f}" == "90.62"
        assert f"{report.precision_class1:.2f}" == "88.89"
        assert f"{report.f1_class0:.2f}" == "90.62"
        assert f"{report.f1_class1:.2f}" == "88.89"

    def test_perfect_predictor(self):
        report = compute_metrics(ConfusionCounts(tp=1, tn=1, fp=0, fn=0), k=1)
        for value in (
            report.accuracy,
            report.sensitivity,
            report.specificity,
            report.precision_class0,
            report.precision_class1,
            report.f1_class0,
            report.f1_class1,
        ):
            assert value == 100.0

    def test_degenerate_predictor_reports_not_applicable(self):
        # everything predicted negative while positives exist
        report = compute_metrics(ConfusionCounts(tp=0, tn=5, fp=0, fn=5), k=1)
        assert report.sensitivity == 0.0
        assert report.precision_class1 is None
        assert report.f1_class1 is None
        assert "n/a" in format_report_text(report)
        assert "precision_class1=n/a" in format_report_kv(report)

    def test_empty_counts_rejected(self):
        with pytest.raises(ContractError):
            compute_metrics(ConfusionCounts(0, 0, 0, 0), k=1)

    def test_metrics_recomputable_from_counts(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            tp, tn, fp, fn = (int(v) for v in rng.integers(0, 30, size=4))
            if tp + tn + fp + fn == 0:
                continue
            counts = ConfusionCounts(tp, tn, fp, fn)
            report = compute_metrics(counts, k=1)
            assert report.accuracy == pytest.approx(100 * (tp + tn) / counts.total)
            if tp + fn:
                assert report.sensitivity == pytest.approx(100 * tp / (tp + fn))
            if tn + fp:
                assert report.specificity == pytest.approx(100 * tn / (tn + fp))


def _duplicated_diagram_set():
    """10 rows: two distinct diagrams, 5 exact copies each, labels matching."""
    a = _diag([[0.0, 1.0], [0.0, 50.0]])
    b = _diag([[0.0, 7.0], [0.0, 50.0]])
    diagrams = [a] * 5 + [b] * 5
    labels = np.array([0] * 5 + [1] * 5)
    return diagrams, labels


class TestEvaluateSplit:
    def test_duplicates_classify_perfectly_with_k1(self):
        diagrams, labels = _duplicated_diagram_set()
        for seed in range(5):
            result = evaluate_split(diagrams, labels, SplitSpec(seed=seed), k_grid=[1])
            assert result.chosen_k == 1
            assert result.test_report.accuracy == 100.0

    def test_chooses_k_with_best_validation_accuracy(self):
        diagrams, labels = _duplicated_diagram_set()
        result = evaluate_split(diagrams, labels, SplitSpec(seed=0), k_grid=[1, 3, 5])
        accs = {row.k: row.accuracy for row in result.validation}
        best = max(accs.values())
        assert accs[result.chosen_k] == best
        assert result.chosen_k == min(k for k, acc in accs.items() if acc == best)

    def test_partition_recorded(self):
        diagrams, labels = _duplicated_diagram_set()
        result = evaluate_split(diagrams, labels, SplitSpec(seed=1), k_grid=[1])
        rows = sorted(result.train_rows + result.val_rows + result.test_rows)
        assert rows == list(range(10))
        assert len(result.test_report.predictions) == len(result.test_rows)

    def test_single_class_train_is_degenerate(self):
        diagrams = [_diag([[0.0, float(i + 1)]]) for i in range(10)]
        labels = np.zeros(10, dtype=int)
        with pytest.raises(EvaluationError, match="degenerate"):
            evaluate_split(diagrams, labels, SplitSpec(seed=0), k_grid=[1])

    def test_k_grid_validation(self):
        diagrams, labels = _duplicated_diagram_set()
        with pytest.raises(ContractError):
            evaluate_split(diagrams, labels, SplitSpec(seed=0), k_grid=[])
        with pytest.raises(ContractError):
            evaluate_split(diagrams, labels, SplitSpec(seed=0), k_grid=[99])

    def test_precomputed_distances_short_circuit(self):
        diagrams, labels = _duplicated_diagram_set()
        distances = distance_matrix(diagrams, 1.0)
        a = evaluate_split(None, labels, SplitSpec(seed=2), k_grid=[1, 3], distances=distances)
        b = evaluate_split(diagrams, labels, SplitSpec(seed=2), k_grid=[1, 3])
        assert a == b


class TestEvaluateKfold:
    def test_identical_diagrams_opposite_labels_score_zero(self):
        d = _diag([[0.0, 3.0]])
        labels = np.array([0, 1])
        report = evaluate_kfold([d, d], labels, folds=2, k=1)
        assert report.accuracy == 0.0

    def test_leave_one_out_pools_all_rows(self):
        diagrams, labels = _duplicated_diagram_set()
        report = evaluate_kfold(diagrams, labels, folds=10, k=1)
        assert report.counts.total == 10
        assert len(report.predictions) == 10
        assert len(report.fold_accuracies) == 10
        assert report.accuracy == 100.0

    def test_every_row_predicted_once(self):
        diagrams, labels = _duplicated_diagram_set()
        report = evaluate_kfold(diagrams, labels, folds=3, k=2, seed=4)
        assert sorted(r for r, _, _ in report.predictions) == list(range(10))

    def test_k_exceeding_candidates_is_error(self):
        d = _diag([[0.0, 1.0]])
        labels = np.array([0, 1, 0, 1])
        with pytest.raises(EvaluationError, match="candidates"):
            evaluate_kfold([d] * 4, labels, folds=2, k=3)

    def test_seed_determinism(self):
        diagrams, labels = _duplicated_diagram_set()
        a = evaluate_kfold(diagrams, labels, folds=5, k=3, seed=7)
        b = evaluate_kfold(diagrams, labels, folds=5, k=3, seed=7)
        assert a == b


class TestSelectKKfold:
    def test_returns_best_pooled_accuracy(self):
        diagrams, labels = _duplicated_diagram_set()
        chosen, reports = select_k_kfold(diagrams, labels, folds=5, k_grid=[1, 3, 5], seed=0)
        accs = {r.k: r.accuracy for r in reports}
        best = max(accs.values())
        assert accs[chosen] == best
        assert chosen == min(k for k, a in accs.items() if a == best)


def test_monotone_distance_invariance_end_to_end():
    diagrams, labels = _duplicated_diagram_set()
    distances = distance_matrix(diagrams, 1.0)
    warped = np.sqrt(distances)
    for seed in range(3):
        base = evaluate_split(None, labels, SplitSpec(seed=seed), k_grid=[1, 3, 5], distances=distances)
        same = evaluate_split(None, labels, SplitSpec(seed=seed), k_grid=[1, 3, 5], distances=warped)
        assert base.chosen_k == same.chosen_k
        assert [p for p in base.test_report.predictions] == [p for p in same.test_report.predictions]
