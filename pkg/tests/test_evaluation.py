from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_blobs
from phytosense import learn
from phytosense.errors import (ClassTooSmall, LengthMismatch, NoDays,
                               SingleClassInput)
from phytosense.evaluation import (SplitPlan, compute_daily_profile,
                                   confusion_counts, evaluate_task,
                                   holdout_split, macro_f1, minority_label,
                                   per_class_recall, pr_curve,
                                   stratified_shuffle_splits)
from phytosense.resample import SmoteConfig


class TestSplits:
    def test_proportional_counts_90_10(self):
        labels = np.array(["M"] * 90 + ["m"] * 10, dtype=object)
        for train, val in stratified_shuffle_splits(labels, SplitPlan(seed=1)):
            val_labels = labels[val]
            assert int(np.sum(val_labels == "M")) == 18
            assert int(np.sum(val_labels == "m")) == 2

    def test_minimal_two_per_class(self):
        labels = np.array(["a", "a", "b", "b"], dtype=object)
        plan = SplitPlan(seed=2, validation_fraction=0.5)
        for train, val in stratified_shuffle_splits(labels, plan):
            assert sorted(labels[val].tolist()) == ["a", "b"]
            assert sorted(labels[train].tolist()) == ["a", "b"]

    def test_union_and_disjointness_oracle(self):
        rng = np.random.default_rng(3)
        labels = np.array(rng.choice(["x", "y"], 57, p=[0.7, 0.3]), dtype=object)
        for train, val in stratified_shuffle_splits(labels, SplitPlan(seed=4)):
            assert set(train.tolist()) | set(val.tolist()) == set(range(57))
            assert set(train.tolist()) & set(val.tolist()) == set()

    def test_holdout_fixed_and_stratified(self):
        labels = np.array(["M"] * 80 + ["m"] * 20, dtype=object)
        pool, test = holdout_split(labels, 0.2, seed=5)
        assert int(np.sum(labels[test] == "M")) == 16
        assert int(np.sum(labels[test] == "m")) == 4
        pool2, test2 = holdout_split(labels, 0.2, seed=5)
        np.testing.assert_array_equal(test, test2)

    def test_class_too_small(self):
        labels = np.array(["a", "a", "b"], dtype=object)
        with pytest.raises(ClassTooSmall):
            stratified_shuffle_splits(labels, SplitPlan(seed=6))


def brute_force_confusion(y_true, y_pred, cls):
    tp = fp = fn = tn = 0
    for t, p in zip(y_true, y_pred):
        if t == cls and p == cls:
            tp += 1
        elif t != cls and p == cls:
            fp += 1
        elif t == cls:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def brute_force_macro_f1(y_true, y_pred, classes):
    f1s = []
    for cls in classes:
        tp, fp, fn, _ = brute_force_confusion(y_true, y_pred, cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * precision * recall / (precision + recall)
                   if precision + recall else 0.0)
    return 100.0 * sum(f1s) / len(f1s)


class TestMacroF1:
    def test_perfect_is_100(self):
        y = np.array(["a", "b", "a", "b"], dtype=object)
        assert macro_f1(y, y) == 100.0

    def test_all_majority_on_90_10(self):
        y_true = np.array(["M"] * 90 + ["m"] * 10, dtype=object)
        y_pred = np.array(["M"] * 100, dtype=object)
        expected = 100.0 * (2 * 0.9 * 1.0 / 1.9) / 2  # minority F1 = 0
        assert abs(macro_f1(y_true, y_pred) - expected) < 1e-9
        assert abs(expected - 47.368421052631575) < 1e-9

    def test_matches_brute_force_on_random_cases(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            y_true = np.array(rng.choice(["a", "b"], 50), dtype=object)
            y_pred = np.array(rng.choice(["a", "b"], 50), dtype=object)
            if len(set(y_true)) < 2:
                continue
            assert macro_f1(y_true, y_pred, ["a", "b"]) == \
                brute_force_macro_f1(y_true, y_pred, ["a", "b"])

    def test_class_swap_symmetry(self):
        rng = np.random.default_rng(8)
        y_true = np.array(rng.choice(["a", "b"], 60), dtype=object)
        y_pred = np.array(rng.choice(["a", "b"], 60), dtype=object)
        swap = {"a": "b", "b": "a"}
        swapped_true = np.array([swap[v] for v in y_true], dtype=object)
        swapped_pred = np.array([swap[v] for v in y_pred], dtype=object)
        assert macro_f1(y_true, y_pred) == macro_f1(swapped_true, swapped_pred)

    def test_balanced_symmetric_equals_accuracy(self):
        y_true = np.array(["a"] * 10 + ["b"] * 10, dtype=object)
        y_pred = y_true.copy()
        y_pred[0], y_pred[10] = "b", "a"  # one symmetric error each way
        accuracy = 100.0 * float(np.mean(y_true == y_pred))
        assert abs(macro_f1(y_true, y_pred) - accuracy) < 1e-9

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            macro_f1(np.array(["a"]), np.array(["a", "b"]))

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.sampled_from(["a", "b"]), min_size=2, max_size=40),
           st.lists(st.sampled_from(["a", "b"]), min_size=2, max_size=40))
    def test_hypothesis_matches_brute_force(self, true_list, pred_list):
        n = min(len(true_list), len(pred_list))
        y_true = np.array(true_list[:n], dtype=object)
        y_pred = np.array(pred_list[:n], dtype=object)
        assert macro_f1(y_true, y_pred, ["a", "b"]) == \
            brute_force_macro_f1(y_true, y_pred, ["a", "b"])


class TestRecall:
    def test_spec_confusion_case(self):
        # 100 minority rows: 72 recalled; majority predicted perfectly
        y_true = np.array(["w"] * 100 + ["c"] * 100, dtype=object)
        y_pred = np.array(["w"] * 72 + ["c"] * 28 + ["c"] * 100, dtype=object)
        recalls = per_class_recall(y_true, y_pred)
        assert recalls["w"] == 0.72
        assert recalls["c"] == 1.0

    def test_perfect_and_degenerate(self):
        y = np.array(["m"] * 5 + ["M"] * 15, dtype=object)
        assert per_class_recall(y, y) == {"M": 1.0, "m": 1.0}
        all_major = np.array(["M"] * 20, dtype=object)
        assert per_class_recall(y, all_major) == {"M": 1.0, "m": 0.0}

    def test_counting_oracle_random_200(self):
        rng = np.random.default_rng(9)
        y_true = np.array(rng.choice(["a", "b"], 200), dtype=object)
        y_pred = np.array(rng.choice(["a", "b"], 200), dtype=object)
        recalls = per_class_recall(y_true, y_pred, ["a", "b"])
        for cls in ("a", "b"):
            tp, _, fn, _ = brute_force_confusion(y_true, y_pred, cls)
            assert recalls[cls] == tp / (tp + fn)


def brute_force_pr_auc(y_true, scores, positive):
    """Exhaustive threshold enumeration with the same step arithmetic."""
    n_pos = sum(1 for t in y_true if t == positive)
    points = [(1.0, 0.0)]
    for threshold in sorted(set(scores), reverse=True):
        tp = sum(1 for t, s in zip(y_true, scores) if s >= threshold and t == positive)
        fp = sum(1 for t, s in zip(y_true, scores) if s >= threshold and t != positive)
        points.append((tp / (tp + fp), tp / n_pos))
    auc = 0.0
    prev = 0.0
    for precision, recall in points[1:]:
        auc += (recall - prev) * precision
        prev = recall
    return auc


class TestPRCurve:
    def test_perfect_scorer(self):
        y = np.array(["n"] * 4 + ["p"] * 3, dtype=object)
        scores = np.array([0.1, 0.2, 0.3, 0.4, 0.8, 0.9, 0.7])
        _, auc = pr_curve(y, scores, "p")
        assert auc == 1.0

    def test_constant_scores_degenerate(self):
        y = np.array(["n"] * 8 + ["p"] * 2, dtype=object)
        points, auc = pr_curve(y, np.full(10, 0.5), "p")
        assert len(points) == 2  # anchor + single operating point
        assert points[1][1] == 0.2 and points[1][2] == 1.0
        assert auc == 0.2  # prevalence

    def test_six_sample_toy_matches_enumeration(self):
        scores = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4]
        y = np.array(["p", "p", "n", "p", "n", "n"], dtype=object)
        _, auc = pr_curve(y, np.array(scores), "p")
        assert auc == brute_force_pr_auc(y.tolist(), scores, "p")

    def test_random_cases_match_enumeration_exactly(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            n = int(rng.integers(4, 21))
            y = np.array(rng.choice(["p", "n"], n), dtype=object)
            if len(set(y.tolist())) < 2:
                continue
            scores = rng.choice([0.1, 0.25, 0.5, 0.5, 0.75, 0.9], n)
            _, auc = pr_curve(y, scores, "p")
            assert auc == brute_force_pr_auc(y.tolist(), scores.tolist(), "p")

    def test_monotone_score_transform_invariance(self):
        rng = np.random.default_rng(11)
        y = np.array(rng.choice(["p", "n"], 30), dtype=object)
        scores = rng.uniform(size=30)
        _, auc_raw = pr_curve(y, scores, "p")
        _, auc_exp = pr_curve(y, np.exp(3 * scores), "p")
        assert abs(auc_raw - auc_exp) < 1e-12

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassInput):
            pr_curve(np.array(["p", "p"], dtype=object), np.array([0.1, 0.2]), "p")

    def test_points_sorted_by_descending_threshold(self):
        rng = np.random.default_rng(12)
        y = np.array(rng.choice(["p", "n"], 25), dtype=object)
        points, _ = pr_curve(y, rng.uniform(size=25), "p")
        thresholds = [p[0] for p in points]
        assert thresholds == sorted(thresholds, reverse=True)


class TestDailyProfile:
    def test_single_day(self):
        day = np.arange(86_400, dtype=float)
        profile = compute_daily_profile([day])
        np.testing.assert_array_equal(profile.mean, day)
        np.testing.assert_array_equal(profile.std, np.zeros(86_400))

    def test_negation_pair(self):
        rng = np.random.default_rng(13)
        day = rng.normal(size=86_400)
        profile = compute_daily_profile([day, -day])
        np.testing.assert_allclose(profile.mean, 0.0, atol=1e-12)
        np.testing.assert_allclose(profile.std, np.abs(day), atol=1e-12)

    def test_six_days_match_naive_double_loop(self):
        rng = np.random.default_rng(14)
        days = [rng.normal(size=86_400) for _ in range(6)]
        profile = compute_daily_profile(days)
        stacked = np.vstack(days)
        for second in range(0, 86_400, 4321):  # sampled columns, loop oracle
            column = [stacked[d][second] for d in range(6)]
            mean = sum(column) / 6
            var = sum((v - mean) ** 2 for v in column) / 6
            assert abs(profile.mean[second] - mean) < 1e-12
            assert abs(profile.std[second] - var ** 0.5) < 1e-12

    def test_no_days(self):
        with pytest.raises(NoDays):
            compute_daily_profile([])

    def test_unequal_lengths_rejected(self):
        with pytest.raises(ValueError):
            compute_daily_profile([np.zeros(10), np.zeros(11)])


class TestEvaluateTask:
    def test_report_fields_and_baseline(self):
        X, y = make_blobs(n_a=40, n_b=15, d=5, gap=4.0, seed=15)
        report = evaluate_task(X, y, learn.ClassifierSpec("random_forest",
                                                          {"n_trees": 16}, 0),
                               plan=SplitPlan(seed=7),
                               smote_cfg=SmoteConfig(rng_seed=7), task="toy")
        assert report.positive_label == "b"
        n_pos_test = report.confusion["b"]["tp"] + report.confusion["b"]["fn"]
        assert report.baseline == (n_pos_test / 10) / report.n_test
        assert report.test_macro_f1_mean == 100.0
        assert len(report.val_macro_f1_per_split) == 10
        assert 0 < report.baseline < 1
        # reported std is the population std of the per-split scores
        assert report.val_macro_f1_std == float(
            np.std(report.val_macro_f1_per_split))
        assert report.test_macro_f1_std == float(
            np.std(report.test_macro_f1_per_split))

    def test_minority_label_tie_break(self):
        y = np.array(["a", "a", "b", "b"], dtype=object)
        assert minority_label(y) == "b"

    def test_confusion_sums(self):
        y_true = np.array(["a", "a", "b"], dtype=object)
        y_pred = np.array(["a", "b", "b"], dtype=object)
        counts = confusion_counts(y_true, y_pred)
        assert counts["a"] == {"tp": 1, "fp": 0, "fn": 1, "tn": 1}
        assert counts["b"] == {"tp": 1, "fp": 1, "fn": 0, "tn": 1}
