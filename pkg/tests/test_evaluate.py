"""Metrics, kappa, fold assignment, baselines, and curve tests."""

import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from satdlink.evaluate import (
    CurveRow,
    cohens_kappa,
    cross_validate,
    landis_koch_band,
    learning_curve,
    precision_recall_f1,
    random_baseline,
    stratified_kfold,
)
from satdlink.model import CLASS_ORDER, RelationLabel
from satdlink.nn import TrainConfig
from satdlink.pairs import TokenizerConfig
from satdlink.synthetic import generate_synthetic_pairs

LABELS = list(CLASS_ORDER)


def naive_metrics(predictions, gold):
    """Independent oracle: per-class tallies via explicit dict counting."""
    out = {}
    for cls in LABELS:
        tp = fp = fn = 0
        for p, g in zip(predictions, gold):
            if p is cls and g is cls:
                tp += 1
            elif p is cls:
                fp += 1
            elif g is cls:
                fn += 1
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out[cls] = (precision, recall, f1, tp + fn)
    return out


class TestMetrics:
    def test_against_naive_oracle(self):
        rng = random.Random(99)
        for _ in range(200):
            n = rng.randint(1, 60)
            predictions = [rng.choice(LABELS) for _ in range(n)]
            gold = [rng.choice(LABELS) for _ in range(n)]
            result = precision_recall_f1(predictions, gold)
            expected = naive_metrics(predictions, gold)
            for cls in LABELS:
                m = result.per_class[cls]
                p, r, f, support = expected[cls]
                assert m.precision == p
                assert m.recall == r
                assert m.f1 == pytest.approx(f, abs=1e-12)
                assert m.support == support

    def test_f1_frozen_example(self):
        # duplication: tp=12, fp=3, fn=8 -> P=0.8, R=0.6
        predictions = [RelationLabel.DUPLICATION] * 15 + [RelationLabel.NONE] * 8
        gold = (
            [RelationLabel.DUPLICATION] * 12
            + [RelationLabel.NONE] * 3
            + [RelationLabel.DUPLICATION] * 8
        )
        m = precision_recall_f1(predictions, gold).per_class[RelationLabel.DUPLICATION]
        assert m.precision == 0.8
        assert m.recall == 0.6
        assert m.f1 == pytest.approx(0.6857142857142857, abs=1e-12)

    def test_zero_division_gives_zero(self):
        predictions = [RelationLabel.NONE, RelationLabel.NONE]
        gold = [RelationLabel.NONE, RelationLabel.DUPLICATION]
        result = precision_recall_f1(predictions, gold)
        dup = result.per_class[RelationLabel.DUPLICATION]
        assert (dup.precision, dup.recall, dup.f1) == (0.0, 0.0, 0.0)
        rep = result.per_class[RelationLabel.REPAYMENT]
        assert (rep.precision, rep.recall, rep.f1) == (0.0, 0.0, 0.0)

    def test_average_excludes_none_class(self):
        predictions = [RelationLabel.NONE] * 4 + [RelationLabel.DUPLICATION]
        gold = [RelationLabel.NONE] * 4 + [RelationLabel.DUPLICATION]
        result = precision_recall_f1(predictions, gold)
        assert result.per_class[RelationLabel.NONE].f1 == 1.0
        # duplication perfect, repayment absent -> average of 1.0 and 0.0
        assert result.average.f1 == 0.5
        assert result.average.precision == 0.5
        assert result.average.recall == 0.5

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            precision_recall_f1([RelationLabel.NONE], [])

    def test_json_shape(self):
        result = precision_recall_f1([RelationLabel.NONE], [RelationLabel.NONE])
        data = result.to_json_dict()
        assert set(data) == {"per_class", "average"}
        assert set(data["per_class"]) == {"none", "duplication", "repayment"}


class TestKappa:
    def test_perfect_agreement(self):
        labels = ["duplication", "none", "repayment", "none"]
        assert cohens_kappa(labels, labels) == 1.0

    def test_frozen_zero_example(self):
        a = ["duplication"] * 100
        b = ["duplication"] * 50 + ["none"] * 50
        assert cohens_kappa(a, b) == 0.0

    def test_frozen_standard_example(self):
        # 20 yes/yes, 5 yes/no, 10 no/yes, 15 no/no: p_o=0.7, p_e=0.5
        a = ["y"] * 20 + ["y"] * 5 + ["n"] * 10 + ["n"] * 15
        b = ["y"] * 20 + ["n"] * 5 + ["y"] * 10 + ["n"] * 15
        assert cohens_kappa(a, b) == pytest.approx(0.4, abs=1e-12)

    def test_symmetry_and_relabeling(self):
        rng = random.Random(12)
        alphabet = ["none", "duplication", "repayment", "skip"]
        mapping = {"none": 3, "duplication": 0, "repayment": 9, "skip": 1}
        for _ in range(200):
            n = rng.randint(1, 40)
            a = [rng.choice(alphabet) for _ in range(n)]
            b = [rng.choice(alphabet) for _ in range(n)]
            try:
                forward = cohens_kappa(a, b)
            except ValueError:
                continue
            assert cohens_kappa(b, a) == pytest.approx(forward, abs=1e-12)
            renamed = cohens_kappa([mapping[x] for x in a], [mapping[x] for x in b])
            assert renamed == pytest.approx(forward, abs=1e-12)

    def test_constant_identical_lists_hit_expected_one_edge(self):
        assert cohens_kappa(["none"] * 5, ["none"] * 5) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            cohens_kappa([], [])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            cohens_kappa(["a"], ["a", "b"])


class TestLandisKoch:
    @pytest.mark.parametrize(
        "kappa,band",
        [
            (-0.3, "poor"),
            (0.0, "slight"),
            (0.20, "slight"),
            (0.21, "fair"),
            (0.40, "fair"),
            (0.55, "moderate"),
            (0.61, "substantial"),
            (0.80, "substantial"),
            (0.81, "almost perfect"),
            (1.0, "almost perfect"),
        ],
    )
    def test_bands(self, kappa, band):
        assert landis_koch_band(kappa) == band


def synthetic_labelset(counts, prefix="p"):
    items = []
    i = 0
    for cls, count in counts.items():
        for _ in range(count):
            items.append((f"{prefix}{i}", cls))
            i += 1
    return items


class TestKFold:
    def test_frozen_example_exact_quotas(self):
        items = synthetic_labelset(
            {RelationLabel.NONE: 20, RelationLabel.DUPLICATION: 30, RelationLabel.REPAYMENT: 50}
        )
        assignment = stratified_kfold(items, k=10, seed=0)
        label_of = dict(items)
        for fold in range(10):
            members = assignment.members(fold)
            counts = Counter(label_of[pid] for pid in members)
            assert counts[RelationLabel.NONE] == 2
            assert counts[RelationLabel.DUPLICATION] == 3
            assert counts[RelationLabel.REPAYMENT] == 5

    def test_frozen_example_uneven_quotas(self):
        items = synthetic_labelset(
            {RelationLabel.NONE: 413, RelationLabel.DUPLICATION: 197, RelationLabel.REPAYMENT: 390}
        )
        assignment = stratified_kfold(items, k=10, seed=3)
        label_of = dict(items)
        for fold in range(10):
            counts = Counter(label_of[pid] for pid in assignment.members(fold))
            assert counts[RelationLabel.NONE] in (41, 42)
            assert counts[RelationLabel.DUPLICATION] in (19, 20)
            assert counts[RelationLabel.REPAYMENT] == 39

    @given(
        counts=st.tuples(
            st.integers(min_value=0, max_value=120),
            st.integers(min_value=0, max_value=120),
            st.integers(min_value=10, max_value=120),
        ),
        k=st.integers(min_value=2, max_value=10),
        seed=st.integers(min_value=0, max_value=1000),
    )
    @settings(max_examples=60, deadline=None)
    def test_partition_and_spread(self, counts, k, seed):
        items = synthetic_labelset(dict(zip(LABELS, counts)))
        import warnings as _warnings

        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore")
            assignment = stratified_kfold(items, k=k, seed=seed)
        assert sorted(assignment.assignment) == sorted(pid for pid, _ in items)
        label_of = dict(items)
        for cls in LABELS:
            per_fold = Counter(
                fold for pid, fold in assignment.assignment.items() if label_of[pid] is cls
            )
            sizes = [per_fold.get(f, 0) for f in range(k)]
            assert max(sizes) - min(sizes) <= 1

    def test_deterministic_per_seed(self):
        items = synthetic_labelset({RelationLabel.NONE: 40, RelationLabel.DUPLICATION: 40})
        assert stratified_kfold(items, seed=5).assignment == stratified_kfold(items, seed=5).assignment
        assert stratified_kfold(items, seed=5).assignment != stratified_kfold(items, seed=6).assignment

    def test_small_class_warns(self):
        items = synthetic_labelset({RelationLabel.NONE: 30, RelationLabel.DUPLICATION: 3})
        with pytest.warns(UserWarning, match="fewer than k"):
            stratified_kfold(items, k=10, seed=0)

    def test_invalid_k(self):
        with pytest.raises(ValueError, match=">= 2"):
            stratified_kfold([("a", RelationLabel.NONE)], k=1)

    def test_duplicate_ids_rejected(self):
        items = [("a", RelationLabel.NONE), ("a", RelationLabel.NONE)]
        with pytest.raises(ValueError, match="duplicate"):
            stratified_kfold(items, k=2)

    def test_accepts_satd_pairs(self):
        dataset = generate_synthetic_pairs(n=40, seed=0)
        assignment = stratified_kfold(dataset, k=4, seed=0)
        assert len(assignment.assignment) == 40


class TestRandomBaseline:
    def test_single_class_gold_is_perfect(self):
        gold = [RelationLabel.DUPLICATION] * 40
        report = random_baseline(gold, seed=0, trials=50)
        assert report.priors[RelationLabel.DUPLICATION] == 1.0
        expected = report.expected[RelationLabel.DUPLICATION]
        assert expected.precision == 1.0
        assert expected.recall == 1.0
        assert report.expected[RelationLabel.NONE].recall == 0.0

    def test_expected_matches_priors(self):
        gold = (
            [RelationLabel.NONE] * 248
            + [RelationLabel.DUPLICATION] * 118
            + [RelationLabel.REPAYMENT] * 234
        )
        report = random_baseline(gold, seed=7, trials=20_000)
        for cls in LABELS:
            prior = report.priors[cls]
            assert report.expected[cls].precision == pytest.approx(prior, abs=0.02)
            assert report.expected[cls].recall == pytest.approx(prior, abs=0.02)

    def test_deterministic(self):
        gold = [RelationLabel.NONE] * 30 + [RelationLabel.REPAYMENT] * 20
        one = random_baseline(gold, seed=4, trials=500)
        two = random_baseline(gold, seed=4, trials=500)
        assert one.predictions == two.predictions
        assert one.to_json_dict() == two.to_json_dict()

    def test_chunking_does_not_change_result(self):
        gold = [RelationLabel.NONE] * 25 + [RelationLabel.DUPLICATION] * 25
        coarse = random_baseline(gold, seed=2, trials=100, chunk=100)
        fine = random_baseline(gold, seed=2, trials=100, chunk=7)
        for cls in LABELS:
            assert coarse.expected[cls].f1 == pytest.approx(fine.expected[cls].f1, abs=1e-12)

    def test_prediction_length(self):
        gold = [RelationLabel.NONE] * 13
        assert len(random_baseline(gold, trials=10).predictions) == 13

    def test_empty_gold_rejected(self):
        with pytest.raises(ValueError):
            random_baseline([], trials=10)

    def test_bad_trials_rejected(self):
        with pytest.raises(ValueError):
            random_baseline([RelationLabel.NONE], trials=0)


FAST_CONFIG = TrainConfig(
    embed_dim=8, filters_per_window=2, window_sizes=(1, 2),
    max_epochs=2, batch_size=16, patience=2, seed=1,
)
TOKENIZER = TokenizerConfig(max_sequence_length=10)


class TestCrossValidate:
    def test_fold_count_and_determinism(self):
        dataset = generate_synthetic_pairs(n=50, seed=3)
        report = cross_validate(dataset, FAST_CONFIG, k=5, seeds=(1, 2), tokenizer=TOKENIZER)
        assert len(report.folds) == 10
        again = cross_validate(dataset, FAST_CONFIG, k=5, seeds=(1, 2), tokenizer=TOKENIZER)
        assert report.to_json_dict() == again.to_json_dict()

    def test_summary_is_mean_of_folds(self):
        dataset = generate_synthetic_pairs(n=50, seed=3)
        report = cross_validate(dataset, FAST_CONFIG, k=5, seeds=(1,), tokenizer=TOKENIZER)
        for cls in (RelationLabel.DUPLICATION, RelationLabel.REPAYMENT):
            mean_f1 = sum(f.metrics.per_class[cls].f1 for f in report.folds) / len(report.folds)
            assert report.summary_per_class[cls].f1 == pytest.approx(mean_f1, abs=1e-12)
        expected_avg = (
            report.summary_per_class[RelationLabel.DUPLICATION].f1
            + report.summary_per_class[RelationLabel.REPAYMENT].f1
        ) / 2
        assert report.summary_average.f1 == pytest.approx(expected_avg, abs=1e-12)

    def test_config_snapshot(self):
        dataset = generate_synthetic_pairs(n=30, seed=1)
        report = cross_validate(dataset, FAST_CONFIG, k=3, seeds=(1,), tokenizer=TOKENIZER)
        assert report.config["k"] == 3
        assert report.config["seeds"] == [1]
        assert report.config["max_sequence_length"] == 10

    def test_unlabeled_pair_rejected(self):
        import dataclasses

        dataset = generate_synthetic_pairs(n=30, seed=1)
        dataset[0] = dataclasses.replace(dataset[0], label=None)
        with pytest.raises(ValueError, match="unlabeled"):
            cross_validate(dataset, FAST_CONFIG, k=3, seeds=(1,), tokenizer=TOKENIZER)


@pytest.mark.filterwarnings("ignore::UserWarning")
class TestLearningCurve:
    def test_row_count_and_sizes(self):
        dataset = generate_synthetic_pairs(n=60, seed=5)
        rows = learning_curve(dataset, FAST_CONFIG, step=5, seed=1, tokenizer=TOKENIZER)
        class_sizes = Counter(p.label for p in dataset)
        n_test = sum(max(1, min(round(c / 10), c - 1)) for c in class_sizes.values())
        assert [r.n_train for r in rows] == [5 * (i + 1) for i in range(len(rows))]
        assert len(rows) == (60 - n_test) // 5

    def test_sizes_filter_matches_full_run(self):
        dataset = generate_synthetic_pairs(n=60, seed=5)
        full = learning_curve(dataset, FAST_CONFIG, step=5, seed=2, tokenizer=TOKENIZER)
        subset = learning_curve(
            dataset, FAST_CONFIG, step=5, seed=2, tokenizer=TOKENIZER, sizes=[10, 25]
        )
        by_n = {r.n_train: r for r in full}
        assert subset == [by_n[10], by_n[25]]

    def test_bad_sizes_rejected(self):
        dataset = generate_synthetic_pairs(n=60, seed=5)
        with pytest.raises(ValueError, match="sizes"):
            learning_curve(dataset, FAST_CONFIG, step=5, tokenizer=TOKENIZER, sizes=[7])

    def test_bad_step_rejected(self):
        dataset = generate_synthetic_pairs(n=60, seed=5)
        with pytest.raises(ValueError, match="step"):
            learning_curve(dataset, FAST_CONFIG, step=0, tokenizer=TOKENIZER)

    def test_tiny_dataset_rejected(self):
        dataset = generate_synthetic_pairs(n=12, seed=5)
        with pytest.raises(ValueError, match="two steps"):
            learning_curve(dataset, FAST_CONFIG, step=10, tokenizer=TOKENIZER)

    def test_deterministic(self):
        dataset = generate_synthetic_pairs(n=60, seed=5)
        one = learning_curve(dataset, FAST_CONFIG, step=10, seed=3, tokenizer=TOKENIZER)
        two = learning_curve(dataset, FAST_CONFIG, step=10, seed=3, tokenizer=TOKENIZER)
        assert one == two
        assert all(isinstance(r, CurveRow) for r in one)
