"""Evaluation harness: stratified folds, metrics, kappa, baselines, curves."""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, replace
from typing import Hashable, Sequence

import numpy as np

from .model import CLASS_INDEX, CLASS_ORDER, RelationLabel, SatdPair
from .nn.train import TrainConfig, train, vocab_for_dataset
from .nn.vocab import encode_batch
from .nn.net import pair_forward_batch, softmax
from .pairs import DEFAULT_TOKENIZER, TokenizerConfig, tokenize

RELATION_CLASSES = (RelationLabel.DUPLICATION, RelationLabel.REPAYMENT)


@dataclass(frozen=True, slots=True)
class FoldAssignment:
    k: int
    assignment: dict[str, int]

    def fold_of(self, pair_id: str) -> int:
        return self.assignment[pair_id]

    def members(self, fold: int) -> list[str]:
        return sorted(pid for pid, f in self.assignment.items() if f == fold)


def _ids_and_labels(
    dataset: Sequence[SatdPair] | Sequence[tuple[str, RelationLabel]],
) -> list[tuple[str, RelationLabel]]:
    out = []
    for item in dataset:
        if isinstance(item, SatdPair):
            if item.label is None:
                raise ValueError(f"pair {item.pair_id} is unlabeled")
            out.append((item.pair_id, item.label))
        else:
            pid, label = item
            out.append((pid, RelationLabel(label)))
    return out


def stratified_kfold(
    dataset: Sequence[SatdPair] | Sequence[tuple[str, RelationLabel]],
    k: int = 10,
    seed: int = 0,
) -> FoldAssignment:
    """Seeded shuffle within each class, then round-robin fold assignment.

    Per-class fold counts differ by at most one; folds partition the dataset.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    items = _ids_and_labels(dataset)
    ids = [pid for pid, _ in items]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate pair ids in dataset")
    rng = random.Random(seed)
    assignment: dict[str, int] = {}
    for cls in CLASS_ORDER:
        members = [pid for pid, label in items if label is cls]
        if not members:
            continue
        if len(members) < k:
            warnings.warn(
                f"class {cls.value} has {len(members)} members, fewer than k={k}",
                stacklevel=2,
            )
        rng.shuffle(members)
        for position, pid in enumerate(members):
            assignment[pid] = position % k
    return FoldAssignment(k=k, assignment=assignment)


@dataclass(frozen=True, slots=True)
class ClassMetrics:
    label: RelationLabel
    precision: float
    recall: float
    f1: float
    support: int

    def to_json_dict(self) -> dict:
        return {
            "class": self.label.value,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
        }


@dataclass(frozen=True, slots=True)
class AverageMetrics:
    """Unweighted mean over the duplication and repayment classes."""

    precision: float
    recall: float
    f1: float

    def to_json_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass(frozen=True, slots=True)
class MetricsResult:
    per_class: dict[RelationLabel, ClassMetrics]
    average: AverageMetrics

    def to_json_dict(self) -> dict:
        return {
            "per_class": {c.value: m.to_json_dict() for c, m in self.per_class.items()},
            "average": self.average.to_json_dict(),
        }


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def precision_recall_f1(
    predictions: Sequence[RelationLabel], gold: Sequence[RelationLabel]
) -> MetricsResult:
    """Per-class precision/recall/F1 with the zero-division-is-zero rule.

    The averaged row is the unweighted mean over duplication and repayment
    only; the none class is reported per class but excluded from the average.
    """
    if len(predictions) != len(gold):
        raise ValueError(
            f"length mismatch: {len(predictions)} predictions vs {len(gold)} gold labels"
        )
    per_class: dict[RelationLabel, ClassMetrics] = {}
    for cls in CLASS_ORDER:
        tp = sum(1 for p, g in zip(predictions, gold) if p is cls and g is cls)
        fp = sum(1 for p, g in zip(predictions, gold) if p is cls and g is not cls)
        fn = sum(1 for p, g in zip(predictions, gold) if p is not cls and g is cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        per_class[cls] = ClassMetrics(
            label=cls,
            precision=precision,
            recall=recall,
            f1=_f1(precision, recall),
            support=tp + fn,
        )
    average = AverageMetrics(
        precision=sum(per_class[c].precision for c in RELATION_CLASSES) / len(RELATION_CLASSES),
        recall=sum(per_class[c].recall for c in RELATION_CLASSES) / len(RELATION_CLASSES),
        f1=sum(per_class[c].f1 for c in RELATION_CLASSES) / len(RELATION_CLASSES),
    )
    return MetricsResult(per_class=per_class, average=average)


def cohens_kappa(labels_a: Sequence[Hashable], labels_b: Sequence[Hashable]) -> float:
    """Chance-corrected agreement from the two annotators' marginals."""
    if len(labels_a) != len(labels_b):
        raise ValueError("label sequences must have equal length")
    n = len(labels_a)
    if n == 0:
        raise ValueError("cohens_kappa needs at least one item")
    observed = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    alphabet = set(labels_a) | set(labels_b)
    expected = sum(
        (sum(1 for a in labels_a if a == c) / n) * (sum(1 for b in labels_b if b == c) / n)
        for c in alphabet
    )
    if expected == 1.0:
        if observed == 1.0:
            return 1.0
        raise ValueError("kappa undefined: expected agreement is 1 but annotators disagree")
    return (observed - expected) / (1.0 - expected)


def landis_koch_band(kappa: float) -> str:
    if kappa < 0.0:
        return "poor"
    if kappa <= 0.20:
        return "slight"
    if kappa <= 0.40:
        return "fair"
    if kappa <= 0.60:
        return "moderate"
    if kappa <= 0.80:
        return "substantial"
    return "almost perfect"


@dataclass(frozen=True, slots=True)
class FoldResult:
    seed: int
    fold: int
    metrics: MetricsResult

    def to_json_dict(self) -> dict:
        return {"seed": self.seed, "fold": self.fold, **self.metrics.to_json_dict()}


@dataclass(frozen=True, slots=True)
class EvalReport:
    folds: tuple[FoldResult, ...]
    summary_per_class: dict[RelationLabel, AverageMetrics]
    summary_average: AverageMetrics
    config: dict

    def to_json_dict(self) -> dict:
        return {
            "folds": [f.to_json_dict() for f in self.folds],
            "summary": {
                **{c.value: m.to_json_dict() for c, m in self.summary_per_class.items()},
                "average": self.summary_average.to_json_dict(),
            },
            "config": self.config,
        }


def summarize_folds(folds: Sequence[FoldResult]) -> tuple[dict[RelationLabel, AverageMetrics], AverageMetrics]:
    """Mean of the stored per-fold metrics; the averaged row is the unweighted
    mean of the two per-class summaries."""
    per_class: dict[RelationLabel, AverageMetrics] = {}
    for cls in RELATION_CLASSES:
        per_class[cls] = AverageMetrics(
            precision=sum(f.metrics.per_class[cls].precision for f in folds) / len(folds),
            recall=sum(f.metrics.per_class[cls].recall for f in folds) / len(folds),
            f1=sum(f.metrics.per_class[cls].f1 for f in folds) / len(folds),
        )
    average = AverageMetrics(
        precision=sum(per_class[c].precision for c in RELATION_CLASSES) / len(RELATION_CLASSES),
        recall=sum(per_class[c].recall for c in RELATION_CLASSES) / len(RELATION_CLASSES),
        f1=sum(per_class[c].f1 for c in RELATION_CLASSES) / len(RELATION_CLASSES),
    )
    return per_class, average


def _evaluate_split(
    train_pairs: list[SatdPair],
    test_pairs: list[SatdPair],
    config: TrainConfig,
    tokenizer: TokenizerConfig,
) -> MetricsResult:
    """Train on one split and score the held-out pairs.

    The vocabulary is rebuilt from the training split only, so unseen test
    tokens map to UNK (no leakage).
    """
    vocab = vocab_for_dataset(train_pairs, tokenizer, config.min_frequency)
    params, _ = train(train_pairs, vocab, config, tokenizer)
    max_len = tokenizer.max_sequence_length
    enc_a = encode_batch([tokenize(p.origin.text, tokenizer) for p in test_pairs], vocab, max_len)
    enc_b = encode_batch([tokenize(p.target.text, tokenizer) for p in test_pairs], vocab, max_len)
    logits, _ = pair_forward_batch(enc_a, enc_b, params, training=False)
    predicted = [CLASS_ORDER[i] for i in softmax(logits).argmax(axis=1)]
    gold = [p.label for p in test_pairs]
    return precision_recall_f1(predicted, gold)


def cross_validate(
    dataset: Sequence[SatdPair],
    config: TrainConfig = TrainConfig(),
    k: int = 10,
    seeds: Sequence[int] = (1, 2, 3),
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER,
) -> EvalReport:
    """Stratified k-fold cross-validation repeated over the given seeds."""
    dataset = list(dataset)
    folds: list[FoldResult] = []
    for seed in seeds:
        assignment = stratified_kfold(dataset, k=k, seed=seed)
        seeded = replace(config, seed=seed)
        for fold in range(k):
            train_pairs = [p for p in dataset if assignment.assignment[p.pair_id] != fold]
            test_pairs = [p for p in dataset if assignment.assignment[p.pair_id] == fold]
            if not test_pairs:
                continue
            metrics = _evaluate_split(train_pairs, test_pairs, seeded, tokenizer)
            folds.append(FoldResult(seed=seed, fold=fold, metrics=metrics))
    per_class, average = summarize_folds(folds)
    snapshot = {
        "k": k,
        "seeds": list(seeds),
        "learning_rate": config.learning_rate,
        "batch_size": config.batch_size,
        "max_epochs": config.max_epochs,
        "patience": config.patience,
        "embed_dim": config.embed_dim,
        "window_sizes": list(config.window_sizes),
        "filters_per_window": config.filters_per_window,
        "dropout_rate": config.dropout_rate,
        "max_sequence_length": tokenizer.max_sequence_length,
    }
    return EvalReport(
        folds=tuple(folds),
        summary_per_class=per_class,
        summary_average=average,
        config=snapshot,
    )


@dataclass(frozen=True, slots=True)
class RandomBaselineReport:
    predictions: tuple[RelationLabel, ...]
    priors: dict[RelationLabel, float]
    expected: dict[RelationLabel, AverageMetrics]
    average: AverageMetrics
    trials: int

    def to_json_dict(self) -> dict:
        return {
            "priors": {c.value: p for c, p in self.priors.items()},
            "expected": {c.value: m.to_json_dict() for c, m in self.expected.items()},
            "average": self.average.to_json_dict(),
            "trials": self.trials,
        }


def random_baseline(
    gold: Sequence[RelationLabel],
    seed: int = 0,
    trials: int = 100_000,
    chunk: int = 2_000,
) -> RandomBaselineReport:
    """Prior-proportional random predictor with Monte-Carlo expected metrics.

    Every prediction is drawn independently from the gold class priors; the
    expected per-class precision/recall/F1 are averaged over `trials`
    simulated prediction runs.
    """
    if not gold:
        raise ValueError("random_baseline needs at least one gold label")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = len(gold)
    gold_idx = np.asarray([CLASS_INDEX[g] for g in gold], dtype=np.int64)
    priors_vec = np.asarray([np.mean(gold_idx == c) for c in range(len(CLASS_ORDER))])

    rng = np.random.default_rng(seed)
    predictions = tuple(CLASS_ORDER[i] for i in rng.choice(len(CLASS_ORDER), size=n, p=priors_vec))

    sums = np.zeros((len(CLASS_ORDER), 3))
    done = 0
    while done < trials:
        batch = min(chunk, trials - done)
        sampled = rng.choice(len(CLASS_ORDER), size=(batch, n), p=priors_vec)
        for c in range(len(CLASS_ORDER)):
            gold_c = gold_idx == c
            pred_c = sampled == c
            tp = (pred_c & gold_c).sum(axis=1).astype(float)
            predicted = pred_c.sum(axis=1).astype(float)
            actual = float(gold_c.sum())
            with np.errstate(invalid="ignore", divide="ignore"):
                precision = np.where(predicted > 0, tp / predicted, 0.0)
                recall = tp / actual if actual > 0 else np.zeros(batch)
                denom = precision + recall
                f1 = np.where(denom > 0, 2 * precision * recall / denom, 0.0)
            sums[c, 0] += precision.sum()
            sums[c, 1] += recall.sum()
            sums[c, 2] += f1.sum()
        done += batch

    expected = {
        CLASS_ORDER[c]: AverageMetrics(
            precision=sums[c, 0] / trials, recall=sums[c, 1] / trials, f1=sums[c, 2] / trials
        )
        for c in range(len(CLASS_ORDER))
    }
    average = AverageMetrics(
        precision=sum(expected[c].precision for c in RELATION_CLASSES) / len(RELATION_CLASSES),
        recall=sum(expected[c].recall for c in RELATION_CLASSES) / len(RELATION_CLASSES),
        f1=sum(expected[c].f1 for c in RELATION_CLASSES) / len(RELATION_CLASSES),
    )
    return RandomBaselineReport(
        predictions=predictions,
        priors={CLASS_ORDER[c]: float(priors_vec[c]) for c in range(len(CLASS_ORDER))},
        expected=expected,
        average=average,
        trials=trials,
    )


@dataclass(frozen=True, slots=True)
class CurveRow:
    n_train: int
    f1_duplication: float
    f1_repayment: float
    seed: int


def learning_curve(
    dataset: Sequence[SatdPair],
    config: TrainConfig = TrainConfig(),
    step: int = 5,
    seed: int = 1,
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER,
    sizes: Sequence[int] | None = None,
) -> list[CurveRow]:
    """Fixed 1:9 test/pool split; training subsets grow by `step` items.

    The pool order is one seeded permutation, so the subset of size n is a
    prefix of the subset of size n+step and each row is independent of which
    other rows are computed. `sizes` restricts computation to chosen n_train
    values (each must be a multiple of `step` within range); the rows are
    identical to those of a full run.
    """
    dataset = list(dataset)
    if step < 1:
        raise ValueError("step must be >= 1")
    if len(dataset) < 2 * step:
        raise ValueError("dataset must hold at least two steps of pairs")

    rng = random.Random(seed)
    by_class: dict[RelationLabel, list[SatdPair]] = {c: [] for c in CLASS_ORDER}
    for pair in dataset:
        if pair.label is None:
            raise ValueError(f"pair {pair.pair_id} is unlabeled")
        by_class[pair.label].append(pair)
    test_pairs: list[SatdPair] = []
    pool: list[SatdPair] = []
    for cls in CLASS_ORDER:
        members = sorted(by_class[cls], key=lambda p: p.pair_id)
        rng.shuffle(members)
        n_test = round(len(members) / 10)
        if members and len(members) >= 2:
            n_test = max(1, min(n_test, len(members) - 1))
        test_pairs.extend(members[:n_test])
        pool.extend(members[n_test:])
    rng.shuffle(pool)

    max_rows = len(pool) // step
    wanted = [step * (i + 1) for i in range(max_rows)]
    if sizes is not None:
        requested = sorted(set(sizes))
        bad = [n for n in requested if n not in wanted]
        if bad:
            raise ValueError(f"sizes must be multiples of step within the pool, got {bad}")
        wanted = requested

    seeded = replace(config, seed=seed)
    rows: list[CurveRow] = []
    for n in wanted:
        metrics = _evaluate_split(pool[:n], test_pairs, seeded, tokenizer)
        rows.append(
            CurveRow(
                n_train=n,
                f1_duplication=metrics.per_class[RelationLabel.DUPLICATION].f1,
                f1_repayment=metrics.per_class[RelationLabel.REPAYMENT].f1,
                seed=seed,
            )
        )
    return rows
