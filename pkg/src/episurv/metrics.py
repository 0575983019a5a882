"""Clustering, extraction and classification metrics.

Clustering agreement (adjusted Rand index, normalized mutual information,
V-measure) is computed from the label contingency table with explicit
conventions for degenerate labelings so results are deterministic.
Extraction metrics follow multiset exact matching per article.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Sequence

from .errors import DegenerateInput, MisalignedArticles, SingleClassInput
from .models import MappedEvent

Labels = Sequence[Hashable]


def _check_aligned(y: Labels, y_hat: Labels, minimum: int) -> None:
    if len(y) != len(y_hat):
        raise DegenerateInput(f"labelings differ in length: {len(y)} vs {len(y_hat)}")
    if len(y) < minimum:
        raise DegenerateInput(f"need at least {minimum} items, got {len(y)}")


def _contingency(y: Labels, y_hat: Labels) -> Counter:
    return Counter(zip(y, y_hat))


def _comb2(n: int) -> int:
    return n * (n - 1) // 2


def adjusted_rand_index(y: Labels, y_hat: Labels) -> float:
    """Chance-adjusted pair-counting agreement in [-1, 1].

    When both labelings are degenerate in the same direction (all one
    cluster, or all singletons) the partitions are identical and the
    adjusted index is 1.0.
    """
    _check_aligned(y, y_hat, minimum=2)
    joint = _contingency(y, y_hat)
    same_both = sum(_comb2(v) for v in joint.values())
    same_y = sum(_comb2(v) for v in Counter(y).values())
    same_y_hat = sum(_comb2(v) for v in Counter(y_hat).values())
    total = _comb2(len(y))
    expected = same_y * same_y_hat / total
    maximum = (same_y + same_y_hat) / 2.0
    if maximum == expected:
        return 1.0
    return (same_both - expected) / (maximum - expected)


def _entropy(labels: Labels) -> float:
    n = len(labels)
    return -sum(
        (count / n) * math.log(count / n) for count in Counter(labels).values()
    )


def _mutual_information(y: Labels, y_hat: Labels) -> float:
    n = len(y)
    counts_y = Counter(y)
    counts_y_hat = Counter(y_hat)
    info = 0.0
    for (label_y, label_y_hat), count in _contingency(y, y_hat).items():
        info += (count / n) * math.log(
            n * count / (counts_y[label_y] * counts_y_hat[label_y_hat])
        )
    return max(0.0, info)


def normalized_mutual_information(y: Labels, y_hat: Labels) -> float:
    """2*I(y; y_hat) / (H(y) + H(y_hat)); 1.0 when both entropies are zero."""
    _check_aligned(y, y_hat, minimum=1)
    h_y = _entropy(y)
    h_y_hat = _entropy(y_hat)
    if h_y == 0.0 and h_y_hat == 0.0:
        return 1.0
    if h_y == 0.0 or h_y_hat == 0.0:
        return 0.0
    return 2.0 * _mutual_information(y, y_hat) / (h_y + h_y_hat)


@dataclass(frozen=True)
class VMeasure:
    homogeneity: float
    completeness: float
    v: float


def v_measure(y: Labels, y_hat: Labels) -> VMeasure:
    """Homogeneity, completeness and their harmonic mean.

    A conditioning entropy of zero makes the corresponding component 1.0;
    v is 0.0 when both components are zero.
    """
    _check_aligned(y, y_hat, minimum=1)
    h_y = _entropy(y)
    h_y_hat = _entropy(y_hat)
    mutual = _mutual_information(y, y_hat)
    homogeneity = 1.0 if h_y == 0.0 else mutual / h_y  # 1 - H(y|y_hat)/H(y)
    completeness = 1.0 if h_y_hat == 0.0 else mutual / h_y_hat
    if homogeneity + completeness == 0.0:
        v = 0.0
    else:
        v = 2.0 * homogeneity * completeness / (homogeneity + completeness)
    return VMeasure(homogeneity=homogeneity, completeness=completeness, v=v)


def event_signature(event: MappedEvent) -> tuple:
    """Normalized 5-tuple used for exact event matching."""
    return (
        event.standard_disease.casefold(),
        event.state.casefold(),
        event.district.casefold(),
        event.subdistrict.casefold(),
        event.raw.incident.value,
        event.raw.incident_type.value,
        event.raw.number,
    )


def _disease_signature(event: MappedEvent) -> tuple:
    return (event.standard_disease.casefold(),)


def _location_signature(event: MappedEvent) -> tuple:
    return (event.state.casefold(), event.district.casefold(), event.subdistrict.casefold())


@dataclass(frozen=True)
class ArticleEval:
    article_id: str
    relevant: bool
    gold: tuple[MappedEvent, ...]
    predicted: tuple[MappedEvent, ...]


@dataclass
class EvalEventSet:
    """Aligned gold/predicted events per article."""

    articles: list[ArticleEval] = field(default_factory=list)

    @classmethod
    def align(
        cls,
        gold: dict[str, Sequence[MappedEvent]],
        predicted: dict[str, Sequence[MappedEvent]],
        relevance: dict[str, bool],
    ) -> "EvalEventSet":
        if set(gold) != set(relevance):
            raise MisalignedArticles("gold events and relevance flags cover different articles")
        if not set(predicted) <= set(gold):
            raise MisalignedArticles("predictions reference articles outside the gold set")
        return cls(
            articles=[
                ArticleEval(
                    article_id=article_id,
                    relevant=relevance[article_id],
                    gold=tuple(gold[article_id]),
                    predicted=tuple(predicted.get(article_id, ())),
                )
                for article_id in sorted(gold)
            ]
        )


@dataclass(frozen=True)
class Prf:
    precision: float
    recall: float
    f1: float


def _prf(true_positives: int, predicted_total: int, gold_total: int) -> Prf:
    precision = true_positives / predicted_total if predicted_total else 0.0
    recall = true_positives / gold_total if gold_total else 0.0
    f1 = 0.0 if precision + recall == 0.0 else 2 * precision * recall / (precision + recall)
    return Prf(precision=precision, recall=recall, f1=f1)


@dataclass(frozen=True)
class ExtractionReport:
    event: Prf
    disease: Prf
    location: Prf
    exact_match_accuracy: float
    detection_rate: float

    def to_json_dict(self) -> dict:
        return {
            "event": vars(self.event),
            "disease": vars(self.disease),
            "location": vars(self.location),
            "exact_match_accuracy": self.exact_match_accuracy,
            "detection_rate": self.detection_rate,
        }


def extraction_metrics(eval_set: EvalEventSet) -> ExtractionReport:
    """Multiset exact matching per article, plus per-entity P/R/F1.

    Exact match accuracy is the fraction of articles whose predicted event
    multiset equals the gold multiset exactly; detection rate is the
    fraction of relevant articles with at least one prediction.
    """
    totals = {"event": [0, 0, 0], "disease": [0, 0, 0], "location": [0, 0, 0]}
    signatures = {
        "event": event_signature,
        "disease": _disease_signature,
        "location": _location_signature,
    }
    exact = 0
    relevant_articles = 0
    detected = 0
    for entry in eval_set.articles:
        for name, signature in signatures.items():
            gold_counts = Counter(signature(e) for e in entry.gold)
            predicted_counts = Counter(signature(e) for e in entry.predicted)
            matched = sum((gold_counts & predicted_counts).values())
            totals[name][0] += matched
            totals[name][1] += sum(predicted_counts.values())
            totals[name][2] += sum(gold_counts.values())
        if Counter(event_signature(e) for e in entry.gold) == Counter(
            event_signature(e) for e in entry.predicted
        ):
            exact += 1
        if entry.relevant:
            relevant_articles += 1
            if entry.predicted:
                detected += 1
    article_count = len(eval_set.articles)
    return ExtractionReport(
        event=_prf(*totals["event"]),
        disease=_prf(*totals["disease"]),
        location=_prf(*totals["location"]),
        exact_match_accuracy=exact / article_count if article_count else 0.0,
        detection_rate=detected / relevant_articles if relevant_articles else 0.0,
    )


@dataclass(frozen=True)
class ClassificationReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc_roc: float

    def to_json_dict(self) -> dict:
        return vars(self)


def classification_metrics(
    gold: Sequence[int], scores: Sequence[float], threshold: float = 0.5
) -> ClassificationReport:
    """Binary classification metrics; AUC by tie-averaged rank statistic."""
    if len(gold) != len(scores):
        raise DegenerateInput("gold labels and scores differ in length")
    if not gold:
        raise DegenerateInput("empty input")
    positives = sum(1 for g in gold if g)
    negatives = len(gold) - positives
    if positives == 0 or negatives == 0:
        raise SingleClassInput("AUC-ROC needs both classes present")

    tp = fp = tn = fn = 0
    for label, score in zip(gold, scores):
        predicted = score >= threshold
        if predicted and label:
            tp += 1
        elif predicted and not label:
            fp += 1
        elif not predicted and label:
            fn += 1
        else:
            tn += 1
    accuracy = (tp + tn) / len(gold)
    prf = _prf(tp, tp + fp, tp + fn)

    order = sorted(range(len(scores)), key=lambda i: scores[i])
    ranks = [0.0] * len(scores)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        average_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = average_rank
        i = j + 1
    rank_sum = sum(rank for rank, label in zip(ranks, gold) if label)
    auc = (rank_sum - positives * (positives + 1) / 2.0) / (positives * negatives)
    return ClassificationReport(
        accuracy=accuracy,
        precision=prf.precision,
        recall=prf.recall,
        f1=prf.f1,
        auc_roc=auc,
    )
