"""Aggregation and comparison harness over score records.

Covers best-of-N candidate selection, benchmark-style aggregates
(conditional and unconditional means, per-seed success fractions),
confusion-matrix metrics against human labels, and rank correlations.
Undefined values (division by an empty confusion cell, constant inputs)
are surfaced as None, never coerced to 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .core import pse_binary
from .errors import ContractViolationError
from .pipeline import ScoreRecord


def _group_by_prompt(records: Iterable[ScoreRecord]) -> dict[str, list[ScoreRecord]]:
    groups: dict[str, list[ScoreRecord]] = {}
    for record in records:
        groups.setdefault(record.prompt_id, []).append(record)
    return groups


def best_of_n(records: Iterable[ScoreRecord]) -> dict[str, ScoreRecord]:
    """Pick the highest-scoring candidate per prompt.

    Ties break to the lexicographically lowest candidate id, so the
    selection does not depend on record order.
    """
    selected: dict[str, ScoreRecord] = {}
    for prompt_id, group in _group_by_prompt(records).items():
        if not group:
            raise ContractViolationError(f"prompt {prompt_id!r} has no records")
        selected[prompt_id] = min(group, key=lambda r: (-r.pse, r.candidate_id))
    return selected


@dataclass(frozen=True)
class ClassificationMetrics:
    precision: float | None
    recall: float | None
    accuracy: float | None
    specificity: float | None
    f1: float | None

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "accuracy": self.accuracy,
            "specificity": self.specificity,
            "f1": self.f1,
        }


def _ratio(num: int, den: int) -> float | None:
    return None if den == 0 else num / den


def classification_metrics(
    pred: Sequence[bool], truth: Sequence[bool]
) -> ClassificationMetrics:
    """Confusion-matrix metrics of binary predictions against labels."""
    if len(pred) != len(truth):
        raise ContractViolationError(f"length mismatch: {len(pred)} vs {len(truth)}")
    if not pred:
        raise ContractViolationError("need at least one prediction")
    tp = sum(1 for p, t in zip(pred, truth) if p and t)
    fp = sum(1 for p, t in zip(pred, truth) if p and not t)
    tn = sum(1 for p, t in zip(pred, truth) if not p and not t)
    fn = sum(1 for p, t in zip(pred, truth) if not p and t)
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f1 = None
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    return ClassificationMetrics(
        precision=precision,
        recall=recall,
        accuracy=(tp + tn) / len(pred),
        specificity=_ratio(tn, tn + fp),
        f1=f1,
    )


@dataclass(frozen=True)
class CorrelationResult:
    pearson: float | None
    spearman: float | None
    kendall: float | None

    def to_dict(self) -> dict:
        return {"pearson": self.pearson, "spearman": self.spearman, "kendall": self.kendall}


def correlations(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    """Pearson on values, Spearman on average ranks, Kendall as tau-b.

    A constant input makes every coefficient undefined (None); tau-b
    carries the tie correction, which matters for thresholded scores.
    """
    if len(x) != len(y):
        raise ContractViolationError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 3:
        raise ContractViolationError("need at least 3 points")
    ax = np.asarray(x, dtype=np.float64)
    ay = np.asarray(y, dtype=np.float64)
    if float(np.ptp(ax)) == 0.0 or float(np.ptp(ay)) == 0.0:
        return CorrelationResult(None, None, None)
    pearson = float(stats.pearsonr(ax, ay).statistic)
    spearman = float(stats.spearmanr(ax, ay).statistic)
    kendall = float(stats.kendalltau(ax, ay, variant="b").statistic)
    return CorrelationResult(pearson, spearman, kendall)


@dataclass(frozen=True)
class AggregateReport:
    """Benchmark-style aggregates over a record set.

    `visor` holds the fraction of prompts with at least n of 4 seeds
    passing the binary threshold with both objects present, n = 1..4;
    entries beyond the available seed count are None.
    """

    mean_pse: float
    mean_pse_conditional: float
    object_accuracy: float
    visor: tuple[float | None, float | None, float | None, float | None]
    count: int

    def to_dict(self) -> dict:
        return {
            "mean_pse": self.mean_pse,
            "mean_pse_conditional": self.mean_pse_conditional,
            "object_accuracy": self.object_accuracy,
            "visor": list(self.visor),
            "count": self.count,
        }


def aggregate(records: Iterable[ScoreRecord], threshold: float = 0.5) -> AggregateReport:
    """Aggregate records grouped by prompt across seeds.

    A record passes when its score clears the threshold and both objects
    are present. Per-seed fractions expect 4 seeds per prompt; fewer
    degrade gracefully with a warning.
    """
    records = list(records)
    if not records:
        return AggregateReport(0.0, 0.0, 0.0, (0.0, 0.0, 0.0, 0.0), 0)
    both_present = [r for r in records if r.present_a and r.present_b]
    # fsum keeps the means exactly permutation-invariant
    mean_pse = math.fsum(r.pse for r in records) / len(records)
    mean_cond = (
        math.fsum(r.pse for r in both_present) / len(both_present) if both_present else 0.0
    )
    groups = _group_by_prompt(records)
    available = min(len(g) for g in groups.values())
    if any(len(g) != 4 for g in groups.values()):
        warnings.warn(
            f"per-seed fractions expect 4 seeds per prompt; reporting up to {min(available, 4)}",
            stacklevel=2,
        )
    visor: list[float | None] = [None] * 4
    for n in range(1, min(available, 4) + 1):
        hits = 0
        for group in groups.values():
            passes = sum(
                1
                for r in group
                if r.present_a and r.present_b and pse_binary(r.pse, threshold)
            )
            if passes >= n:
                hits += 1
        visor[n - 1] = hits / len(groups)
    return AggregateReport(
        mean_pse=mean_pse,
        mean_pse_conditional=mean_cond,
        object_accuracy=len(both_present) / len(records),
        visor=tuple(visor),
        count=len(records),
    )
