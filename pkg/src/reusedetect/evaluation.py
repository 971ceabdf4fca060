"""Ground-truth ingestion and detection metrics.

Confusion counts are computed over the developer-function pair space of the
two programs: a matched pair found in the truth set is a true positive, a
matched pair absent from it a false positive, an unmatched truth pair a
false negative, and everything else a true negative. A coarser project-level
truth form labels target function ids as reused and scores at
target-function granularity instead.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

from .detection import DetectionResult
from .errors import IntegrityError, ValidationError

UNIVERSE_PAIRS = "dev-function-pairs"
UNIVERSE_TARGET_FUNCTIONS = "target-dev-functions"


@dataclass(frozen=True)
class GroundTruth:
    target: str
    candidate: str
    pairs: frozenset[tuple[str, str]] = frozenset()
    reused_target_ids: frozenset[str] = frozenset()
    granularity: str = UNIVERSE_PAIRS


@dataclass(frozen=True)
class Metrics:
    tp: int
    tn: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    fpr: float
    fnr: float
    undefined: tuple[str, ...]  # metrics whose denominator was zero (reported as 0)
    universe: str
    universe_size: int


def _ratio(num: int, den: int, name: str, undefined: list[str]) -> float:
    if den == 0:
        undefined.append(name)
        return 0.0
    return num / den


def compute_metrics(tp: int, tn: int, fp: int, fn: int, universe: str,
                    universe_size: int) -> Metrics:
    undefined: list[str] = []
    precision = _ratio(tp, tp + fp, "precision", undefined)
    recall = _ratio(tp, tp + fn, "recall", undefined)
    if precision + recall == 0:
        undefined.append("f1")
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    fpr = _ratio(fp, fp + tn, "fpr", undefined)
    fnr = _ratio(fn, tp + fn, "fnr", undefined)
    return Metrics(tp=tp, tn=tn, fp=fp, fn=fn, precision=precision, recall=recall,
                   f1=f1, fpr=fpr, fnr=fnr, undefined=tuple(undefined),
                   universe=universe, universe_size=universe_size)


def score_against_truth(result: DetectionResult, truth: GroundTruth) -> Metrics:
    if truth.target != result.target or truth.candidate != result.candidate:
        raise IntegrityError(
            f"truth describes ({truth.target!r}, {truth.candidate!r}), "
            f"result describes ({result.target!r}, {result.candidate!r})")

    matched_pairs = {(t, c) for t, c, _ in result.matched}
    if truth.granularity == UNIVERSE_PAIRS:
        tp = len(matched_pairs & truth.pairs)
        fp = len(matched_pairs - truth.pairs)
        fn = len(truth.pairs - matched_pairs)
        universe_size = result.total_pair_count
        tn = universe_size - tp - fp - fn
        return compute_metrics(tp, tn, fp, fn, UNIVERSE_PAIRS, universe_size)

    matched_targets = {t for t, _ in matched_pairs}
    reused = truth.reused_target_ids
    tp = len(matched_targets & reused)
    fp = len(matched_targets - reused)
    fn = len(reused - matched_targets)
    universe_size = result.target_dev_count
    tn = universe_size - tp - fp - fn
    return compute_metrics(tp, tn, fp, fn, UNIVERSE_TARGET_FUNCTIONS, universe_size)


def reduction_ratio(result: DetectionResult) -> float:
    """Fraction of the all-pairs comparison space the search avoided."""
    if result.total_pair_count <= 0:
        raise ValidationError("total_pair_count must be positive")
    ratio = 1.0 - result.comparison_count / result.total_pair_count
    return min(1.0, max(0.0, ratio))


def ground_truth_from_dict(doc: dict) -> GroundTruth:
    try:
        target = doc["target"]
        candidate = doc["candidate"]
        has_pairs = "pairs" in doc
        has_project = "reused_library_function_ids" in doc
        if has_pairs == has_project:
            raise ValidationError(
                "expected exactly one of 'pairs' or 'reused_library_function_ids'")
        if has_pairs:
            pairs = frozenset((t, c) for t, c in doc["pairs"])
            return GroundTruth(target=target, candidate=candidate, pairs=pairs,
                               granularity=UNIVERSE_PAIRS)
        ids = frozenset(doc["reused_library_function_ids"])
        return GroundTruth(target=target, candidate=candidate, reused_target_ids=ids,
                           granularity=UNIVERSE_TARGET_FUNCTIONS)
    except ValidationError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"malformed ground-truth document: {e!r}") from e


def loads_ground_truth(text: str) -> GroundTruth:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"ground-truth document is not valid JSON: {e}") from e
    return ground_truth_from_dict(doc)


def metrics_to_dict(metrics: Metrics) -> dict:
    return {
        "tp": metrics.tp,
        "tn": metrics.tn,
        "fp": metrics.fp,
        "fn": metrics.fn,
        "precision": metrics.precision,
        "recall": metrics.recall,
        "f1": metrics.f1,
        "fpr": metrics.fpr,
        "fnr": metrics.fnr,
        "undefined": list(metrics.undefined),
        "universe": metrics.universe,
        "universe_size": metrics.universe_size,
    }


def dumps_metrics(metrics: Metrics) -> str:
    return json.dumps(metrics_to_dict(metrics), indent=2) + "\n"


CSV_FIELDS = ["target", "candidate", "tp", "tn", "fp", "fn", "precision", "recall",
              "f1", "fpr", "fnr", "program_similarity", "reduction_ratio"]


def append_csv_row(path: str, result: DetectionResult, metrics: Metrics) -> None:
    """Append one delimited row per evaluated program pair (header on first write)."""
    row = {
        "target": result.target,
        "candidate": result.candidate,
        "tp": metrics.tp,
        "tn": metrics.tn,
        "fp": metrics.fp,
        "fn": metrics.fn,
        "precision": f"{metrics.precision:.6f}",
        "recall": f"{metrics.recall:.6f}",
        "f1": f"{metrics.f1:.6f}",
        "fpr": f"{metrics.fpr:.6f}",
        "fnr": f"{metrics.fnr:.6f}",
        "program_similarity": f"{result.program_similarity:.6f}",
        "reduction_ratio": f"{reduction_ratio(result):.6f}",
    }
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        if fresh:
            writer.writeheader()
        writer.writerow(row)
