"""
ROC curves, partial AUC and the leave-one-family-out experiment.

The partial AUC is reported both raw (the integral of TPR over FPR in
``[0, fpr_max]``) and McClish-standardized, which maps a chance-level curve to
0.5 and a perfect one to 1.0.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from sklearn import metrics

from .config import PipelineConfig
from .dataset import DatasetRow, dga_families
from .domain_parse import SuffixSet
from .errors import EvaluationError
from .glrt import FEATURE_COUNT as GLRT_FEATURE_COUNT
from .logging_setup import get_logger
from .pipeline import featurize, parse_domains, score_features, train_pipeline
from .sidefeatures import DOM_OFFSET, WhoisSnapshot, whois_coverage

logger = get_logger("evaluation")

# Column of the domain-part GLRT log ratio in the stacked feature vector.
DOMAIN_LOG_RATIO_COLUMN = DOM_OFFSET + GLRT_FEATURE_COUNT - 1

REPORT_COLUMNS = (
    "family",
    "pauc_std",
    "pauc_raw",
    "n_train",
    "n_test",
    "n_train_dga",
    "n_train_clean",
    "n_test_dga",
    "n_test_clean",
    "auc",
    "pauc_glrt_dom_std",
)


@dataclass(frozen=True, eq=False)
class RocCurve:
    """(fpr, tpr) points from (0, 0) to (1, 1), both coordinates non-decreasing."""

    fpr: np.ndarray
    tpr: np.ndarray

    @property
    def points(self) -> List[Tuple[float, float]]:
        return [(float(x), float(y)) for x, y in zip(self.fpr, self.tpr)]

    def __len__(self) -> int:
        return self.fpr.size


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    family: str
    partial_auc_std: float
    partial_auc_raw: float
    roc: RocCurve
    counts: Dict[str, int] = field(default_factory=dict)
    full_auc: float = float("nan")
    partial_auc_glrt_domain: float = float("nan")

    @property
    def n_train(self) -> int:
        return self.counts.get("train_dga", 0) + self.counts.get("train_clean", 0)

    @property
    def n_test(self) -> int:
        return self.counts.get("test_dga", 0) + self.counts.get("test_clean", 0)


def roc_curve(scores: Sequence[float], labels: Sequence[int]) -> RocCurve:
    """
    ROC curve sweeping the threshold over the distinct scores in descending order.

    Equal scores flip together, so a run of ties is a single segment. Every
    distinct threshold is kept, including collinear ones.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.ndim != 1 or scores.shape != labels.shape:
        raise EvaluationError(f"{scores.size} scores but {labels.size} labels")
    if not np.all((labels == 0) | (labels == 1)):
        raise EvaluationError("labels must be 0 or 1")
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.size:
        raise EvaluationError("ROC needs both positive and negative examples")
    if not np.all(np.isfinite(scores)):
        raise EvaluationError("scores must be finite")

    fpr, tpr, _ = metrics.roc_curve(labels, scores, drop_intermediate=False)
    return RocCurve(fpr=fpr.astype(float), tpr=tpr.astype(float))


def full_auc(roc: RocCurve) -> float:
    return float(metrics.auc(roc.fpr, roc.tpr))


def partial_auc(roc: RocCurve, fpr_max: float = 0.01) -> Tuple[float, float]:
    """
    Raw and McClish-standardized area under the curve for FPR <= ``fpr_max``.

    Matches ``sklearn.metrics.roc_auc_score(..., max_fpr=fpr_max)`` for the
    standardized value.
    """
    if not 0.0 < fpr_max <= 1.0:
        raise EvaluationError(f"fpr_max must be in (0, 1], got {fpr_max}")
    if fpr_max == 1.0:
        raw = full_auc(roc)
    else:
        # roc.fpr ends at 1, so a point past fpr_max always exists
        stop = int(np.searchsorted(roc.fpr, fpr_max, side="right"))
        y_at = np.interp(fpr_max, roc.fpr[stop - 1 : stop + 1], roc.tpr[stop - 1 : stop + 1])
        x = np.append(roc.fpr[:stop], fpr_max)
        y = np.append(roc.tpr[:stop], y_at)
        raw = float(metrics.auc(x, y))

    min_area = fpr_max * fpr_max / 2.0
    max_area = fpr_max
    standardized = 0.5 * (1.0 + (raw - min_area) / (max_area - min_area))
    return raw, float(standardized)


def leave_one_out_split(
    rows: Sequence[DatasetRow], family: str, clean_holdout_fraction: float = 0.2, seed: int = 0
) -> Tuple[List[DatasetRow], List[DatasetRow]]:
    """
    Train on every DGA family but ``family`` plus most clean rows; test on
    ``family`` plus the held-out clean rows.

    Args:
        rows: The labelled dataset.
        family: The DGA family left out of training.
        clean_holdout_fraction: Share of clean rows moved to the test set.
        seed: Seed for choosing the held-out clean rows.

    Returns:
        ``(train, test)``, each in dataset order.
    """
    if family not in dga_families(rows):
        raise EvaluationError(f"unknown DGA family {family!r}")
    if not 0.0 < clean_holdout_fraction < 1.0:
        raise EvaluationError("clean_holdout_fraction must be in (0, 1)")

    clean_idx = [k for k, row in enumerate(rows) if not row.is_dga]
    n_test_clean = int(round(clean_holdout_fraction * len(clean_idx)))
    rng = np.random.default_rng(seed)
    held_out = {clean_idx[k] for k in rng.permutation(len(clean_idx))[:n_test_clean]}

    train: List[DatasetRow] = []
    test: List[DatasetRow] = []
    for k, row in enumerate(rows):
        if row.is_dga:
            (test if row.family == family else train).append(row)
        else:
            (test if k in held_out else train).append(row)
    return train, test


def _counts(train: Sequence[DatasetRow], test: Sequence[DatasetRow]) -> Dict[str, int]:
    return {
        "train_dga": sum(row.is_dga for row in train),
        "train_clean": sum(not row.is_dga for row in train),
        "test_dga": sum(row.is_dga for row in test),
        "test_clean": sum(not row.is_dga for row in test),
    }


def run_experiment(
    rows: Sequence[DatasetRow],
    family: str,
    config: PipelineConfig,
    suffixes: SuffixSet,
    snapshot: Optional[WhoisSnapshot] = None,
) -> ExperimentReport:
    """Split, train on the training half only and score the left-out family."""
    train, test = leave_one_out_split(
        rows, family, config.evaluation.clean_holdout_fraction, config.seed
    )
    counts = _counts(train, test)
    logger.info(
        f"Leave-one-out {family}: "
        f"train {counts['train_dga']} dga / {counts['train_clean']} clean, "
        f"test {counts['test_dga']} dga / {counts['test_clean']} clean"
    )
    if counts["test_clean"] == 0 or counts["train_clean"] == 0:
        raise EvaluationError("not enough clean rows to split into train and test")
    if counts["train_dga"] == 0:
        raise EvaluationError(f"no DGA rows left for training once {family!r} is held out")

    pipeline, summary = train_pipeline(train, suffixes, snapshot, config)
    for line in summary.lines():
        logger.info(line)

    domains = [row.domain for row in test]
    labels = np.array([1 if row.is_dga else 0 for row in test])
    reference_date = config.evaluation.reference_date
    features = featurize(pipeline, domains, snapshot, reference_date)
    scores = score_features(pipeline, features)
    roc = roc_curve(scores, labels)
    raw, standardized = partial_auc(roc, config.evaluation.fpr_max)

    glrt_scores = features[:, DOMAIN_LOG_RATIO_COLUMN]
    _, glrt_standardized = partial_auc(roc_curve(glrt_scores, labels), config.evaluation.fpr_max)

    parsed_test = zip(parse_domains(domains, pipeline.suffixes), [row.family for row in test])
    for coverage in whois_coverage(parsed_test, snapshot):
        logger.info(f"Test WHOIS coverage {coverage.family}: {coverage.matched}/{coverage.total}")

    report = ExperimentReport(
        family=family,
        partial_auc_std=standardized,
        partial_auc_raw=raw,
        roc=roc,
        counts=counts,
        full_auc=full_auc(roc),
        partial_auc_glrt_domain=glrt_standardized,
    )
    logger.info(f"✅ {family}: partial AUC {standardized:.4f} (raw {raw:.6f})")
    return report


def write_report_table(reports: Sequence[ExperimentReport], path: Union[str, Path]) -> None:
    """Tab-separated summary, one line per left-out family."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for r in reports:
            writer.writerow(
                [
                    r.family,
                    f"{r.partial_auc_std:.6f}",
                    f"{r.partial_auc_raw:.8f}",
                    r.n_train,
                    r.n_test,
                    r.counts.get("train_dga", 0),
                    r.counts.get("train_clean", 0),
                    r.counts.get("test_dga", 0),
                    r.counts.get("test_clean", 0),
                    f"{r.full_auc:.6f}",
                    f"{r.partial_auc_glrt_domain:.6f}",
                ]
            )


def write_roc_csv(roc: RocCurve, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["fpr", "tpr"])
        for fpr, tpr in roc.points:
            writer.writerow([f"{fpr:.17g}", f"{tpr:.17g}"])


def roc_csv_name(family: str) -> str:
    safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in family)
    return f"roc_{safe}.csv"
