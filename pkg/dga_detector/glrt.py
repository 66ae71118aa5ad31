"""
Generalized likelihood ratio test over two character language models.

One model is trained on DGA strings, the other on clean strings. For a string x
the log-likelihood ratio is ln p(x|dga) - ln p(x|clean). Everything here stays in
log space because raw likelihoods of 30+ characters underflow float64.

A string is called DGA when Λ(x) >= η. The stacked model never uses η; it
only matters when the ratio is used on its own.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import expit

from .charlm import LstmLangModel, model_from_lines, model_to_lines, score_strings
from .errors import VocabularyError
from .textformat import LineReader

LABEL_DGA = "DGA"
LABEL_NON_DGA = "NON-DGA"

GLRT_HEADER = "DGA-GLRT v1"
FEATURE_COUNT = 6


@dataclass(frozen=True)
class GlrtModel:
    model_dga: LstmLangModel
    model_nondga: LstmLangModel

    def __post_init__(self):
        if self.model_dga.vocab != self.model_nondga.vocab:
            raise VocabularyError("GLRT class models must share one vocabulary")

    @property
    def vocab(self):
        return self.model_dga.vocab


@dataclass(frozen=True)
class GlrtFeatures:
    """The six-value block one GLRT model contributes to the stacked features."""

    present: bool
    loglik_nondga: float = 0.0
    loglik_dga: float = 0.0
    post_nondga: float = 0.0
    post_dga: float = 0.0
    log_ratio: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array(
            [
                1.0 if self.present else 0.0,
                self.loglik_nondga,
                self.loglik_dga,
                self.post_nondga,
                self.post_dga,
                self.log_ratio,
            ]
        )

    @classmethod
    def absent(cls) -> "GlrtFeatures":
        return cls(present=False)


def _features_from_logliks(loglik_dga: float, loglik_nondga: float) -> GlrtFeatures:
    log_ratio = loglik_dga - loglik_nondga
    post_dga = float(expit(log_ratio))
    return GlrtFeatures(
        present=True,
        loglik_nondga=loglik_nondga,
        loglik_dga=loglik_dga,
        post_nondga=float(expit(-log_ratio)),
        post_dga=post_dga,
        log_ratio=log_ratio,
    )


def log_likelihood_ratio(g: GlrtModel, s: str) -> float:
    """ln Λ(s) = ln p(s|θ_dga) - ln p(s|θ_non-dga)."""
    return extract_features_batch(g, [s])[0].log_ratio


def posterior_dga(g: GlrtModel, s: str) -> float:
    """p(θ_dga | s) with equal priors, i.e. the logistic of the log ratio."""
    return float(expit(log_likelihood_ratio(g, s)))


def classify(g: GlrtModel, s: str, eta: float) -> str:
    """DGA iff Λ(s) >= eta."""
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return LABEL_DGA if log_likelihood_ratio(g, s) >= math.log(eta) else LABEL_NON_DGA


def extract_features(g: GlrtModel, part: Optional[str]) -> GlrtFeatures:
    """GLRT features for one string; an absent part yields the all-zero block."""
    if part is None:
        return GlrtFeatures.absent()
    return extract_features_batch(g, [part])[0]


def extract_features_batch(g: GlrtModel, parts: Sequence[Optional[str]]) -> List[GlrtFeatures]:
    """``extract_features`` for many parts, scoring the present ones in batches."""
    present = [k for k, part in enumerate(parts) if part is not None]
    features = [GlrtFeatures.absent()] * len(parts)
    if not present:
        return features

    strings = [parts[k] for k in present]
    loglik_dga = score_strings(g.model_dga, strings)
    loglik_nondga = score_strings(g.model_nondga, strings)
    for k, a, b in zip(present, loglik_dga, loglik_nondga):
        features[k] = _features_from_logliks(float(a), float(b))
    return features


def glrt_to_lines(g: GlrtModel) -> List[str]:
    return [GLRT_HEADER] + model_to_lines(g.model_dga) + model_to_lines(g.model_nondga)


def glrt_from_lines(reader: LineReader) -> GlrtModel:
    reader.expect(GLRT_HEADER)
    model_dga = model_from_lines(reader)
    model_nondga = model_from_lines(reader)
    try:
        return GlrtModel(model_dga, model_nondga)
    except VocabularyError as exc:
        raise reader.error(str(exc)) from None
