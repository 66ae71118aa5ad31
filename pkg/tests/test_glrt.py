"""
Tests for the likelihood ratio test over two character models.

This module tests:
- Posterior / log-ratio identities
- Identical class models giving posterior 0.5
- The classify threshold
- The six-value feature block, including absent parts
- The DGA-GLRT v1 text format
"""

import math
import random

import numpy as np
import pytest
from scipy.special import expit

from dga_detector.charlm import CharVocab, LstmLangModel, sequence_log_likelihood
from dga_detector.errors import VocabularyError
from dga_detector.glrt import (
    LABEL_DGA,
    LABEL_NON_DGA,
    GlrtFeatures,
    GlrtModel,
    classify,
    extract_features,
    extract_features_batch,
    glrt_from_lines,
    glrt_to_lines,
    log_likelihood_ratio,
    posterior_dga,
)
from dga_detector.textformat import LineReader

CHARS = "abcdefgh"


@pytest.fixture
def glrt(make_random_model):
    """
    Two differently initialized class models over the same vocabulary.

    Args:
        make_random_model: Random model factory
    """
    return GlrtModel(make_random_model(CHARS, 5, seed=1), make_random_model(CHARS, 5, seed=2))


def _random_strings(count, seed):
    rng = random.Random(seed)
    return ["".join(rng.choice(CHARS) for _ in range(rng.randint(1, 12))) for _ in range(count)]


def test_posterior_is_logistic_of_log_ratio(glrt):
    """
    Test p(dga | s) = logistic(ln Λ(s)) on random strings.

    Args:
        glrt: Random GLRT model
    """
    for s in _random_strings(50, seed=1):
        assert posterior_dga(glrt, s) == pytest.approx(
            float(expit(log_likelihood_ratio(glrt, s))), abs=1e-12
        )


def test_log_ratio_is_difference_of_log_likelihoods(glrt):
    """
    Test that ln Λ matches the two class log-likelihoods.

    Args:
        glrt: Random GLRT model
    """
    s = "deadbeef"
    expected = sequence_log_likelihood(glrt.model_dga, s) - sequence_log_likelihood(
        glrt.model_nondga, s
    )
    assert log_likelihood_ratio(glrt, s) == pytest.approx(expected, abs=1e-9)


def test_identical_models_are_undecided(make_random_model):
    """
    Test that identical class models give posterior 0.5 and classify(eta=1) says DGA.

    Args:
        make_random_model: Random model factory
    """
    model = make_random_model(CHARS, 4, seed=7)
    same = GlrtModel(model, model.copy())
    for s in _random_strings(100, seed=2):
        assert posterior_dga(same, s) == 0.5
        assert classify(same, s, 1.0) == LABEL_DGA


def test_classify_agrees_with_posterior_at_eta_one(glrt):
    """
    Test that eta = 1 is the posterior >= 0.5 decision.

    Args:
        glrt: Random GLRT model
    """
    for s in _random_strings(100, seed=3):
        expected = LABEL_DGA if posterior_dga(glrt, s) >= 0.5 else LABEL_NON_DGA
        assert classify(glrt, s, 1.0) == expected


def test_classify_threshold_moves_decision(glrt):
    """
    Test that raising eta above Λ(s) flips the decision.

    Args:
        glrt: Random GLRT model
    """
    s = "abcabc"
    ratio = math.exp(log_likelihood_ratio(glrt, s))
    assert classify(glrt, s, ratio * 0.5) == LABEL_DGA
    assert classify(glrt, s, ratio * 2.0) == LABEL_NON_DGA


@pytest.mark.parametrize("eta", [0.0, -1.0])
def test_classify_rejects_non_positive_eta(glrt, eta):
    """
    Test that eta must be positive.

    Args:
        glrt: Random GLRT model
        eta: Invalid threshold
    """
    with pytest.raises(ValueError):
        classify(glrt, "abc", eta)


def test_models_must_share_vocabulary(make_random_model):
    """
    Test that class models over different vocabularies are refused.

    Args:
        make_random_model: Random model factory
    """
    with pytest.raises(VocabularyError):
        GlrtModel(make_random_model("ab", 2, seed=0), make_random_model("abc", 2, seed=0))


def test_feature_block_layout(glrt):
    """
    Test the order and consistency of the six GLRT features.

    Args:
        glrt: Random GLRT model
    """
    block = extract_features(glrt, "badcafe").to_array()
    present, ll_nondga, ll_dga, post_nondga, post_dga, log_ratio = block
    assert present == 1.0
    assert log_ratio == pytest.approx(ll_dga - ll_nondga, abs=1e-12)
    assert post_dga + post_nondga == pytest.approx(1.0, abs=1e-12)
    assert post_dga == pytest.approx(posterior_dga(glrt, "badcafe"), abs=1e-12)


def test_absent_part_gives_zero_block(glrt):
    """
    Test that a missing subdomain contributes six zeros.

    Args:
        glrt: Random GLRT model
    """
    np.testing.assert_array_equal(extract_features(glrt, None).to_array(), np.zeros(6))
    assert GlrtFeatures.absent().present is False


def test_batch_features_match_single(glrt):
    """
    Test batched extraction, with absent parts mixed in, against one-at-a-time extraction.

    Args:
        glrt: Random GLRT model
    """
    parts = ["abc", None, "hhhh", "", None, "fedcba"]
    batch = extract_features_batch(glrt, parts)
    for part, features in zip(parts, batch):
        np.testing.assert_allclose(
            features.to_array(), extract_features(glrt, part).to_array(), atol=1e-9
        )


def test_uniform_models_give_zero_ratio():
    """
    Test that two zero-parameter models are exactly undecided.
    """
    vocab = CharVocab(tuple(CHARS))
    uniform = GlrtModel(LstmLangModel.zeros(vocab, 3), LstmLangModel.zeros(vocab, 3))
    assert log_likelihood_ratio(uniform, "abcdefgh") == 0.0


def test_glrt_text_round_trip(glrt):
    """
    Test that both class models survive serialization exactly.

    Args:
        glrt: Random GLRT model
    """
    lines = glrt_to_lines(glrt)
    assert lines[0] == "DGA-GLRT v1"
    loaded = glrt_from_lines(LineReader(lines))
    for s in _random_strings(10, seed=4):
        assert log_likelihood_ratio(loaded, s) == log_likelihood_ratio(glrt, s)
