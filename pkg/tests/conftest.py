"""
Pytest configuration and shared fixtures for dga_detector tests.

This module provides:
- Environment isolation and logging reset fixtures
- A small public suffix list and wordlist
- Vocabulary and random model factories
- Tiny training configurations and synthetic fixture files
"""

import logging
import os

import numpy as np
import pytest

from dga_detector.charlm import CharVocab, LstmLangModel, TrainConfig, build_vocab
from dga_detector.config import EvalConfig, PipelineConfig
from dga_detector.domain_parse import load_suffix_list
from dga_detector.smashword import build_ngram_index
from dga_detector.stacker import StackerConfig
from dga_detector.synth import FIXTURE_REFERENCE_DATE, generate_fixture

SUFFIX_TEXT = """\
// Test public suffix list
// ===BEGIN ICANN DOMAINS===
com
net
org
info
ru
de
uk
co.uk
*.ck
!www.ck
// ===END ICANN DOMAINS===
// ===BEGIN PRIVATE DOMAINS===
blogspot.com
// ===END PRIVATE DOMAINS===
"""

TEST_WORDS = [
    "apple", "banana", "cherry", "garden", "window", "summer", "winter", "bridge",
    "forest", "market", "silver", "golden", "castle", "rocket", "planet", "yellow",
    "orange", "purple", "flower", "butter", "letter", "number", "people", "circle",
    "dragon", "mirror", "pencil", "candle", "button", "ticket", "island", "mountain",
    "river", "ocean", "thunder", "shadow", "family", "school", "office", "travel",
    "coffee", "cookie", "pocket", "rabbit", "turtle", "monkey", "spring", "autumn",
    "stream", "valley",
]  # fmt: skip

DOMAIN_CHARS = "abcdefghijklmnopqrstuvwxyz0123456789-"
REFERENCE_DATE = FIXTURE_REFERENCE_DATE


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch):
    """
    Remove DGA_* variables so the developer's shell cannot change test outcomes.

    Args:
        monkeypatch: pytest's monkeypatch fixture

    Yields:
        monkeypatch: the same fixture, for tests that set variables themselves
    """
    for key in list(os.environ):
        if key.startswith("DGA_"):
            monkeypatch.delenv(key, raising=False)
    yield monkeypatch


@pytest.fixture(autouse=True)
def reset_logging():
    """
    Reset logging configuration between tests.

    This auto-use fixture ensures that logging state doesn't leak between tests.
    """
    root_logger = logging.getLogger()
    original_handlers = root_logger.handlers[:]
    original_level = root_logger.level

    yield

    root_logger.handlers = original_handlers
    root_logger.level = original_level


@pytest.fixture
def suffix_text():
    """Return the text of a small public suffix list with wildcard and exception rules."""
    return SUFFIX_TEXT


@pytest.fixture
def suffixes():
    """Return the parsed test suffix list."""
    return load_suffix_list(SUFFIX_TEXT)


@pytest.fixture
def suffix_file(tmp_path):
    """
    Write the test suffix list to a file.

    Args:
        tmp_path: pytest's temporary directory

    Returns:
        Path: the suffix list file
    """
    path = tmp_path / "suffixes.dat"
    path.write_text(SUFFIX_TEXT, encoding="utf-8")
    return path


@pytest.fixture
def wordlist():
    """Return the 50-word test wordlist."""
    return list(TEST_WORDS)


@pytest.fixture
def ngram_index(wordlist):
    """Return an n-gram index over the test wordlist."""
    return build_ngram_index(wordlist)


@pytest.fixture
def domain_vocab():
    """Return a vocabulary over lowercase letters, digits and the hyphen."""
    return build_vocab([DOMAIN_CHARS])


@pytest.fixture
def make_random_model():
    """
    Factory for models with random parameters.

    Returns:
        callable: ``(vocab_or_chars, hidden_size, seed, scale=0.5) -> LstmLangModel``
    """

    def factory(vocab, hidden_size, seed, scale=0.5):
        if isinstance(vocab, str):
            vocab = CharVocab(tuple(vocab))
        rng = np.random.default_rng(seed)
        model = LstmLangModel.zeros(vocab, hidden_size)
        for name, value in model.params.items():
            model.params[name] = rng.uniform(-scale, scale, size=value.shape)
        return model

    return factory


@pytest.fixture
def tiny_train_config():
    """Return a charlm configuration that trains in well under a second."""
    return TrainConfig(
        epochs=2, hidden_size=4, batch_size=8, early_stopping_patience=2, seed=3
    )


@pytest.fixture
def tiny_pipeline_config(tiny_train_config):
    """Return a full pipeline configuration sized for unit tests."""
    return PipelineConfig(
        train=tiny_train_config,
        stacker=StackerConfig(max_iterations=300),
        evaluation=EvalConfig(reference_date=REFERENCE_DATE),
    )


@pytest.fixture
def synthetic_fixture(tmp_path):
    """
    Write a small synthetic fixture (dataset, WHOIS, wordlist, suffix list).

    Args:
        tmp_path: pytest's temporary directory

    Returns:
        FixturePaths: paths of the four fixture files
    """
    return generate_fixture(tmp_path / "fixture", n_dga=30, n_clean=30, seed=0)


@pytest.fixture
def reference_date():
    """Return the reference date matching the synthetic WHOIS snapshot."""
    return REFERENCE_DATE
