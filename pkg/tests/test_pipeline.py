"""
Tests for the full stacked detector.

This module tests:
- Training on the synthetic fixture with tiny models
- Scoring with and without a WHOIS snapshot
- The DGA-STACK v1 model file: exact reload and byte-identical retraining
- Uniform fallback models for parts with no training strings
"""

import logging

import numpy as np
import pytest

from dga_detector.dataset import DatasetRow, load_dataset
from dga_detector.domain_parse import load_suffix_file
from dga_detector.errors import ConfigError, ModelFormatError
from dga_detector.pipeline import (
    STACK_HEADER,
    featurize,
    load_pipeline,
    pipeline_from_lines,
    pipeline_to_lines,
    save_pipeline,
    score_domains,
    train_pipeline,
)
from dga_detector.sidefeatures import FEATURE_DIM, WHOIS_OFFSET, ingest_whois_snapshot

SAMPLE_DOMAINS = ["www.garden12.com", "qzxkvjwpt.ru", "applestone.com", "mail.river7.co.uk"]


@pytest.fixture
def fixture_data(synthetic_fixture):
    """
    Loaded rows, suffix list and WHOIS snapshot of the synthetic fixture.

    Args:
        synthetic_fixture: Paths of the synthetic fixture files
    """
    return (
        load_dataset(synthetic_fixture.dataset),
        load_suffix_file(synthetic_fixture.suffixes),
        ingest_whois_snapshot(synthetic_fixture.whois),
    )


@pytest.fixture
def trained(fixture_data, tiny_pipeline_config):
    """
    A pipeline trained on the synthetic fixture, with its training summary.

    Args:
        fixture_data: Rows, suffixes and snapshot
        tiny_pipeline_config: Fast pipeline configuration
    """
    rows, suffixes, snapshot = fixture_data
    return train_pipeline(rows, suffixes, snapshot, tiny_pipeline_config)


def test_training_summary(trained, fixture_data):
    """
    Test the reported counts, models and WHOIS coverage.

    Args:
        trained: Pipeline and summary
        fixture_data: Rows, suffixes and snapshot
    """
    pipeline, summary = trained
    assert (summary.n_dga, summary.n_clean) == (30, 30)
    assert summary.feature_dim == FEATURE_DIM
    assert [m.name for m in summary.models] == [
        "subdomain-dga",
        "subdomain-clean",
        "domain-dga",
        "domain-clean",
    ]
    coverage = {c.family: c for c in summary.whois}
    assert coverage["clean"].matched == coverage["clean"].total == 30
    assert coverage["randchar"].matched == 0
    assert summary.rss_bytes > 0
    assert any(line.startswith("resident memory") for line in summary.lines())
    assert pipeline.glrt_domain.model_dga.vocab == pipeline.glrt_subdomain.model_nondga.vocab


def test_missing_subdomains_fall_back_to_uniform_model(trained):
    """
    Test that DGA rows without subdomains give a zero-parameter subdomain model.

    Args:
        trained: Pipeline and summary
    """
    pipeline, summary = trained
    sub_dga = summary.models[0]
    assert sub_dga.n_strings == 0 and sub_dga.epochs_run == 0
    assert all(not np.any(v) for v in pipeline.glrt_subdomain.model_dga.params.values())


def test_scores_are_probabilities(trained, fixture_data, reference_date):
    """
    Test that every score lies in [0, 1], with and without WHOIS.

    Args:
        trained: Pipeline and summary
        fixture_data: Rows, suffixes and snapshot
        reference_date: Snapshot reference date
    """
    pipeline, _ = trained
    _, _, snapshot = fixture_data
    with_whois = score_domains(pipeline, SAMPLE_DOMAINS, snapshot, reference_date)
    without = score_domains(pipeline, SAMPLE_DOMAINS)
    for scores in (with_whois, without):
        assert scores.shape == (len(SAMPLE_DOMAINS),)
        assert np.all((scores >= 0.0) & (scores <= 1.0))
    assert score_domains(pipeline, []).shape == (0,)


def test_featurize_without_snapshot_zeroes_whois(trained):
    """
    Test that the WHOIS block is all zeros when no snapshot is given.

    Args:
        trained: Pipeline and summary
    """
    pipeline, _ = trained
    features = featurize(pipeline, SAMPLE_DOMAINS)
    assert features.shape == (len(SAMPLE_DOMAINS), FEATURE_DIM)
    assert not np.any(features[:, WHOIS_OFFSET:])
    assert not np.any(features[1, :6])


def test_snapshot_needs_reference_date(trained, fixture_data):
    """
    Test that WHOIS features cannot be computed without a reference date.

    Args:
        trained: Pipeline and summary
        fixture_data: Rows, suffixes and snapshot
    """
    pipeline, _ = trained
    with pytest.raises(ConfigError):
        score_domains(pipeline, SAMPLE_DOMAINS, fixture_data[2], None)


def test_save_and_load_give_identical_scores(trained, tmp_path):
    """
    Test that a reloaded model scores exactly like the trained one.

    Args:
        trained: Pipeline and summary
        tmp_path: pytest's temporary directory
    """
    pipeline, _ = trained
    path = tmp_path / "model.txt"
    save_pipeline(pipeline, path)
    assert path.read_text(encoding="utf-8").startswith(STACK_HEADER + "\n")

    loaded = load_pipeline(path)
    np.testing.assert_array_equal(
        score_domains(loaded, SAMPLE_DOMAINS), score_domains(pipeline, SAMPLE_DOMAINS)
    )
    assert loaded.suffixes == pipeline.suffixes
    assert loaded.tld_encoder == pipeline.tld_encoder


def test_same_seed_gives_byte_identical_model(fixture_data, tiny_pipeline_config, tmp_path):
    """
    Test that two trainings with the same seed write the same file.

    Args:
        fixture_data: Rows, suffixes and snapshot
        tiny_pipeline_config: Fast pipeline configuration
        tmp_path: pytest's temporary directory
    """
    rows, suffixes, snapshot = fixture_data
    paths = [tmp_path / "a.txt", tmp_path / "b.txt"]
    for path in paths:
        pipeline, _ = train_pipeline(rows, suffixes, snapshot, tiny_pipeline_config)
        save_pipeline(pipeline, path)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_truncated_model_file_is_rejected(trained):
    """
    Test that a model file cut short raises ModelFormatError.

    Args:
        trained: Pipeline and summary
    """
    pipeline, _ = trained
    lines = pipeline_to_lines(pipeline)
    with pytest.raises(ModelFormatError):
        pipeline_from_lines(lines[: len(lines) // 2])
    with pytest.raises(ModelFormatError):
        pipeline_from_lines(["DGA-STACK v2"] + lines[1:])


def test_training_without_dga_subdomains_warns(suffixes, tiny_pipeline_config, caplog):
    """
    Test the warning logged when a part has no training strings.

    Args:
        suffixes: Parsed test suffix list
        tiny_pipeline_config: Fast pipeline configuration
        caplog: pytest's log capture fixture
    """
    rows = [DatasetRow(f"qzx{k}vb.ru", "dga", "randchar") for k in range(6)] + [
        DatasetRow(f"www.garden{k}.com", "clean", "clean") for k in range(6)
    ]
    with caplog.at_level(logging.WARNING, logger="DgaDetector"):
        train_pipeline(rows, suffixes, None, tiny_pipeline_config)
    assert "No training strings for subdomain-dga" in caplog.text
