"""
Exception hierarchy for the DGA detector.

Every failure the package raises on purpose derives from DgaDetectorError so the
CLI can tell expected errors (bad input, bad config) from bugs. Value-like
failures also derive from ValueError.
"""

from typing import Optional


class DgaDetectorError(Exception):
    """Base class for all errors raised by dga_detector."""


class SuffixListError(DgaDetectorError, ValueError):
    """A public-suffix list line could not be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DomainParseError(DgaDetectorError, ValueError):
    """A domain name is empty or contains characters outside [a-z0-9._-]."""


class VocabularyError(DgaDetectorError, ValueError):
    """Vocabulary construction or index lookup failed."""


class TrainingError(DgaDetectorError):
    """Model training failed (divergence, bad corpus, single class)."""

    def __init__(self, message: str, epoch: Optional[int] = None):
        if epoch is not None:
            message = f"epoch {epoch}: {message}"
        super().__init__(message)
        self.epoch = epoch


class DimensionError(DgaDetectorError, ValueError):
    """A vector or matrix has the wrong shape."""


class ModelFormatError(DgaDetectorError, ValueError):
    """A serialized model file is malformed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DatasetError(DgaDetectorError, ValueError):
    """A dataset file or dataset row is invalid."""


class ConfigError(DgaDetectorError, ValueError):
    """A configuration key or value is invalid."""


class EvaluationError(DgaDetectorError, ValueError):
    """An evaluation input is invalid (single class, bad FPR cap, unknown family)."""
