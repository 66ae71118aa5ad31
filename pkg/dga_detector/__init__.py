"""
DGA Detector

Flags algorithmically generated domain names. Character-level LSTM language
models score the subdomain and domain parts of a name, a likelihood ratio test
turns those scores into features, and a logistic regression stacks them with
TLD and WHOIS side information.
"""

__version__ = "0.1.0"
__author__ = "DGA Detector Contributors"
__license__ = "MIT"

from .config import PipelineConfig, load_config
from .domain_parse import ParsedDomain, SuffixSet, load_suffix_file, load_suffix_list, split_domain
from .errors import DgaDetectorError
from .evaluation import ExperimentReport, RocCurve, partial_auc, roc_curve, run_experiment
from .pipeline import DgaPipeline, load_pipeline, save_pipeline, score_domains, train_pipeline
from .smashword import build_ngram_index, char_entropy, smashword_score

__all__ = [
    "DgaDetectorError",
    "DgaPipeline",
    "ExperimentReport",
    "ParsedDomain",
    "PipelineConfig",
    "RocCurve",
    "SuffixSet",
    "__version__",
    "build_ngram_index",
    "char_entropy",
    "load_config",
    "load_pipeline",
    "load_suffix_file",
    "load_suffix_list",
    "partial_auc",
    "roc_curve",
    "run_experiment",
    "save_pipeline",
    "score_domains",
    "smashword_score",
    "split_domain",
    "train_pipeline",
]
