"""
The full stacked detector.

Training parses every name into subdomain / domain / TLD, trains four character
language models (subdomain and domain, each on DGA and on clean strings) over one
shared vocabulary, builds the 274-dimensional feature rows, fits PCA whitening and
finally the logistic regression. The trained pipeline is stored in a single
``DGA-STACK v1`` text file.
"""

from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import psutil

from .charlm import LstmLangModel, build_vocab, train_with_history
from .config import PipelineConfig
from .dataset import DatasetRow
from .domain_parse import (
    ParsedDomain,
    SuffixSet,
    TldEncoder,
    build_tld_encoder,
    encode_tld,
    load_suffix_list,
    split_domain,
)
from .errors import ConfigError, ModelFormatError
from .glrt import GlrtModel, extract_features_batch, glrt_from_lines, glrt_to_lines
from .logging_setup import get_logger
from .sidefeatures import (
    FEATURE_DIM,
    WhiteningTransform,
    WhoisCoverage,
    WhoisSnapshot,
    apply_whitening,
    assemble,
    extract_whois_features,
    fit_whitening,
    lookup_record,
    whitening_from_lines,
    whitening_to_lines,
    whois_coverage,
)
from .stacker import (
    LogisticModel,
    logistic_from_lines,
    logistic_to_lines,
    predict_proba,
    train_logistic,
)
from .textformat import LineReader

logger = get_logger("pipeline")

STACK_HEADER = "DGA-STACK v1"
# Seed offsets keep the four language models' random streams apart.
_SEED_OFFSETS = {
    ("subdomain", True): 1,
    ("subdomain", False): 2,
    ("domain", True): 3,
    ("domain", False): 4,
}


@dataclass(frozen=True, eq=False)
class DgaPipeline:
    suffixes: SuffixSet
    tld_encoder: TldEncoder
    glrt_subdomain: GlrtModel
    glrt_domain: GlrtModel
    whitening: WhiteningTransform
    logistic: LogisticModel


@dataclass(frozen=True)
class ModelSummary:
    name: str
    n_strings: int
    epochs_run: int
    best_validation_loss: float
    validation_losses: Tuple[float, ...] = ()


@dataclass
class TrainingSummary:
    models: List[ModelSummary] = field(default_factory=list)
    vocab_size: int = 0
    feature_dim: int = FEATURE_DIM
    n_dga: int = 0
    n_clean: int = 0
    n_tlds: int = 0
    whois: List[WhoisCoverage] = field(default_factory=list)
    rss_bytes: int = 0

    def lines(self) -> List[str]:
        out = [
            f"rows: {self.n_dga} dga, {self.n_clean} clean",
            f"vocabulary size: {self.vocab_size}",
            f"feature dimension: {self.feature_dim} (TLD slots used: {self.n_tlds})",
        ]
        for model in self.models:
            losses = " ".join(f"{v:.4f}" for v in model.validation_losses)
            out.append(
                f"model {model.name}: {model.n_strings} strings, {model.epochs_run} epochs, "
                f"best validation loss {model.best_validation_loss:.4f}"
                + (f" [{losses}]" if losses else "")
            )
        for coverage in self.whois:
            out.append(
                f"whois {coverage.family}: {coverage.matched}/{coverage.total} matched "
                f"({100.0 * coverage.fraction:.1f}%)"
            )
        out.append(f"resident memory: {self.rss_bytes / 2**20:.1f} MiB")
        return out


def parse_domains(domains: Sequence[str], suffixes: SuffixSet) -> List[ParsedDomain]:
    return [split_domain(domain, suffixes) for domain in domains]


def _part(parsed: ParsedDomain, part: str) -> Optional[str]:
    return parsed.subdomain if part == "subdomain" else parsed.domain


def _train_glrt(
    parsed: Sequence[ParsedDomain],
    is_dga: Sequence[bool],
    part: str,
    vocab,
    config: PipelineConfig,
    summary: TrainingSummary,
) -> GlrtModel:
    models = {}
    for dga in (True, False):
        name = f"{part}-{'dga' if dga else 'clean'}"
        corpus = [
            _part(p, part) for p, flag in zip(parsed, is_dga) if flag == dga and _part(p, part)
        ]
        if not corpus:
            logger.warning(f"⚠️ No training strings for {name}; using a uniform model")
            models[dga] = LstmLangModel.zeros(vocab, config.train.hidden_size)
            summary.models.append(ModelSummary(name, 0, 0, float("nan")))
            continue

        train_config = replace(config.train, seed=config.seed + _SEED_OFFSETS[(part, dga)])
        model, history = train_with_history(corpus, train_config, vocab, name=name)
        models[dga] = model
        summary.models.append(
            ModelSummary(
                name,
                len(corpus),
                history.epochs_run,
                history.best_validation_loss,
                tuple(history.validation_losses),
            )
        )
    return GlrtModel(model_dga=models[True], model_nondga=models[False])


def _feature_rows(
    parsed: Sequence[ParsedDomain],
    glrt_subdomain: GlrtModel,
    glrt_domain: GlrtModel,
    tld_encoder: TldEncoder,
    snapshot: Optional[WhoisSnapshot],
    reference_date: Optional[date],
) -> np.ndarray:
    if snapshot is not None and reference_date is None:
        raise ConfigError("a reference date is required when a WHOIS snapshot is used")

    sub = extract_features_batch(glrt_subdomain, [p.subdomain for p in parsed])
    dom = extract_features_batch(glrt_domain, [p.domain for p in parsed])
    rows = np.empty((len(parsed), FEATURE_DIM))
    for k, p in enumerate(parsed):
        whois = extract_whois_features(lookup_record(snapshot, p), reference_date)
        rows[k] = assemble(sub[k], dom[k], encode_tld(p.tld, tld_encoder), whois)
    return rows


def featurize(
    pipeline: DgaPipeline,
    domains: Sequence[str],
    snapshot: Optional[WhoisSnapshot] = None,
    reference_date: Optional[date] = None,
) -> np.ndarray:
    """Un-whitened 274-dimensional feature rows for raw domain names."""
    parsed = parse_domains(domains, pipeline.suffixes)
    return _feature_rows(
        parsed,
        pipeline.glrt_subdomain,
        pipeline.glrt_domain,
        pipeline.tld_encoder,
        snapshot,
        reference_date,
    )


def train_pipeline(
    rows: Sequence[DatasetRow],
    suffixes: SuffixSet,
    snapshot: Optional[WhoisSnapshot],
    config: PipelineConfig,
) -> Tuple[DgaPipeline, TrainingSummary]:
    """Train every stage on ``rows``; nothing outside ``rows`` is looked at except WHOIS."""
    reference_date = config.evaluation.reference_date
    parsed = parse_domains([row.domain for row in rows], suffixes)
    is_dga = [row.is_dga for row in rows]
    summary = TrainingSummary(n_dga=sum(is_dga), n_clean=len(rows) - sum(is_dga))

    strings = [s for p in parsed for s in (p.subdomain, p.domain) if s]
    vocab = build_vocab(strings)
    summary.vocab_size = vocab.size
    logger.info(f"Shared vocabulary: {vocab.size} symbols from {len(strings)} strings")

    glrt_subdomain = _train_glrt(parsed, is_dga, "subdomain", vocab, config, summary)
    glrt_domain = _train_glrt(parsed, is_dga, "domain", vocab, config, summary)

    tld_encoder = build_tld_encoder(parsed)
    summary.n_tlds = len(tld_encoder.top_tlds)

    features = _feature_rows(
        parsed, glrt_subdomain, glrt_domain, tld_encoder, snapshot, reference_date
    )
    whitening = fit_whitening(features, config.whitening_epsilon)
    labels = np.array(is_dga, dtype=float)
    logistic = train_logistic(apply_whitening(whitening, features), labels, config.stacker)

    summary.whois = whois_coverage(zip(parsed, [row.family for row in rows]), snapshot)
    summary.rss_bytes = psutil.Process().memory_info().rss
    logger.info(f"✅ Pipeline trained on {len(rows)} rows")
    return (
        DgaPipeline(suffixes, tld_encoder, glrt_subdomain, glrt_domain, whitening, logistic),
        summary,
    )


def score_domains(
    pipeline: DgaPipeline,
    domains: Sequence[str],
    snapshot: Optional[WhoisSnapshot] = None,
    reference_date: Optional[date] = None,
) -> np.ndarray:
    """P(malicious) for each name. Without a snapshot every WHOIS block is zero."""
    if not domains:
        return np.empty(0)
    return score_features(pipeline, featurize(pipeline, domains, snapshot, reference_date))


def score_features(pipeline: DgaPipeline, features: np.ndarray) -> np.ndarray:
    whitened = apply_whitening(pipeline.whitening, np.atleast_2d(features))
    return np.atleast_1d(predict_proba(pipeline.logistic, whitened))


def pipeline_to_lines(pipeline: DgaPipeline) -> List[str]:
    rules = pipeline.suffixes.to_lines()
    tlds = list(pipeline.tld_encoder.top_tlds)
    lines = [STACK_HEADER, f"suffixes {len(rules)}", *rules, f"tld_encoder {len(tlds)}", *tlds]
    lines += ["subdomain"] + glrt_to_lines(pipeline.glrt_subdomain)
    lines += ["domain"] + glrt_to_lines(pipeline.glrt_domain)
    lines += whitening_to_lines(pipeline.whitening)
    lines += logistic_to_lines(pipeline.logistic)
    lines.append("end")
    return lines


def pipeline_from_lines(lines: Sequence[str]) -> DgaPipeline:
    reader = LineReader(lines)
    reader.expect(STACK_HEADER)

    n_rules = reader.int_field("suffixes")
    rule_lines = [reader.next() for _ in range(n_rules)]
    suffixes = load_suffix_list("\n".join(rule_lines))

    n_tlds = reader.int_field("tld_encoder")
    try:
        tld_encoder = TldEncoder(tuple(reader.next() for _ in range(n_tlds)))
    except ValueError as exc:
        raise reader.error(str(exc)) from None

    reader.expect("subdomain")
    glrt_subdomain = glrt_from_lines(reader)
    reader.expect("domain")
    glrt_domain = glrt_from_lines(reader)
    whitening = whitening_from_lines(reader)
    logistic = logistic_from_lines(reader)
    reader.expect("end")

    if whitening.dim != FEATURE_DIM or logistic.dim != FEATURE_DIM:
        raise ModelFormatError(
            f"model expects {FEATURE_DIM} features, file has {whitening.dim}/{logistic.dim}"
        )
    return DgaPipeline(suffixes, tld_encoder, glrt_subdomain, glrt_domain, whitening, logistic)


def save_pipeline(pipeline: DgaPipeline, path: Union[str, Path]) -> None:
    Path(path).write_text("\n".join(pipeline_to_lines(pipeline)) + "\n", encoding="utf-8")
    logger.info(f"Saved model to {path}")


def load_pipeline(path: Union[str, Path]) -> DgaPipeline:
    text = Path(path).read_text(encoding="utf-8")
    pipeline = pipeline_from_lines(text.splitlines())
    logger.info(f"Loaded model from {path}")
    return pipeline
