"""
WHOIS side information, the stacked feature vector and PCA whitening.

WHOIS data comes from an offline snapshot (one tab-separated record per line);
nothing here talks to a WHOIS server. A domain without a record, which is the
normal case for never-registered DGA names (NXDOMAIN), gets twelve zeros.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np

from .domain_parse import TLD_VECTOR_SIZE, ParsedDomain
from .errors import DimensionError
from .glrt import FEATURE_COUNT as GLRT_FEATURE_COUNT
from .glrt import GlrtFeatures
from .logging_setup import get_logger
from .textformat import LineReader, format_array

logger = get_logger("sidefeatures")

WHOIS_FIELDS = (
    "domain",
    "registrar_name",
    "contact_email",
    "created",
    "updated",
    "expiration",
    "status",
    "registrant_info",
    "admincontact_info",
    "billingcontact_info",
    "techcontact_info",
    "zonecontact_info",
    "registrar_iana_id",
)

WHOIS_FEATURE_COUNT = 12
SUB_OFFSET = 0
DOM_OFFSET = SUB_OFFSET + GLRT_FEATURE_COUNT
TLD_OFFSET = DOM_OFFSET + GLRT_FEATURE_COUNT
WHOIS_OFFSET = TLD_OFFSET + TLD_VECTOR_SIZE
FEATURE_DIM = WHOIS_OFFSET + WHOIS_FEATURE_COUNT

DEFAULT_WHITENING_EPSILON = 1e-6
WHITENING_HEADER = "whitening"


@dataclass(frozen=True)
class WhoisRecord:
    registrar_name: Optional[str] = None
    contact_email: Optional[str] = None
    created: Optional[date] = None
    updated: Optional[date] = None
    expiration: Optional[date] = None
    status: Optional[str] = None
    registrant_info: bool = False
    admincontact_info: bool = False
    billingcontact_info: bool = False
    techcontact_info: bool = False
    zonecontact_info: bool = False
    registrar_iana_id: Optional[str] = None


class WhoisFeatures(NamedTuple):
    has_registrarname: float = 0.0
    has_contactemail: float = 0.0
    days_since_created: float = 0.0
    days_since_updated: float = 0.0
    days_until_expiration: float = 0.0
    status_length: float = 0.0
    has_registrant_info: float = 0.0
    has_admincontact_info: float = 0.0
    has_billingcontact_info: float = 0.0
    has_techcontact_info: float = 0.0
    has_zonecontact_info: float = 0.0
    has_registrar_iana_id: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


@dataclass(frozen=True)
class WhoisSnapshot:
    """Records keyed by lowercase domain, plus the ingestion tallies."""

    records: Mapping[str, WhoisRecord] = field(default_factory=dict)
    loaded: int = 0
    skipped: int = 0

    def get(self, domain: str) -> Optional[WhoisRecord]:
        return self.records.get(domain.lower().rstrip("."))

    def __len__(self) -> int:
        return len(self.records)


def _optional(value: str) -> Optional[str]:
    return value if value else None


def _parse_date(value: str) -> Optional[date]:
    return date.fromisoformat(value) if value else None


def _parse_bool(value: str) -> bool:
    if value in ("", "0"):
        return False
    if value == "1":
        return True
    raise ValueError(f"bad boolean {value!r}")


def parse_whois_line(line: str) -> Tuple[str, WhoisRecord]:
    """Parse one snapshot line; raises ValueError when malformed."""
    fields = line.rstrip("\r\n").split("\t")
    if len(fields) != len(WHOIS_FIELDS):
        raise ValueError(f"expected {len(WHOIS_FIELDS)} fields, found {len(fields)}")
    domain = fields[0].strip().lower().rstrip(".")
    if not domain:
        raise ValueError("empty domain")
    booleans = [_parse_bool(v) for v in fields[7:12]]
    record = WhoisRecord(
        _optional(fields[1]),
        _optional(fields[2]),
        _parse_date(fields[3]),
        _parse_date(fields[4]),
        _parse_date(fields[5]),
        _optional(fields[6]),
        *booleans,
        registrar_iana_id=_optional(fields[12]),
    )
    return domain, record


def parse_whois_lines(lines: Iterable[str], source: str = "<lines>") -> WhoisSnapshot:
    """Build a snapshot; malformed lines are counted and skipped, later duplicates win."""
    records: Dict[str, WhoisRecord] = {}
    loaded = skipped = 0
    for line_number, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            domain, record = parse_whois_line(line)
        except ValueError as exc:
            skipped += 1
            logger.debug(f"{source}:{line_number}: skipped malformed WHOIS line ({exc})")
            continue
        records[domain] = record
        loaded += 1

    if skipped:
        logger.warning(f"⚠️ {source}: skipped {skipped} malformed WHOIS lines")
    logger.info(f"Loaded {loaded} WHOIS lines ({len(records)} domains) from {source}")
    return WhoisSnapshot(records, loaded, skipped)


def ingest_whois_snapshot(path: Union[str, Path]) -> WhoisSnapshot:
    """Read a snapshot file (UTF-8, tab-separated, see ``WHOIS_FIELDS``)."""
    with open(path, "r", encoding="utf-8") as handle:
        return parse_whois_lines(handle, source=str(path))


def lookup_record(
    snapshot: Optional[WhoisSnapshot], parsed: ParsedDomain
) -> Optional[WhoisRecord]:
    """The record for the full name, else for its registrable ``domain.tld``."""
    if snapshot is None or parsed.is_empty:
        return None
    record = snapshot.get(parsed.raw)
    if record is None and parsed.registrable:
        record = snapshot.get(parsed.registrable)
    return record


def _days(later: Optional[date], earlier: Optional[date]) -> float:
    if later is None or earlier is None:
        return 0.0
    return float(max(0, (later - earlier).days))


def extract_whois_features(record: Optional[WhoisRecord], reference_date: date) -> WhoisFeatures:
    """The twelve WHOIS features; no record means all zeros."""
    if record is None:
        return WhoisFeatures()
    return WhoisFeatures(
        has_registrarname=float(record.registrar_name is not None),
        has_contactemail=float(record.contact_email is not None),
        days_since_created=_days(reference_date, record.created),
        days_since_updated=_days(reference_date, record.updated),
        days_until_expiration=_days(record.expiration, reference_date),
        status_length=float(len(record.status)) if record.status else 0.0,
        has_registrant_info=float(record.registrant_info),
        has_admincontact_info=float(record.admincontact_info),
        has_billingcontact_info=float(record.billingcontact_info),
        has_techcontact_info=float(record.techcontact_info),
        has_zonecontact_info=float(record.zonecontact_info),
        has_registrar_iana_id=float(record.registrar_iana_id is not None),
    )


def _block(value, size: int, name: str) -> np.ndarray:
    if isinstance(value, (GlrtFeatures, WhoisFeatures)):
        value = value.to_array()
    array = np.asarray(value, dtype=float)
    if array.shape != (size,):
        raise DimensionError(f"{name} block has shape {array.shape}, expected ({size},)")
    return array


def assemble(
    glrt_sub: Union[GlrtFeatures, np.ndarray],
    glrt_dom: Union[GlrtFeatures, np.ndarray],
    tld: np.ndarray,
    whois: Union[WhoisFeatures, np.ndarray],
) -> np.ndarray:
    """Concatenate subdomain GLRT, domain GLRT, TLD one-hot and WHOIS blocks."""
    vector = np.concatenate(
        [
            _block(glrt_sub, GLRT_FEATURE_COUNT, "subdomain GLRT"),
            _block(glrt_dom, GLRT_FEATURE_COUNT, "domain GLRT"),
            _block(tld, TLD_VECTOR_SIZE, "TLD"),
            _block(whois, WHOIS_FEATURE_COUNT, "WHOIS"),
        ]
    )
    if not np.all(np.isfinite(vector)):
        raise DimensionError("feature vector contains non-finite values")
    return vector


def split_blocks(vector: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of ``assemble``."""
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (FEATURE_DIM,):
        raise DimensionError(f"feature vector has shape {vector.shape}, expected ({FEATURE_DIM},)")
    return (
        vector[SUB_OFFSET:DOM_OFFSET],
        vector[DOM_OFFSET:TLD_OFFSET],
        vector[TLD_OFFSET:WHOIS_OFFSET],
        vector[WHOIS_OFFSET:],
    )


@dataclass(frozen=True, eq=False)
class WhiteningTransform:
    """x -> diag(1 / sqrt(eigenvalues + epsilon)) · axesᵀ · (x - mean)."""

    mean: np.ndarray
    axes: np.ndarray
    eigenvalues: np.ndarray
    epsilon: float = DEFAULT_WHITENING_EPSILON

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def scale(self) -> np.ndarray:
        return 1.0 / np.sqrt(self.eigenvalues + self.epsilon)


def fit_whitening(
    rows: np.ndarray, epsilon: float = DEFAULT_WHITENING_EPSILON
) -> WhiteningTransform:
    """PCA whitening keeping every component; eigenvalues sorted descending."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[0] < 2:
        raise DimensionError("whitening needs a matrix with at least 2 rows")
    if epsilon < 0:
        raise ValueError("whitening epsilon must be non-negative")

    mean = rows.mean(axis=0)
    covariance = np.cov(rows, rowvar=False, ddof=1).reshape(rows.shape[1], rows.shape[1])
    eigenvalues, axes = np.linalg.eigh(covariance)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    axes = axes[:, order]

    # Fix each axis' sign so its largest-magnitude entry is positive.
    pivots = np.argmax(np.abs(axes), axis=0)
    signs = np.sign(axes[pivots, np.arange(axes.shape[1])])
    signs[signs == 0] = 1.0
    axes = axes * signs

    if epsilon == 0 and np.any(eigenvalues == 0):
        raise ValueError("rank-deficient data needs a positive whitening epsilon")
    return WhiteningTransform(mean, axes, eigenvalues, epsilon)


def apply_whitening(t: WhiteningTransform, x: np.ndarray) -> np.ndarray:
    """Whiten one vector or every row of a matrix."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != t.dim:
        raise DimensionError(f"expected vectors of length {t.dim}, got {x.shape[-1]}")
    return ((x - t.mean) @ t.axes) * t.scale


def whitening_to_lines(t: WhiteningTransform) -> List[str]:
    return (
        [WHITENING_HEADER, f"epsilon {t.epsilon:.17g}"]
        + format_array("mean", t.mean)
        + format_array("axes", t.axes)
        + format_array("eigenvalues", t.eigenvalues)
        + ["end"]
    )


def whitening_from_lines(reader: LineReader) -> WhiteningTransform:
    reader.expect(WHITENING_HEADER)
    fields = reader.keyword("epsilon")
    try:
        (epsilon,) = [float(v) for v in fields]
    except ValueError:
        raise reader.error("bad epsilon line") from None
    mean = reader.array("mean")
    axes = reader.array("axes", (mean.size, mean.size))
    eigenvalues = reader.array("eigenvalues", (mean.size,))
    reader.expect("end")
    return WhiteningTransform(mean, axes, eigenvalues, epsilon)


class WhoisCoverage(NamedTuple):
    family: str
    matched: int
    total: int

    @property
    def fraction(self) -> float:
        return self.matched / self.total if self.total else 0.0


def whois_coverage(
    parsed_rows: Iterable[Tuple[ParsedDomain, str]], snapshot: Optional[WhoisSnapshot]
) -> List[WhoisCoverage]:
    """Per-family count of names that have a WHOIS record, sorted by family."""
    matched: Dict[str, int] = defaultdict(int)
    total: Dict[str, int] = defaultdict(int)
    for parsed, family in parsed_rows:
        total[family] += 1
        if lookup_record(snapshot, parsed) is not None:
            matched[family] += 1
    return [WhoisCoverage(name, matched[name], total[name]) for name in sorted(total)]
