"""
Labelled dataset files: UTF-8 TSV ``domain<TAB>label<TAB>family``.

Labels are ``dga`` or ``clean``; clean rows always belong to family ``clean``.
``#`` lines and blank lines are ignored.
"""

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

from .domain_parse import normalize_domain
from .errors import DatasetError, DomainParseError
from .logging_setup import get_logger

logger = get_logger("dataset")

LABEL_DGA = "dga"
LABEL_CLEAN = "clean"
CLEAN_FAMILY = "clean"


@dataclass(frozen=True)
class DatasetRow:
    domain: str
    label: str
    family: str

    def __post_init__(self):
        if self.label not in (LABEL_DGA, LABEL_CLEAN):
            raise DatasetError(f"label must be 'dga' or 'clean', got {self.label!r}")
        if not self.family:
            raise DatasetError("family must not be empty")
        if (self.label == LABEL_CLEAN) != (self.family == CLEAN_FAMILY):
            raise DatasetError(
                f"label {self.label!r} is inconsistent with family {self.family!r}"
            )

    @property
    def is_dga(self) -> bool:
        return self.label == LABEL_DGA


def parse_dataset_line(line: str) -> DatasetRow:
    fields = line.rstrip("\r\n").split("\t")
    if len(fields) != 3:
        raise DatasetError(f"expected 3 tab-separated fields, found {len(fields)}")
    domain, label, family = (field.strip() for field in fields)
    try:
        domain = normalize_domain(domain)
    except DomainParseError as exc:
        raise DatasetError(str(exc)) from None
    if not domain:
        raise DatasetError("empty domain")
    return DatasetRow(domain, label.lower(), family)


def parse_dataset(lines: Iterable[str], source: str = "<lines>") -> List[DatasetRow]:
    rows = []
    for line_number, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            rows.append(parse_dataset_line(line))
        except DatasetError as exc:
            raise DatasetError(f"{source}:{line_number}: {exc}") from None
    return rows


def load_dataset(path: Union[str, Path]) -> List[DatasetRow]:
    """Read a dataset file; any malformed row aborts with its line number."""
    with open(path, "r", encoding="utf-8") as handle:
        rows = parse_dataset(handle, source=str(path))
    if not rows:
        raise DatasetError(f"{path}: dataset is empty")
    counts = family_counts(rows)
    logger.info(
        f"Loaded {len(rows)} rows from {path}: "
        + ", ".join(f"{family}={n}" for family, n in sorted(counts.items()))
    )
    return rows


def write_dataset(rows: Sequence[DatasetRow], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("# domain\tlabel\tfamily\n")
        for row in rows:
            handle.write(f"{row.domain}\t{row.label}\t{row.family}\n")


def family_counts(rows: Iterable[DatasetRow]) -> Dict[str, int]:
    return dict(Counter(row.family for row in rows))


def dga_families(rows: Iterable[DatasetRow]) -> List[str]:
    return sorted({row.family for row in rows if row.is_dga})
