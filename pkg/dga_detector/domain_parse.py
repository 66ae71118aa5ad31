"""
Domain-name parsing against the public suffix list, and one-hot TLD encoding.

A raw name such as ``www.website.com`` is split into subdomain (``www``), domain
(``website``) and TLD (``com``). The TLD is the longest public suffix that
matches, following the publicsuffix.org rules for wildcards (``*.ck``) and
exceptions (``!www.ck``). When no rule matches, the last label is the TLD.
"""

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainParseError, SuffixListError
from .logging_setup import get_logger

logger = get_logger("domain_parse")

MAX_DOMAIN_LENGTH = 253
TOP_TLD_COUNT = 249
TLD_VECTOR_SIZE = TOP_TLD_COUNT + 1
OTHER_TLD_INDEX = TOP_TLD_COUNT

_VALID_NAME = re.compile(r"^[a-z0-9._-]+$")

RULE_PLAIN = "plain"
RULE_WILDCARD = "wildcard"
RULE_EXCEPTION = "exception"


class SuffixRule(NamedTuple):
    """One public-suffix rule; ``labels`` never includes the ``*`` or ``!`` marker."""

    labels: Tuple[str, ...]
    kind: str

    def __str__(self) -> str:
        text = ".".join(self.labels)
        if self.kind == RULE_WILDCARD:
            return f"*.{text}"
        if self.kind == RULE_EXCEPTION:
            return f"!{text}"
        return text


@dataclass(frozen=True)
class SuffixSet:
    """Immutable set of public-suffix rules, indexed by rule kind."""

    plain: FrozenSet[Tuple[str, ...]] = frozenset()
    wildcards: FrozenSet[Tuple[str, ...]] = frozenset()
    exceptions: FrozenSet[Tuple[str, ...]] = frozenset()

    @property
    def rules(self) -> FrozenSet[SuffixRule]:
        return frozenset(
            [SuffixRule(labels, RULE_PLAIN) for labels in self.plain]
            + [SuffixRule(labels, RULE_WILDCARD) for labels in self.wildcards]
            + [SuffixRule(labels, RULE_EXCEPTION) for labels in self.exceptions]
        )

    def __len__(self) -> int:
        return len(self.plain) + len(self.wildcards) + len(self.exceptions)

    def to_lines(self) -> List[str]:
        """Rules in publicsuffix.org syntax, sorted so output is reproducible."""
        return sorted(str(rule) for rule in self.rules)

    def suffix_length(self, labels: Sequence[str]) -> int:
        """Number of trailing labels forming the public suffix of ``labels``."""
        labels = tuple(labels)

        # Exception rules prevail over everything else.
        for start in range(len(labels)):
            if labels[start:] in self.exceptions:
                return len(labels) - start - 1

        best = 1
        for start in range(len(labels)):
            candidate = labels[start:]
            if candidate in self.plain or (len(candidate) > 1 and candidate[1:] in self.wildcards):
                best = max(best, len(candidate))
        return best


def _parse_rule(line: str, line_number: int) -> SuffixRule:
    if any(ch.isspace() for ch in line):
        raise SuffixListError(f"embedded whitespace in rule {line!r}", line_number)

    kind = RULE_PLAIN
    body = line.lower()
    if body.startswith("!"):
        kind, body = RULE_EXCEPTION, body[1:]
    elif body.startswith("*."):
        kind, body = RULE_WILDCARD, body[2:]

    labels = tuple(body.split("."))
    if not body or any(not label for label in labels):
        raise SuffixListError(f"empty label in rule {line!r}", line_number)
    if any("*" in label or "!" in label for label in labels):
        raise SuffixListError(f"misplaced marker in rule {line!r}", line_number)
    return SuffixRule(labels, kind)


def load_suffix_list(text: str) -> SuffixSet:
    """
    Parse a publicsuffix.org document.

    Comment lines (``//``) and blank lines are skipped; the ICANN and PRIVATE
    section markers are comments, so rules from both sections are loaded.
    """
    plain, wildcards, exceptions = set(), set(), set()
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("//"):
            continue
        rule = _parse_rule(line, line_number)
        if rule.kind == RULE_EXCEPTION:
            exceptions.add(rule.labels)
        elif rule.kind == RULE_WILDCARD:
            wildcards.add(rule.labels)
        else:
            plain.add(rule.labels)

    suffixes = SuffixSet(frozenset(plain), frozenset(wildcards), frozenset(exceptions))
    logger.debug(
        f"Loaded {len(plain)} plain, {len(wildcards)} wildcard, {len(exceptions)} exception rules"
    )
    return suffixes


def load_suffix_file(path: Union[str, Path]) -> SuffixSet:
    """Read a suffix list from disk (UTF-8)."""
    text = Path(path).read_text(encoding="utf-8")
    suffixes = load_suffix_list(text)
    logger.info(f"Loaded {len(suffixes)} public-suffix rules from {path}")
    return suffixes


@dataclass(frozen=True)
class ParsedDomain:
    """A normalized name split into subdomain, registrable label and public suffix."""

    raw: str
    tld: str
    domain: Optional[str] = None
    subdomain: Optional[str] = None

    @property
    def parts(self) -> List[str]:
        return [part for part in (self.subdomain, self.domain, self.tld) if part]

    @property
    def registrable(self) -> Optional[str]:
        """``domain.tld`` when a domain label exists."""
        if self.domain is None:
            return None
        return f"{self.domain}.{self.tld}"

    @property
    def is_empty(self) -> bool:
        return not self.raw


def normalize_domain(raw: str) -> str:
    """Lowercase, drop one trailing dot, validate alphabet, labels and length."""
    name = raw.strip().lower()
    if name.endswith("."):
        name = name[:-1]
    if not name:
        return ""
    if not _VALID_NAME.match(name):
        raise DomainParseError(f"invalid characters in domain {raw!r}")
    if any(not label for label in name.split(".")):
        raise DomainParseError(f"empty label in domain {raw!r}")
    if len(name) > MAX_DOMAIN_LENGTH:
        raise DomainParseError(
            f"domain is {len(name)} characters, longer than {MAX_DOMAIN_LENGTH}"
        )
    return name


def split_domain(raw: str, suffixes: SuffixSet) -> ParsedDomain:
    """
    Split a hostname into subdomain, domain and TLD.

    Empty input and names that are a bare public suffix are not errors: domain
    and subdomain come back as None and the GLRT features record the absence.
    """
    name = normalize_domain(raw)
    if not name:
        return ParsedDomain(raw="", tld="")

    labels = name.split(".")
    n_suffix = suffixes.suffix_length(labels)
    if n_suffix >= len(labels):
        return ParsedDomain(raw=name, tld=name)

    tld = ".".join(labels[-n_suffix:])
    domain = labels[-n_suffix - 1]
    subdomain = ".".join(labels[: -n_suffix - 1]) or None
    return ParsedDomain(raw=name, tld=tld, domain=domain, subdomain=subdomain)


@dataclass(frozen=True)
class TldEncoder:
    """The most frequent training TLDs, in slot order; slot 249 is ``other``."""

    top_tlds: Tuple[str, ...]
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.top_tlds) > TOP_TLD_COUNT:
            raise ValueError(f"at most {TOP_TLD_COUNT} TLDs, got {len(self.top_tlds)}")
        if len(set(self.top_tlds)) != len(self.top_tlds):
            raise ValueError("TLD list contains duplicates")
        if any(tld != tld.lower() or not tld for tld in self.top_tlds):
            raise ValueError("TLDs must be non-empty and lowercase")
        object.__setattr__(self, "_index", {tld: i for i, tld in enumerate(self.top_tlds)})

    def index_of(self, tld: str) -> int:
        return self._index.get(tld.lower(), OTHER_TLD_INDEX)


def build_tld_encoder(training_domains: Iterable[ParsedDomain]) -> TldEncoder:
    """Keep the 249 most frequent TLDs; ties go to the lexicographically smaller TLD."""
    counts = Counter(parsed.tld for parsed in training_domains if parsed.tld)
    if not counts:
        raise ValueError("cannot build a TLD encoder from an empty training set")

    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    top = tuple(tld for tld, _ in ranked[:TOP_TLD_COUNT])
    logger.debug(f"TLD encoder keeps {len(top)} of {len(counts)} distinct TLDs")
    return TldEncoder(top)


def encode_tld(tld: str, enc: TldEncoder) -> np.ndarray:
    """One-hot vector of length 250; unseen TLDs land in the ``other`` slot."""
    vector = np.zeros(TLD_VECTOR_SIZE)
    vector[enc.index_of(tld)] = 1.0
    return vector


class TldConcentration(NamedTuple):
    tld: str
    n_dga: int
    n_clean: int
    ratio: float


def tld_class_report(
    parsed: Sequence[ParsedDomain], is_dga: Sequence[bool], min_ratio: float = 3.0
) -> List[TldConcentration]:
    """
    Per-TLD DGA vs clean counts, sorted by DGA/clean ratio (descending).

    A TLD seen only in DGA rows has an infinite ratio.
    """
    dga, clean = Counter(), Counter()
    for item, flag in zip(parsed, is_dga):
        if item.tld:
            (dga if flag else clean)[item.tld] += 1

    report = []
    for tld in set(dga) | set(clean):
        ratio = dga[tld] / clean[tld] if clean[tld] else float("inf")
        if ratio >= min_ratio:
            report.append(TldConcentration(tld, dga[tld], clean[tld], ratio))
    report.sort(key=lambda row: (-row.ratio, -row.n_dga, row.tld))
    return report
