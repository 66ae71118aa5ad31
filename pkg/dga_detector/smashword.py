"""
Character entropy and smashword scores.

The smashword score measures how much a domain looks like it was glued together
from dictionary words: the average log document-frequency of its character 3-,
4- and 5-grams in a reference wordlist. Random-looking names score near 0,
word-built names score high.
"""

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .domain_parse import SuffixSet, split_domain
from .logging_setup import get_logger

logger = get_logger("smashword")

NGRAM_SIZES = (3, 4, 5)


def char_entropy(s: str) -> float:
    """Shannon entropy in bits of the character distribution of ``s``."""
    if not s:
        raise ValueError("entropy of an empty string is undefined")
    counts = np.array(list(Counter(s).values()), dtype=float)
    p = counts / len(s)
    # 0.0 rather than -0.0 for single-symbol strings.
    return float(abs(-np.sum(p * np.log2(p))))


def ngrams(s: str, sizes: Sequence[int] = NGRAM_SIZES) -> Set[str]:
    """Distinct character n-grams of ``s`` for every n in ``sizes``."""
    return {s[i : i + n] for n in sizes for i in range(len(s) - n + 1)}


@dataclass(frozen=True)
class NgramIndex:
    """Number of wordlist entries containing each 3/4/5-gram."""

    wordlist_size: int
    counts: Mapping[str, int]

    def __len__(self) -> int:
        return len(self.counts)


def build_ngram_index(wordlist: Iterable[str]) -> NgramIndex:
    """Count, for every n-gram, how many words contain it at least once."""
    counts: Dict[str, int] = defaultdict(int)
    size = 0
    for word in wordlist:
        word = word.strip().lower()
        if not word:
            continue
        size += 1
        for gram in ngrams(word):
            counts[gram] += 1

    if size == 0:
        raise ValueError("cannot build an n-gram index from an empty wordlist")
    logger.debug(f"Indexed {len(counts)} n-grams from {size} words")
    return NgramIndex(size, dict(counts))


def load_wordlist(path: Union[str, Path]) -> List[str]:
    """One word per line; ``#`` comment lines and blank lines are ignored."""
    words = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            words.append(line)
    logger.info(f"Loaded {len(words)} words from {path}")
    return words


def smashword_text(domain: str, suffixes: Optional[SuffixSet] = None) -> str:
    """
    The string a smashword score is computed on: subdomain and domain labels
    concatenated without dots, with the public suffix removed.

    Without a suffix list only the last label is treated as the suffix.
    """
    if suffixes is not None:
        parsed = split_domain(domain, suffixes)
        return "".join(part.replace(".", "") for part in (parsed.subdomain, parsed.domain) if part)
    labels = domain.strip().lower().rstrip(".").split(".")
    if len(labels) > 1:
        labels = labels[:-1]
    return "".join(labels)


def smashword_score(s: str, index: NgramIndex) -> float:
    """
    Mean over the distinct n-grams of ``s`` of ln(count in the index).

    ``s`` is scored as given; callers working with full domain names go through
    ``smashword_text`` first. Strings shorter than 3 characters score 0.
    """
    grams = ngrams(s.lower())
    if not grams:
        return 0.0
    total = 0.0
    for gram in sorted(grams):
        count = index.counts.get(gram)
        if count:
            total += math.log(count)
    return total / len(grams)


@dataclass(frozen=True)
class FamilyStats:
    name: str
    n: int
    avg_length: float
    avg_entropy: float
    avg_smashword: float


def family_stats(
    name: str,
    domains: Sequence[str],
    index: NgramIndex,
    suffixes: Optional[SuffixSet] = None,
) -> FamilyStats:
    """
    Means of length, entropy and smashword score over one family.

    Length and entropy use the full name including dots and TLD; the smashword
    score uses ``smashword_text``.
    """
    if not domains:
        raise ValueError(f"family {name!r} has no domains")
    lengths = [len(d) for d in domains]
    entropies = [char_entropy(d) for d in domains]
    scores = [smashword_score(smashword_text(d, suffixes), index) for d in domains]
    return FamilyStats(
        name=name,
        n=len(domains),
        avg_length=float(np.mean(lengths)),
        avg_entropy=float(np.mean(entropies)),
        avg_smashword=float(np.mean(scores)),
    )


def family_stats_table(
    rows: Iterable[Tuple[str, str]], index: NgramIndex, suffixes: Optional[SuffixSet] = None
) -> List[FamilyStats]:
    """Stats for every family in ``(domain, family)`` pairs, highest smashword first."""
    grouped: Dict[str, List[str]] = defaultdict(list)
    for domain, family in rows:
        grouped[family].append(domain)
    table = [family_stats(name, domains, index, suffixes) for name, domains in grouped.items()]
    table.sort(key=lambda stats: (-stats.avg_smashword, stats.name))
    return table
