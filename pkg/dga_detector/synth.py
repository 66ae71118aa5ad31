"""
Synthetic fixtures for demos and tests.

Writes a small but complete working set: a labelled dataset, a WHOIS snapshot
covering the clean names, a wordlist and a public suffix list. DGA families:

- ``wordpair``: two dictionary words joined, under ``.com``
- ``randchar``: random letters under ``.ru`` / ``.info`` / ``.biz`` / ``.cc``
- ``hexnum``: hex digits followed by a number, under ``.net`` / ``.org``

Clean names are a single dictionary word plus a number, some with a ``www`` or
``mail`` subdomain, all registered in the snapshot.
"""

from datetime import date, timedelta
from pathlib import Path
from typing import List, NamedTuple, Sequence, Union

import numpy as np

from .dataset import CLEAN_FAMILY, LABEL_CLEAN, LABEL_DGA, DatasetRow, write_dataset
from .errors import ConfigError
from .logging_setup import get_logger
from .sidefeatures import WHOIS_FIELDS

logger = get_logger("synth")

FAMILY_WORDPAIR = "wordpair"
FAMILY_RANDCHAR = "randchar"
FAMILY_HEXNUM = "hexnum"
FAMILIES = (FAMILY_WORDPAIR, FAMILY_RANDCHAR, FAMILY_HEXNUM)

# Snapshot dates are generated relative to this day.
FIXTURE_REFERENCE_DATE = date(2018, 6, 1)

WORDS = (
    "account", "action", "advice", "air", "animal", "answer", "apple", "area", "army", "art",
    "baby", "back", "ball", "bank", "base", "beach", "bear", "bed", "bird", "black",
    "blood", "blue", "board", "boat", "body", "book", "box", "boy", "bread", "bridge",
    "brother", "brown", "building", "business", "call", "camera", "card", "care", "case", "cat",
    "chair", "chance", "change", "child", "church", "city", "class", "clock", "cloud", "coffee",
    "color", "cook", "corner", "country", "course", "cup", "dance", "dark", "data", "day",
    "deal", "desk", "dinner", "doctor", "dog", "door", "dream", "dress", "drink", "earth",
    "energy", "evening", "eye", "face", "fact", "family", "farm", "father", "field", "film",
    "fire", "fish", "floor", "flower", "food", "forest", "friend", "game", "garden", "glass",
    "gold", "green", "ground", "group", "hair", "hand", "head", "health", "heart", "hill",
    "history", "home", "horse", "hotel", "house", "idea", "island", "job", "key", "kitchen",
    "lake", "land", "language", "law", "letter", "life", "light", "line", "list", "love",
    "machine", "market", "matter", "meal", "money", "month", "moon", "morning", "mother",
    "mountain", "music", "name", "nature", "news", "night",
    "north", "number", "ocean", "office", "oil",
    "order", "page", "pencil", "party", "people", "picture", "place", "plant", "player", "point",
    "power", "price", "question", "radio", "rain", "river", "road", "rock", "room", "salt",
    "school", "science", "sea", "season", "silver", "sister", "sky", "snow", "song", "sound",
    "south", "space", "spring", "square", "star", "station", "stone", "store", "story", "street",
    "summer", "sun", "system", "table", "ticket", "team", "thing", "time", "town", "train",
    "tree", "truth", "union", "valley", "voice", "wall", "water", "way", "weather", "week",
    "west", "wind", "window", "winter", "wood", "word", "work", "world", "year", "youth",
)  # fmt: skip

SUFFIX_LIST_TEXT = """\
// Synthetic public suffix list.
// ===BEGIN ICANN DOMAINS===
com
net
org
info
biz
ru
cc
de
uk
co.uk
org.uk
*.ck
!www.ck
// ===END ICANN DOMAINS===
// ===BEGIN PRIVATE DOMAINS===
blogspot.com
// ===END PRIVATE DOMAINS===
"""

_RANDCHAR_TLDS = ("ru", "info", "biz", "cc")
_HEXNUM_TLDS = ("net", "org")
_CLEAN_TLDS = ("com", "com", "com", "net", "org", "de", "co.uk")
_CLEAN_SUBDOMAINS = ("www", "mail")
_LETTERS = "abcdefghijklmnopqrstuvwxyz"
_HEX = "0123456789abcdef"


class FixturePaths(NamedTuple):
    dataset: Path
    whois: Path
    wordlist: Path
    suffixes: Path


def _pick(rng: np.random.Generator, items: Sequence[str]) -> str:
    return items[int(rng.integers(len(items)))]


def _wordpair(rng: np.random.Generator) -> str:
    return f"{_pick(rng, WORDS)}{_pick(rng, WORDS)}.com"


def _randchar(rng: np.random.Generator) -> str:
    length = int(rng.integers(8, 16))
    label = "".join(_LETTERS[k] for k in rng.integers(len(_LETTERS), size=length))
    return f"{label}.{_pick(rng, _RANDCHAR_TLDS)}"


def _hexnum(rng: np.random.Generator) -> str:
    length = int(rng.integers(6, 11))
    label = "".join(_HEX[k] for k in rng.integers(len(_HEX), size=length))
    return f"{label}{int(rng.integers(10, 1000))}.{_pick(rng, _HEXNUM_TLDS)}"


_GENERATORS = {
    FAMILY_WORDPAIR: _wordpair,
    FAMILY_RANDCHAR: _randchar,
    FAMILY_HEXNUM: _hexnum,
}


def _clean(rng: np.random.Generator) -> str:
    registrable = f"{_pick(rng, WORDS)}{int(rng.integers(0, 1000))}.{_pick(rng, _CLEAN_TLDS)}"
    if rng.random() < 0.25:
        return f"{_pick(rng, _CLEAN_SUBDOMAINS)}.{registrable}"
    return registrable


def _whois_line(registrable: str, rng: np.random.Generator) -> str:
    created = FIXTURE_REFERENCE_DATE - timedelta(days=int(rng.integers(200, 6000)))
    age = (FIXTURE_REFERENCE_DATE - created).days
    updated = created + timedelta(days=int(rng.integers(0, age)))
    expiration = FIXTURE_REFERENCE_DATE + timedelta(days=int(rng.integers(30, 1500)))
    values = {
        "domain": registrable,
        "registrar_name": "Synthetic Registrar Inc.",
        "contact_email": f"hostmaster@{registrable}",
        "created": created.isoformat(),
        "updated": updated.isoformat(),
        "expiration": expiration.isoformat(),
        "status": "clientTransferProhibited",
        "registrant_info": "1",
        "admincontact_info": "1",
        "billingcontact_info": str(int(rng.integers(2))),
        "techcontact_info": "1",
        "zonecontact_info": str(int(rng.integers(2))),
        "registrar_iana_id": str(int(rng.integers(1, 2000))),
    }
    return "\t".join(values[name] for name in WHOIS_FIELDS)


def generate_rows(
    n_dga: int, n_clean: int, seed: int = 0, families: Sequence[str] = FAMILIES
) -> List[DatasetRow]:
    """Dataset rows only; DGA rows are shared out evenly across ``families``."""
    unknown = [f for f in families if f not in _GENERATORS]
    if unknown:
        raise ConfigError(f"unknown synthetic families: {', '.join(unknown)}")
    if not families or n_dga < len(families) or n_clean < 1:
        raise ConfigError("need at least one row per DGA family and one clean row")

    rng = np.random.default_rng(seed)
    rows = []
    for k, family in enumerate(families):
        count = n_dga // len(families) + (1 if k < n_dga % len(families) else 0)
        generate = _GENERATORS[family]
        rows.extend(DatasetRow(generate(rng), LABEL_DGA, family) for _ in range(count))
    rows.extend(
        DatasetRow(_clean(rng), LABEL_CLEAN, CLEAN_FAMILY) for _ in range(n_clean)
    )
    return rows


def generate_fixture(
    out_dir: Union[str, Path],
    n_dga: int = 2000,
    n_clean: int = 2000,
    seed: int = 0,
    families: Sequence[str] = FAMILIES,
) -> FixturePaths:
    """Write ``dataset.tsv``, ``whois.tsv``, ``wordlist.txt`` and ``suffixes.dat``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = FixturePaths(
        out / "dataset.tsv", out / "whois.tsv", out / "wordlist.txt", out / "suffixes.dat"
    )

    rows = generate_rows(n_dga, n_clean, seed, families)
    write_dataset(rows, paths.dataset)

    rng = np.random.default_rng(seed + 1)
    registrable = sorted({_registrable(row.domain) for row in rows if not row.is_dga})
    with open(paths.whois, "w", encoding="utf-8") as handle:
        handle.write("# " + "\t".join(WHOIS_FIELDS) + "\n")
        for name in registrable:
            handle.write(_whois_line(name, rng) + "\n")

    paths.wordlist.write_text(
        "# synthetic wordlist\n" + "\n".join(WORDS) + "\n", encoding="utf-8"
    )
    paths.suffixes.write_text(SUFFIX_LIST_TEXT, encoding="utf-8")

    logger.info(
        f"✅ Wrote synthetic fixture to {out}: {n_dga} dga rows over {len(families)} families, "
        f"{n_clean} clean rows, {len(registrable)} WHOIS records"
    )
    return paths


def _registrable(domain: str) -> str:
    labels = domain.split(".")
    if labels[0] in _CLEAN_SUBDOMAINS:
        labels = labels[1:]
    return ".".join(labels)
