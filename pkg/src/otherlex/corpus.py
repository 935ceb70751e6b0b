"""Documents, tokenization, pronoun inventories and two-sidedness statistics.

A document is "two-sided" when it talks about an in-group and an out-group in
the same breath ("WE should send THEM home"). That framing is the seed signal
for lexicon construction, so the pronoun inventory and the two-sided test
live here next to corpus loading.
"""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import DataError

URL_TOKEN = "<url>"
MENTION_TOKEN = "<mention>"


@dataclass(frozen=True)
class TokenizerConfig:
    url_token: str = URL_TOKEN
    mention_token: str = MENTION_TOKEN
    keep_hashtag_words: bool = True


# Words are ASCII alphanumerics with internal apostrophes (don't, y'all).
# Anything else that is not whitespace becomes a single-character token, so
# joining tokens with spaces and re-tokenizing reproduces the token list.
_WORD = r"[a-z0-9_]+(?:'[a-z0-9_]+)*"


@lru_cache(maxsize=8)
def _token_pattern(url_token: str, mention_token: str) -> re.Pattern[str]:
    return re.compile(
        r"(?P<url>https?://\S+|www\.\S+)"
        r"|(?P<mention>@\w+)"
        rf"|(?P<hashtag>#{_WORD})"
        rf"|(?P<sentinel>{re.escape(url_token)}|{re.escape(mention_token)})"
        rf"|(?P<word>{_WORD})"
        r"|(?P<punct>\S)"
    )


def tokenize(text: str, config: TokenizerConfig | None = None) -> list[str]:
    """Lowercase and split raw text into tokens.

    URLs collapse to the url sentinel, @-mentions to the mention sentinel,
    hashtags lose their marker but keep the word, punctuation splits into
    single-character tokens. Sentinel tokens already present in the text are
    kept atomic, which makes tokenize idempotent on its own joined output.
    """
    cfg = config or TokenizerConfig()
    pattern = _token_pattern(cfg.url_token, cfg.mention_token)
    out: list[str] = []
    for match in pattern.finditer(text.lower()):
        kind = match.lastgroup
        if kind == "url":
            out.append(cfg.url_token)
        elif kind == "mention":
            out.append(cfg.mention_token)
        elif kind == "hashtag":
            if cfg.keep_hashtag_words:
                out.append(match.group()[1:])
        else:
            out.append(match.group())
    return out


@dataclass(frozen=True)
class PronounConfig:
    """In-group / out-group / other pronoun inventory, all lowercase."""

    ingroup: frozenset[str]
    outgroup: frozenset[str]
    other: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        overlap = self.ingroup & self.outgroup
        if overlap:
            raise DataError(f"pronouns in both ingroup and outgroup: {sorted(overlap)}")
        if not self.ingroup or not self.outgroup:
            raise DataError("pronoun config needs a non-empty ingroup and outgroup")

    @property
    def all_pronouns(self) -> frozenset[str]:
        return self.ingroup | self.outgroup | self.other


_PRONOUN_SECTIONS = ("ingroup", "outgroup", "other")


def parse_pronoun_sections(lines, source: str = "<pronouns>") -> PronounConfig:
    """Parse `[ingroup]` / `[outgroup]` / `[other]` sections, one word per line."""
    sections: dict[str, set[str]] = {name: set() for name in _PRONOUN_SECTIONS}
    current: str | None = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in sections:
                raise DataError(f"{source}:{lineno}: unknown section [{name}]")
            current = name
            continue
        if current is None:
            raise DataError(f"{source}:{lineno}: entry before any section header")
        sections[current].add(line.lower())
    return PronounConfig(
        ingroup=frozenset(sections["ingroup"]),
        outgroup=frozenset(sections["outgroup"]),
        other=frozenset(sections["other"]),
    )


def load_pronouns(path: str | Path | None = None) -> PronounConfig:
    """Load a pronoun inventory file, or the packaged default one."""
    if path is None:
        return default_pronouns()
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        return parse_pronoun_sections(fh, source=str(path))


@lru_cache(maxsize=1)
def default_pronouns() -> PronounConfig:
    text = resources.files("otherlex").joinpath("data/pronouns.txt").read_text("utf-8")
    return parse_pronoun_sections(text.splitlines(), source="data/pronouns.txt")


@dataclass
class Document:
    id: str
    text: str
    tokens: list[str]
    label: int | None = None


@dataclass
class Dataset:
    name: str
    documents: list[Document]

    @property
    def class_counts(self) -> dict[int, int]:
        counts = Counter(d.label for d in self.documents if d.label is not None)
        return dict(sorted(counts.items()))

    def __len__(self) -> int:
        return len(self.documents)


def _check_label(label, where: str) -> int | None:
    if label is None:
        return None
    # bool is an int subclass; true/false labels are still schema violations
    if isinstance(label, bool) or label not in (0, 1):
        raise DataError(f"{where}: label must be 0 or 1, got {label!r}")
    return int(label)


def load_corpus(
    path: str | Path,
    name: str | None = None,
    config: TokenizerConfig | None = None,
) -> Dataset:
    """Load a JSONL (`id`/`text`/optional `label`) or CSV (`id,text,label`) corpus.

    Integer ids are coerced to strings. Malformed records, duplicate ids and
    labels outside {0, 1} raise DataError naming the offending line.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        records = _read_csv(path)
    else:
        records = _read_jsonl(path)

    seen: set[str] = set()
    documents: list[Document] = []
    for lineno, doc_id, text, label in records:
        where = f"{path}:{lineno}"
        if isinstance(doc_id, int) and not isinstance(doc_id, bool):
            doc_id = str(doc_id)
        if not isinstance(doc_id, str) or not doc_id:
            raise DataError(f"{where}: document id must be a non-empty string")
        if not isinstance(text, str):
            raise DataError(f"{where}: text must be a string")
        if doc_id in seen:
            raise DataError(f"{where}: duplicate document id {doc_id!r}")
        seen.add(doc_id)
        documents.append(
            Document(id=doc_id, text=text, tokens=tokenize(text, config), label=_check_label(label, where))
        )
    return Dataset(name=name or path.stem, documents=documents)


def _read_jsonl(path: Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise DataError(f"{path}:{lineno}: record must be a JSON object")
            if "id" not in record or "text" not in record:
                raise DataError(f"{path}:{lineno}: record needs 'id' and 'text' fields")
            yield lineno, record["id"], record["text"], record.get("label")


def _read_csv(path: Path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if "id" not in header or "text" not in header:
            raise DataError(f"{path}:1: CSV header must include 'id' and 'text'")
        for record in reader:
            raw_label = (record.get("label") or "").strip()
            if raw_label == "":
                label = None
            elif raw_label in ("0", "1"):
                label = int(raw_label)
            else:
                label = raw_label  # let _check_label report it
            yield reader.line_num, record["id"], record["text"], label


def save_corpus(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset back out (format picked by extension, JSONL default)."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "text", "label"])
            for doc in dataset.documents:
                writer.writerow([doc.id, doc.text, "" if doc.label is None else doc.label])
        return
    with open(path, "w", encoding="utf-8") as fh:
        for doc in dataset.documents:
            record: dict = {"id": doc.id, "text": doc.text}
            if doc.label is not None:
                record["label"] = doc.label
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


TWO_SIDED_MODES = ("ingroup_outgroup", "any_two_pronouns")


def is_two_sided(
    tokens: list[str],
    pronouns: PronounConfig | None = None,
    mode: str = "ingroup_outgroup",
) -> bool:
    """True when the token list names both sides.

    ingroup_outgroup: at least one ingroup and one outgroup pronoun.
    any_two_pronouns: at least two pronoun occurrences of any kind
    (repeats count).
    """
    cfg = pronouns or default_pronouns()
    if mode == "ingroup_outgroup":
        return any(t in cfg.ingroup for t in tokens) and any(t in cfg.outgroup for t in tokens)
    if mode == "any_two_pronouns":
        inventory = cfg.all_pronouns
        return sum(1 for t in tokens if t in inventory) >= 2
    raise ValueError(f"unknown two-sided mode {mode!r}, expected one of {TWO_SIDED_MODES}")


def two_sided_rate(
    dataset: Dataset,
    pronouns: PronounConfig | None = None,
    mode: str = "ingroup_outgroup",
) -> dict[int, float]:
    """Fraction of two-sided documents per label. Requires a fully labelled dataset."""
    totals: Counter[int] = Counter()
    hits: Counter[int] = Counter()
    for doc in dataset.documents:
        if doc.label is None:
            raise DataError(f"document {doc.id!r} has no label; two-sided rates need labels")
        totals[doc.label] += 1
        if is_two_sided(doc.tokens, pronouns, mode):
            hits[doc.label] += 1
    return {label: hits[label] / totals[label] for label in sorted(totals)}
