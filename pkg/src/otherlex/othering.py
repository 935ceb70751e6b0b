"""Othering lexicon construction and token-stream augmentation.

The lexicon has three components: dependency-pair entries extracted from
hateful two-sided documents, content words (NN/JJ/VB/RB families) from the
same documents, and the configured pronoun inventory. Augmentation appends a
document's own dependency features and one marker token per lexicon hit to
its base token stream, so the embedding stage sees othering constructions as
first-class vocabulary.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import Dataset, PronounConfig, default_pronouns, is_two_sided
from .errors import DataError
from .parse import RETAINED_RELATIONS, ParseGraph, filter_dependencies, filter_pos
from .util import config_hash

DEP_MARKER = "<lex_dep:{}>"
WORD_MARKER = "<lex_word:{}>"
PRONOUN_MARKER = "<lex_pron:{}>"

_DEP_ENTRY_RE = re.compile(r"^([a-z]+)\(([^(),\t ]+),([^(),\t ]+)\)$")


@dataclass
class OtheringLexicon:
    dep_entries: frozenset[str]
    pos_words: frozenset[str]
    pronouns: frozenset[str]
    provenance: dict[str, str] = field(default_factory=dict)


def build_lexicon(
    dataset: Dataset,
    parses: Mapping[str, ParseGraph],
    pronouns: PronounConfig | None = None,
    mode: str = "ingroup_outgroup",
    min_count: int = 1,
) -> OtheringLexicon:
    """Extract the lexicon from the hateful two-sided documents of a dataset.

    Only documents with label 1 that pass the two-sided test contribute; each
    needs a parse in `parses` keyed by document id. The pronoun component is
    the configured inventory itself, and extracted content words that are
    pronouns are dropped so the three components stay disjoint. `min_count`
    is a document-frequency floor: an entry is kept when at least that many
    contributing documents produced it (1 = plain union).
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    cfg = pronouns or default_pronouns()
    dep_counts: Counter[str] = Counter()
    word_counts: Counter[str] = Counter()
    n_hateful = 0
    n_contributing = 0
    for doc in dataset.documents:
        if doc.label != 1:
            continue
        n_hateful += 1
        if not is_two_sided(doc.tokens, cfg, mode):
            continue
        if doc.id not in parses:
            raise DataError(f"no parse for hateful two-sided document {doc.id!r}")
        graph = parses[doc.id]
        n_contributing += 1
        dep_counts.update({pair.feature() for pair in filter_dependencies(graph)})
        word_counts.update(set(filter_pos(graph)))

    dep_entries = {e for e, c in dep_counts.items() if c >= min_count}
    pos_words = {w for w, c in word_counts.items() if c >= min_count}
    inventory = frozenset(cfg.all_pronouns)
    pos_words -= inventory
    extraction_hash = config_hash(
        {
            "mode": mode,
            "min_count": str(min_count),
            "ingroup": ",".join(sorted(cfg.ingroup)),
            "outgroup": ",".join(sorted(cfg.outgroup)),
            "other": ",".join(sorted(cfg.other)),
        }
    )
    return OtheringLexicon(
        dep_entries=frozenset(dep_entries),
        pos_words=frozenset(pos_words),
        pronouns=inventory,
        provenance={
            "source": dataset.name,
            "config_hash": extraction_hash,
            "mode": mode,
            "min_count": str(min_count),
            "n_documents": str(len(dataset.documents)),
            "n_hateful": str(n_hateful),
            "n_contributing": str(n_contributing),
            "n_dep": str(len(dep_entries)),
            "n_word": str(len(pos_words)),
            "n_pronoun": str(len(inventory)),
            "empty_warning": "1" if n_contributing == 0 else "0",
        },
    )


def augment(
    tokens: list[str],
    parse: ParseGraph,
    lexicon: OtheringLexicon,
    include_features: bool = True,
) -> list[str]:
    """Base tokens, then the document's dependency features, then lexicon hits.

    Hit markers come per component (dependency entries first, then content
    words, then pronouns), each in stream encounter order, one marker per
    matching occurrence.
    """
    features = [p.feature() for p in filter_dependencies(parse)] if include_features else []
    stream = list(tokens) + features
    hits = [DEP_MARKER.format(t) for t in stream if t in lexicon.dep_entries]
    hits += [WORD_MARKER.format(t) for t in stream if t in lexicon.pos_words]
    hits += [PRONOUN_MARKER.format(t) for t in stream if t in lexicon.pronouns]
    return stream + hits


_SECTIONS = ("meta", "dep", "word", "pronoun")


def save_lexicon(lexicon: OtheringLexicon, path: str | Path) -> None:
    """Write the lexicon to its sectioned text format, entries sorted."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# othering lexicon\n[meta]\n")
        for key in sorted(lexicon.provenance):
            fh.write(f"{key}={lexicon.provenance[key]}\n")
        for section, entries in (
            ("dep", lexicon.dep_entries),
            ("word", lexicon.pos_words),
            ("pronoun", lexicon.pronouns),
        ):
            fh.write(f"[{section}]\n")
            for entry in sorted(entries):
                fh.write(entry + "\n")


def load_lexicon(path: str | Path) -> OtheringLexicon:
    """Read a lexicon file; every section except [meta] is mandatory."""
    sections: dict[str, list[str]] = {}
    meta: dict[str, str] = {}
    current: str | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                name = line[1:-1].strip().lower()
                if name not in _SECTIONS:
                    raise DataError(f"{path}:{lineno}: unknown section [{name}]")
                current = name
                sections.setdefault(name, [])
                continue
            if current is None:
                raise DataError(f"{path}:{lineno}: entry before any section header")
            if current == "meta":
                key, sep, value = line.partition("=")
                if not sep:
                    raise DataError(f"{path}:{lineno}: meta entries are key=value lines")
                meta[key.strip()] = value.strip()
                continue
            if current == "dep":
                match = _DEP_ENTRY_RE.match(line)
                if not match:
                    raise DataError(f"{path}:{lineno}: malformed dependency entry {line!r}")
                if match.group(1) not in RETAINED_RELATIONS:
                    raise DataError(
                        f"{path}:{lineno}: relation {match.group(1)!r} not one of "
                        f"{sorted(RETAINED_RELATIONS)}"
                    )
            sections[current].append(line)

    missing = [name for name in ("dep", "word", "pronoun") if name not in sections]
    if missing:
        raise DataError(f"{path}: missing mandatory sections: {missing}")
    return OtheringLexicon(
        dep_entries=frozenset(sections["dep"]),
        pos_words=frozenset(sections["word"]),
        pronouns=frozenset(sections["pronoun"]),
        provenance=meta,
    )
