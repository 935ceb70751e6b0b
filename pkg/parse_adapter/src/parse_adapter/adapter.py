"""Corpus-level parsing: JSONL in, CoNLL-U out.

Every input document becomes exactly one sentence block bound by a
`# doc_id = <id>` comment, so block count always equals document count.
Documents whose backend parse spans several sentences are flattened under
the one doc_id: the first sentence keeps the block root and later sentence
roots re-attach to it as `parataxis`. A document the backend refuses to
parse becomes a single-token placeholder block carrying a `# parse_error`
comment; parsing continues and the failure is reported in the summary.

The output file starts with `# generator` / `# backend` comments pinning
what produced it, which is what makes golden files regenerable: rerun the
same command and compare.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .backends import Sentence, get_backend
from .errors import DataError

GENERATOR = "parse-adapter 0.1.0"

_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class AdapterConfig:
    input_path: Path
    output_path: Path
    backend: str = "rule"
    batch_size: int = 32

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class ParseSummary:
    backend: str
    backend_version: str
    documents: int = 0
    parse_errors: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)


def _read_jsonl(path: Path) -> list[tuple[str, str]]:
    """Minimal corpus reader: one object per line, `id` and `text` required."""
    docs: list[tuple[str, str]] = []
    seen: set[str] = set()
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read corpus {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from None
        if not isinstance(record, dict) or "id" not in record or "text" not in record:
            raise DataError(f"{path}:{lineno}: record needs 'id' and 'text' fields")
        doc_id = str(record["id"])
        if "\n" in doc_id or doc_id != doc_id.strip() or not doc_id:
            raise DataError(f"{path}:{lineno}: unusable document id {doc_id!r}")
        if doc_id in seen:
            # repeated doc_ids would merge into one block downstream and
            # silently break count preservation
            raise DataError(f"{path}:{lineno}: duplicate document id {doc_id!r}")
        seen.add(doc_id)
        docs.append((doc_id, str(record["text"])))
    return docs


def _clean(fieldval: str) -> str:
    cleaned = _WS.sub("_", fieldval)
    return cleaned if cleaned else "_"


def _flatten(sentences: list[Sentence]) -> list[tuple[int, "object", int]]:
    """Re-index multi-sentence parses as one block.

    Returns (index, word, head) rows. The first sentence root stays the
    block root; later roots become parataxis children of it.
    """
    rows = []
    offset = 0
    block_root = 0
    for sentence in sentences:
        for w_index, word in enumerate(sentence):
            index = offset + w_index + 1
            if word.head == 0:
                if block_root == 0:
                    head = 0
                    block_root = index
                else:
                    head = block_root
            else:
                head = offset + word.head
            rows.append((index, word, head))
        offset += len(sentence)
    return rows


def _block(doc_id: str, sentences: list[Sentence]) -> str:
    lines = [f"# doc_id = {doc_id}"]
    for index, word, head in _flatten(sentences):
        deprel = word.deprel if head != 0 else "root"
        if word.head == 0 and head != 0:
            deprel = "parataxis"
        lines.append(
            "\t".join(
                [
                    str(index),
                    _clean(word.form),
                    _clean(word.lemma),
                    _clean(word.upos),
                    _clean(word.xpos),
                    _clean(word.feats),
                    str(head),
                    _clean(deprel),
                    "_",
                    "_",
                ]
            )
        )
    return "\n".join(lines) + "\n\n"


def _placeholder(doc_id: str, message: str) -> str:
    note = _WS.sub(" ", message).strip() or "parse failed"
    return (
        f"# doc_id = {doc_id}\n"
        f"# parse_error = {note}\n"
        "1\t_\t_\tX\tXX\t_\t0\troot\t_\t_\n\n"
    )


def parse_corpus(cfg: AdapterConfig) -> ParseSummary:
    """Parse a JSONL corpus into one CoNLL-U sentence block per document."""
    backend = get_backend(cfg.backend, cfg.batch_size)
    docs = _read_jsonl(Path(cfg.input_path))
    summary = ParseSummary(backend=backend.name, backend_version=backend.version)
    with open(cfg.output_path, "w", encoding="utf-8") as fh:
        fh.write(f"# generator = {GENERATOR}\n")
        fh.write(f"# backend = {backend.name}/{backend.version}\n\n")
        for start in range(0, len(docs), cfg.batch_size):
            batch = docs[start : start + cfg.batch_size]
            for doc_id, parsed_or_error in _parse_batch(backend, batch):
                summary.documents += 1
                if isinstance(parsed_or_error, str):
                    summary.parse_errors += 1
                    summary.failures.append((doc_id, parsed_or_error))
                    fh.write(_placeholder(doc_id, parsed_or_error))
                else:
                    fh.write(_block(doc_id, parsed_or_error))
    return summary


def _parse_batch(backend, batch: list[tuple[str, str]]):
    """(doc_id, sentences-or-error-message) pairs with per-document isolation.

    The whole batch goes to the backend first; if that call throws, each
    document is retried alone so one bad text cannot take out its batch.
    Only backend exceptions are converted to placeholders; adapter-side
    DataErrors still abort.
    """
    texts = [text for _, text in batch]
    try:
        parsed = backend.parse_batch(texts)
        if len(parsed) != len(batch):
            raise DataError(
                f"backend returned {len(parsed)} parses for {len(batch)} documents"
            )
    except DataError:
        raise
    except Exception:
        parsed = None
    if parsed is not None:
        return [(doc_id, sentences) for (doc_id, _), sentences in zip(batch, parsed)]
    out = []
    for doc_id, text in batch:
        try:
            out.append((doc_id, backend.parse_batch([text])[0]))
        except DataError:
            raise
        except Exception as exc:
            out.append((doc_id, str(exc) or type(exc).__name__))
    return out
