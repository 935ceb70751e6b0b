"""CoNLL-U ingestion, dependency/POS filtering, and a heuristic fallback parser.

Only six dependency relations matter downstream: nsubj, dobj, nmod, det,
advmod, compound. Relation subtypes are truncated at the first colon
(nmod:poss counts as nmod) and the bare UD `obj` label is aliased to `dobj`
at ingestion so the rest of the pipeline sees one spelling.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

from .corpus import default_pronouns
from .errors import DataError

RETAINED_RELATIONS = frozenset({"nsubj", "dobj", "nmod", "det", "advmod", "compound"})
RETAINED_POS_PREFIXES = ("NN", "JJ", "VB", "RB")


@dataclass
class ParseToken:
    index: int  # 1-based position in the sentence
    form: str
    lemma: str
    pos: str  # Penn-style tag (XPOS when present, mapped UPOS otherwise)
    head: int  # 0 for root
    deprel: str


@dataclass
class ParseGraph:
    doc_id: str
    tokens: list[ParseToken] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class DepPair:
    relation: str
    head: str
    dependent: str

    def feature(self) -> str:
        return f"{self.relation}({self.head},{self.dependent})"


# Penn-style fallbacks for files that only carry universal POS tags. The
# pipeline cares about the NN/JJ/VB/RB families plus PRP/DT; the rest just
# need to stay out of those families.
_UPOS_TO_PENN = {
    "NOUN": "NN",
    "PROPN": "NNP",
    "VERB": "VB",
    "AUX": "VB",
    "ADJ": "JJ",
    "ADV": "RB",
    "PRON": "PRP",
    "DET": "DT",
    "ADP": "IN",
    "NUM": "CD",
    "PART": "RP",
    "CCONJ": "CC",
    "SCONJ": "IN",
    "INTJ": "UH",
    "PUNCT": ".",
    "SYM": "SYM",
    "X": "XX",
}

_DOC_ID_RE = re.compile(r"^#\s*doc_id\s*=\s*(.*)$")
_RANGE_ID_RE = re.compile(r"^\d+-\d+$")
_EMPTY_ID_RE = re.compile(r"^\d+\.\d+$")


def _alias_deprel(deprel: str) -> str:
    base, colon, subtype = deprel.partition(":")
    if base == "obj":
        base = "dobj"
    return base + colon + subtype


def _finish_block(doc_id: str | None, rows: list[tuple[int, ParseToken]], where: str,
                  graphs: list[ParseGraph], by_id: dict[str, ParseGraph]) -> None:
    if doc_id is None and not rows:
        return
    if doc_id is None:
        raise DataError(f"{where}: sentence block without a '# doc_id =' comment")
    expected = 1
    for lineno, token in rows:
        if token.index != expected:
            raise DataError(f"{where}:{lineno}: token ids must run 1..n, got {token.index}")
        expected += 1
    n = len(rows)
    for lineno, token in rows:
        if not 0 <= token.head <= n:
            raise DataError(f"{where}:{lineno}: head {token.head} outside 0..{n}")
        if token.head == token.index:
            raise DataError(f"{where}:{lineno}: token {token.index} heads itself")
    if rows and not any(token.head == 0 for _, token in rows):
        raise DataError(f"{where}: sentence block for {doc_id!r} has no root")
    if doc_id in by_id:
        # A repeated doc_id continues the same document: append with offset.
        graph = by_id[doc_id]
        offset = len(graph.tokens)
        for _, token in rows:
            token.index += offset
            if token.head != 0:
                token.head += offset
            graph.tokens.append(token)
    else:
        graph = ParseGraph(doc_id=doc_id, tokens=[t for _, t in rows])
        by_id[doc_id] = graph
        graphs.append(graph)


def read_conllu(source: str | Path | TextIO) -> list[ParseGraph]:
    """Read CoNLL-U into one ParseGraph per `# doc_id`, in file order.

    Multiword-token ranges (`1-2`) and empty nodes (`1.1`) are skipped; a
    lemma of `_` falls back to the lowercased form. Blocks that repeat a
    doc_id extend the earlier graph with reindexed tokens.
    """
    if hasattr(source, "read"):
        return _read_conllu_lines(source, getattr(source, "name", "<conllu>"))
    with open(source, encoding="utf-8") as fh:
        return _read_conllu_lines(fh, str(source))


def _read_conllu_lines(lines: Iterable[str], where: str) -> list[ParseGraph]:
    graphs: list[ParseGraph] = []
    by_id: dict[str, ParseGraph] = {}
    doc_id: str | None = None
    rows: list[tuple[int, ParseToken]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            _finish_block(doc_id, rows, where, graphs, by_id)
            doc_id, rows = None, []
            continue
        if line.startswith("#"):
            match = _DOC_ID_RE.match(line)
            if match:
                doc_id = match.group(1).strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise DataError(f"{where}:{lineno}: expected 10 tab-separated columns, got {len(cols)}")
        token_id, form, lemma, upos, xpos, _feats, head, deprel, _deps, _misc = cols
        if _RANGE_ID_RE.match(token_id) or _EMPTY_ID_RE.match(token_id):
            continue
        try:
            index = int(token_id)
        except ValueError:
            raise DataError(f"{where}:{lineno}: token id {token_id!r} is not an integer") from None
        try:
            head_index = int(head)
        except ValueError:
            raise DataError(f"{where}:{lineno}: head {head!r} is not an integer") from None
        pos = xpos if xpos not in ("", "_") else _UPOS_TO_PENN.get(upos, upos)
        rows.append(
            (
                lineno,
                ParseToken(
                    index=index,
                    form=form,
                    lemma=form.lower() if lemma in ("", "_") else lemma,
                    pos=pos,
                    head=head_index,
                    deprel=_alias_deprel(deprel.lower()),
                ),
            )
        )
    _finish_block(doc_id, rows, where, graphs, by_id)
    return graphs


def write_conllu(graphs: Iterable[ParseGraph], path: str | Path) -> None:
    """Write graphs back out; the Penn tag rides in the XPOS column."""
    with open(path, "w", encoding="utf-8") as fh:
        for graph in graphs:
            fh.write(f"# doc_id = {graph.doc_id}\n")
            for t in graph.tokens:
                fh.write(
                    "\t".join(
                        [str(t.index), t.form, t.lemma, "_", t.pos, "_", str(t.head), t.deprel, "_", "_"]
                    )
                    + "\n"
                )
            fh.write("\n")


def filter_dependencies(graph: ParseGraph) -> list[DepPair]:
    """Keep the six retained relations as (relation, head form, dependent form).

    Pairs come back ordered by dependent position; forms are lowercased and
    relation subtypes are truncated at the first colon.
    """
    pairs: list[DepPair] = []
    for token in graph.tokens:
        if token.head == 0:
            continue
        relation = token.deprel.split(":", 1)[0]
        if relation not in RETAINED_RELATIONS:
            continue
        head_form = graph.tokens[token.head - 1].form.lower()
        pairs.append(DepPair(relation=relation, head=head_form, dependent=token.form.lower()))
    return pairs


def filter_pos(graph: ParseGraph) -> list[str]:
    """Lowercased forms of NN/JJ/VB/RB-family tokens, in sentence order."""
    return [t.form.lower() for t in graph.tokens if t.pos.startswith(RETAINED_POS_PREFIXES)]


# --- heuristic fallback parser ---------------------------------------------
#
# Test and synthetic-data plumbing only: a deterministic tagger and four
# attachment patterns. Real corpora should arrive as CoNLL-U from an actual
# parser; graphs from here carry provenance via deprel "dep" leftovers and
# the caller's bookkeeping, and the CLI never invokes it implicitly.

_POSSESSIVES = frozenset(
    {"my", "mine", "your", "yours", "his", "her", "hers", "its", "our", "ours", "their", "theirs"}
)

# Small common-verb list; suffix rules alone cannot tag bare forms like
# "hate" or "send", and the attachment patterns need them to be verbs.
HEURISTIC_VERBS = frozenset(
    {
        "am", "is", "are", "was", "were", "be", "been", "being",
        "do", "does", "did", "done", "have", "has", "had",
        "go", "goes", "went", "gone", "get", "gets", "got",
        "run", "runs", "ran",
        "make", "makes", "made", "take", "takes", "took",
        "come", "comes", "came", "see", "sees", "saw", "seen",
        "know", "knows", "knew", "think", "thinks", "thought",
        "say", "says", "said", "tell", "tells", "told",
        "want", "wants", "need", "needs", "like", "likes",
        "love", "loves", "hate", "hates", "send", "sends", "sent",
        "keep", "keeps", "kept", "put", "puts", "stop", "stops",
        "kill", "kills", "fight", "fights", "destroy", "destroys",
        "attack", "attacks", "hurt", "hurts", "harm", "harms",
        "ban", "bans", "deport", "deports", "remove", "removes",
        "leave", "leaves", "left", "throw", "throws", "threw",
    }
)

_MODALS = frozenset({"will", "would", "can", "could", "shall", "should", "may", "might", "must"})
_DETERMINERS = frozenset(
    {
        "the", "a", "an", "this", "that", "these", "those", "all", "some", "any",
        "no", "every", "each", "both", "few", "many", "much", "several", "most",
        "other", "another", "either", "neither",
    }
)
_PREPOSITIONS = frozenset(
    {
        "in", "on", "at", "of", "for", "with", "from", "by", "about", "into",
        "over", "under", "after", "before", "between", "through", "during",
        "against", "without", "within", "off", "near",
    }
)
_CONJUNCTIONS = frozenset({"and", "or", "but", "nor", "so", "yet"})


def _heuristic_tag(token: str) -> str:
    lowered = token.lower()
    if lowered in _POSSESSIVES:
        return "PRP$"
    if lowered in default_pronouns().all_pronouns:
        return "PRP"
    if lowered in _DETERMINERS:
        return "DT"
    if lowered in HEURISTIC_VERBS:
        return "VB"
    if lowered in _MODALS:
        return "MD"
    if lowered == "to":
        return "TO"
    if lowered == "not":
        return "RB"
    if lowered in _PREPOSITIONS:
        return "IN"
    if lowered in _CONJUNCTIONS:
        return "CC"
    if not any(c.isalnum() for c in lowered):
        return "."
    if lowered.startswith("<") and lowered.endswith(">"):
        return "XX"
    if lowered.endswith("ly"):
        return "RB"
    if lowered.endswith(("ing", "ed")):
        return "VB"
    return "NN"


def heuristic_parse(tokens: list[str], doc_id: str = "") -> ParseGraph:
    """Deterministic pattern parser over a token list.

    Patterns: pronoun attaches nsubj to the nearest following verb; each verb
    takes the nearest following unattached pronoun/noun as dobj; determiners
    attach det to the nearest following noun; adverbs attach advmod to the
    nearest verb. The first verb (or first unattached token) is the root and
    collects leftovers under the unretained relation "dep".
    """
    tags = [_heuristic_tag(t) for t in tokens]
    n = len(tokens)
    heads = [None] * n  # type: list[int | None]
    rels = [""] * n
    verb_positions = [i for i, tag in enumerate(tags) if tag == "VB"]

    def attach(dep: int, head: int, rel: str) -> None:
        heads[dep] = head + 1
        rels[dep] = rel

    for i, tag in enumerate(tags):
        if tag == "PRP" and heads[i] is None:
            following = [v for v in verb_positions if v > i]
            if following:
                attach(i, following[0], "nsubj")
    for v in verb_positions:
        for k in range(v + 1, n):
            if heads[k] is None and (tags[k] == "PRP" or tags[k].startswith("NN")):
                attach(k, v, "dobj")
                break
    for i, tag in enumerate(tags):
        if tag == "DT" and heads[i] is None:
            for k in range(i + 1, n):
                if tags[k].startswith("NN"):
                    attach(i, k, "det")
                    break
    for i, tag in enumerate(tags):
        if tag == "RB" and heads[i] is None and verb_positions:
            nearest = min(verb_positions, key=lambda v: (abs(v - i), v))
            attach(i, nearest, "advmod")

    if verb_positions:
        root = verb_positions[0]
    else:
        unattached = [i for i in range(n) if heads[i] is None]
        root = unattached[0] if unattached else 0
    if n:
        heads[root] = 0
        rels[root] = "root"
        for i in range(n):
            if heads[i] is None:
                attach(i, root, "dep")

    return ParseGraph(
        doc_id=doc_id,
        tokens=[
            ParseToken(index=i + 1, form=tok, lemma=tok.lower(), pos=tags[i], head=heads[i], deprel=rels[i])
            for i, tok in enumerate(tokens)
        ],
    )
