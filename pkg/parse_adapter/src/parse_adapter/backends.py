"""Dependency parser backends.

A backend turns a batch of raw texts into per-document lists of parsed
sentences. Two are provided: "rule", a deterministic lexicon-and-pattern
parser with no dependencies, and "spacy", a thin wrapper over an installed
spaCy pipeline (imported lazily so the package works without it).

Heads are 1-based within their sentence, 0 for the sentence root. Relation
labels follow current UD spelling; in particular direct objects come out as
`obj`, which downstream CoNLL-U consumers are expected to alias themselves.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import BackendParseError, DataError


@dataclass(frozen=True)
class Word:
    form: str
    lemma: str
    upos: str
    xpos: str
    feats: str
    head: int
    deprel: str


Sentence = list[Word]


# --- rule backend -----------------------------------------------------------

_TOKEN_RE = re.compile(r"[A-Za-z0-9'@#_-]+|[^\sA-Za-z0-9]")
_SENTENCE_END = frozenset({".", "!", "?"})

_SUBJECT_OBJECT_PRONOUNS = frozenset(
    {
        "i", "you", "he", "she", "it", "we", "they",
        "me", "him", "her", "us", "them",
        "myself", "yourself", "himself", "herself", "itself",
        "ourselves", "yourselves", "themselves",
        "everyone", "everybody", "someone", "somebody",
        "anyone", "anybody", "nobody",
    }
)
_POSSESSIVES = frozenset({"my", "your", "his", "her", "its", "our", "their"})
_DETERMINERS = frozenset(
    {
        "the", "a", "an", "this", "that", "these", "those", "all", "some",
        "any", "no", "every", "each", "both", "few", "many", "several",
        "most", "other", "another",
    }
)
_AUXILIARIES = frozenset(
    {
        "am", "is", "are", "was", "were", "be", "been", "being",
        "do", "does", "did", "have", "has", "had",
        "will", "would", "can", "could", "shall", "should", "may",
        "might", "must",
    }
)
_MODALS = frozenset({"will", "would", "can", "could", "shall", "should", "may", "might", "must"})
_PREPOSITIONS = frozenset(
    {
        "in", "on", "at", "of", "for", "with", "from", "by", "about",
        "into", "over", "under", "after", "before", "between", "through",
        "during", "against", "without", "near", "off", "behind",
    }
)
_CONJUNCTIONS = frozenset({"and", "or", "but", "nor", "so", "yet"})
_ADVERBS = frozenset(
    {
        "here", "there", "home", "away", "back", "now", "then", "never",
        "always", "often", "soon", "today", "tomorrow", "yesterday",
        "again", "first", "together", "everywhere", "anywhere",
    }
)
# Bare and inflected forms the suffix rules cannot recognize.
_VERBS = frozenset(
    {
        "want", "wants", "send", "sends", "sent", "go", "goes", "went",
        "come", "comes", "came", "stop", "stops", "take", "takes", "took",
        "make", "makes", "made", "get", "gets", "got", "keep", "keeps",
        "kept", "put", "puts", "see", "sees", "saw", "know", "knows",
        "knew", "think", "thinks", "thought", "say", "says", "said",
        "tell", "tells", "told", "love", "loves", "hate", "hates",
        "like", "likes", "need", "needs", "belong", "belongs", "protect",
        "protects", "ignore", "ignores", "listen", "listens", "stand",
        "stands", "stood", "start", "starts", "win", "wins",
        "won", "open", "opens", "give", "gives", "gave", "leave",
        "leaves", "left", "welcome", "welcomes", "deport", "deports",
        "defend", "defends", "fight", "fights", "fought", "run", "runs",
        "ran", "help", "helps", "post", "posts", "find", "finds",
        "found", "bring", "brings", "brought",
    }
)

_NOMINAL = frozenset({"NOUN", "PROPN", "PRON"})

_UPOS_TO_XPOS = {
    "NOUN": "NN",
    "PROPN": "NNP",
    "VERB": "VB",
    "ADJ": "JJ",
    "ADV": "RB",
    "DET": "DT",
    "ADP": "IN",
    "CCONJ": "CC",
    "NUM": "CD",
    "PUNCT": ".",
    "X": "XX",
}


def _tag(tokens: list[str]) -> list[str]:
    """Coarse UD tags from closed-class lexicons plus suffix fallbacks."""
    tags = []
    for pos, tok in enumerate(tokens):
        low = tok.lower()
        if not any(c.isalnum() for c in tok):
            tags.append("PUNCT")
        elif low.replace(",", "").replace(".", "").isdigit():
            tags.append("NUM")
        elif low in _POSSESSIVES or low in _SUBJECT_OBJECT_PRONOUNS:
            tags.append("PRON")
        elif low in _DETERMINERS:
            tags.append("DET")
        elif low in _MODALS or low in _AUXILIARIES:
            tags.append("AUX")
        elif low == "to":
            tags.append("TO")  # resolved against the next tag below
        elif low == "not":
            tags.append("PART")
        elif low in _PREPOSITIONS:
            tags.append("ADP")
        elif low in _CONJUNCTIONS:
            tags.append("CCONJ")
        elif low in _VERBS:
            tags.append("VERB")
        elif low.endswith("ly"):
            tags.append("ADV")
        elif low in _ADVERBS:
            tags.append("ADV")
        elif low.endswith(("ing", "ed")):
            tags.append("VERB")
        elif pos > 0 and tok[:1].isupper():
            tags.append("PROPN")
        else:
            tags.append("NOUN")
    for pos, tag in enumerate(tags):
        if tag == "TO":
            nxt = tags[pos + 1] if pos + 1 < len(tags) else ""
            tags[pos] = "PART" if nxt in ("VERB", "AUX") else "ADP"
    return tags


def _xpos(low: str, tag: str) -> str:
    if tag == "PRON":
        return "PRP$" if low in _POSSESSIVES else "PRP"
    if tag == "AUX":
        return "MD" if low in _MODALS else "VB"
    if tag == "PART":
        return "TO" if low == "to" else "RB"
    return _UPOS_TO_XPOS.get(tag, tag)


def _attach(tokens: list[str], tags: list[str]) -> tuple[list[int], list[str]]:
    """One deterministic pass of attachment patterns. Heads are 1-based."""
    n = len(tokens)
    head: list[int | None] = [None] * n
    rel = [""] * n
    lows = [t.lower() for t in tokens]

    def done(i: int) -> bool:
        return head[i] is not None

    def attach(dep: int, gov: int, label: str) -> None:
        head[dep] = gov + 1
        rel[dep] = label

    verbs = [i for i, t in enumerate(tags) if t == "VERB"]
    if not verbs:
        # copula-ish sentences: promote the first auxiliary
        aux = [i for i, t in enumerate(tags) if t == "AUX"]
        if aux:
            verbs = [aux[0]]
    if verbs:
        root = verbs[0]
    else:
        root = next((i for i, t in enumerate(tags) if t in _NOMINAL), 0)
    head[root] = 0
    rel[root] = "root"

    # verb chain: to-marked verbs are open complements, the rest coordinate
    prev = root
    for v in verbs[1:]:
        marked = any(lows[m] == "to" and tags[m] == "PART" for m in range(prev + 1, v))
        if marked:
            attach(v, prev, "xcomp")
        else:
            attach(v, root, "conj")
        prev = v

    for i, tag in enumerate(tags):
        if done(i):
            continue
        if tag == "PART" and lows[i] == "to":
            nxt = next((v for v in verbs if v > i), None)
            if nxt is not None:
                attach(i, nxt, "mark")
        elif tag == "PART":  # not
            nearest = _nearest(verbs, i)
            if nearest is not None:
                attach(i, nearest, "advmod")
        elif tag == "AUX":
            nxt = next((v for v in verbs if v > i), None)
            gov = nxt if nxt is not None else _nearest(verbs, i)
            if gov is not None and gov != i:
                attach(i, gov, "aux")
        elif tag == "CCONJ":
            nxt = next(
                (k for k in range(i + 1, n) if tags[k] == "VERB" or tags[k] in _NOMINAL),
                None,
            )
            if nxt is not None:
                attach(i, nxt, "cc")

    def is_candidate(k: int) -> bool:
        return tags[k] in _NOMINAL and not done(k) and lows[k] not in _POSSESSIVES

    # subjects: last free nominal before each non-xcomp verb
    for v in verbs:
        if rel[v] == "xcomp":
            continue
        floor = max((u for u in verbs if u < v), default=-1)
        for k in range(v - 1, floor, -1):
            if is_candidate(k):
                attach(k, v, "nsubj")
                break

    # objects: first free nominal after the verb, stopping at the next
    # verb or preposition (prepositions claim what follows them)
    for v in verbs:
        ceiling = min((u for u in verbs if u > v), default=n)
        for k in range(v + 1, ceiling):
            if tags[k] == "ADP":
                break
            if is_candidate(k):
                attach(k, v, "obj")
                break

    for i, tag in enumerate(tags):
        if tag != "ADP" or done(i):
            continue
        nominal = next((k for k in range(i + 1, n) if tags[k] in _NOMINAL), None)
        if nominal is None:
            continue
        attach(i, nominal, "case")
        if not done(nominal):
            gov = max((v for v in verbs if v < i), default=None)
            if gov is not None:
                attach(nominal, gov, "obl")
            elif nominal != root:
                attach(nominal, root, "nmod")

    for i, tag in enumerate(tags):
        if done(i):
            continue
        if tag == "DET" or (tag == "PRON" and lows[i] in _POSSESSIVES):
            label = "det" if tag == "DET" else "nmod:poss"
            gov = next((k for k in range(i + 1, n) if tags[k] in ("NOUN", "PROPN")), None)
            if gov is None:
                gov = next((k for k in range(i - 1, -1, -1) if tags[k] in _NOMINAL), None)
            if gov is not None and gov != i:
                attach(i, gov, label)
        elif tag == "ADV":
            nearest = _nearest(verbs, i)
            if nearest is not None and nearest != i:
                attach(i, nearest, "advmod")

    # noun-noun compounds over whatever is still free
    for i in range(n - 1):
        if tags[i] == "NOUN" and tags[i + 1] in ("NOUN", "PROPN") and not done(i) and i != root:
            attach(i, i + 1, "compound")

    for i in range(n):
        if not done(i):
            attach(i, root, "punct" if tags[i] == "PUNCT" else "dep")
    return [h for h in head], rel  # type: ignore[misc]


def _nearest(positions: list[int], i: int) -> int | None:
    if not positions:
        return None
    return min(positions, key=lambda v: (abs(v - i), v))


class RuleBackend:
    """Offline fallback parser: closed-class lexicons and a few patterns.

    Deterministic by construction. Rejects control characters rather than
    guessing at their tokenization.
    """

    name = "rule"
    version = "1"

    def parse_batch(self, texts: list[str]) -> list[list[Sentence]]:
        return [self._parse_one(text) for text in texts]

    def _parse_one(self, text: str) -> list[Sentence]:
        for ch in text:
            if ord(ch) < 32 and ch not in "\t\n\r":
                raise BackendParseError(
                    f"control character {ch!r} is not parseable"
                )
        tokens = _TOKEN_RE.findall(text)
        sentences: list[Sentence] = []
        current: list[str] = []
        for tok in tokens:
            current.append(tok)
            if tok in _SENTENCE_END:
                sentences.append(self._parse_sentence(current))
                current = []
        if current:
            sentences.append(self._parse_sentence(current))
        return sentences

    def _parse_sentence(self, tokens: list[str]) -> Sentence:
        tags = _tag(tokens)
        heads, rels = _attach(tokens, tags)
        words = []
        for i, tok in enumerate(tokens):
            low = tok.lower()
            words.append(
                Word(
                    form=tok,
                    lemma=low,
                    upos=tags[i],
                    xpos=_xpos(low, tags[i]),
                    feats="_",
                    head=heads[i],
                    deprel=rels[i],
                )
            )
        return words


# --- spaCy backend ----------------------------------------------------------


class SpacyBackend:
    """Wrap an installed spaCy pipeline; heads and labels come out UD-style."""

    name = "spacy"

    def __init__(self, model: str = "en_core_web_sm", batch_size: int = 32):
        try:
            import spacy
        except ImportError as exc:
            raise DataError(
                "backend 'spacy' requires the spacy package to be installed"
            ) from exc
        try:
            self._nlp = spacy.load(model)
        except OSError as exc:
            raise DataError(f"spacy model {model!r} is not installed") from exc
        self._batch_size = batch_size
        self.version = f"{spacy.__version__}/{model}"

    def parse_batch(self, texts: list[str]) -> list[list[Sentence]]:
        out = []
        for doc in self._nlp.pipe(texts, batch_size=self._batch_size):
            sentences = []
            for sent in doc.sents:
                words = []
                for t in sent:
                    is_root = t.head is t
                    words.append(
                        Word(
                            form=t.text,
                            lemma=t.lemma_ or t.text.lower(),
                            upos=t.pos_ or "X",
                            xpos=t.tag_ or "_",
                            feats=str(t.morph) or "_",
                            head=0 if is_root else t.head.i - sent.start + 1,
                            deprel="root" if is_root else t.dep_.lower(),
                        )
                    )
                sentences.append(words)
            out.append(sentences)
        return out


def get_backend(spec: str, batch_size: int = 32):
    """Resolve a backend spec: "rule", "spacy", or "spacy:<model>".

    Unknown names raise ValueError (a usage problem); a known backend whose
    package or model is missing raises DataError.
    """
    name, _, model = spec.partition(":")
    if name == "rule":
        return RuleBackend()
    if name == "spacy":
        return SpacyBackend(model or "en_core_web_sm", batch_size)
    raise ValueError(f"unknown backend {name!r}; available: rule, spacy[:model]")
