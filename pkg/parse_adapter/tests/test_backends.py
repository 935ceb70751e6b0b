import sys
import types

import pytest

from parse_adapter.backends import (
    RuleBackend,
    SpacyBackend,
    Word,
    get_backend,
)
from parse_adapter.errors import BackendParseError, DataError


def edges(sentence):
    out = set()
    for position, word in enumerate(sentence, start=1):
        if word.head == 0:
            out.add(f"root({word.form.lower()})")
        else:
            head = sentence[word.head - 1].form.lower()
            out.add(f"{word.deprel}({head},{word.form.lower()})")
    return out


class TestRuleBackend:
    def test_subject_and_object_attachment(self):
        (sentence,) = RuleBackend().parse_batch(["We want to send them home"])[0]
        got = edges(sentence)
        assert "nsubj(want,we)" in got
        assert "obj(send,them)" in got
        assert "xcomp(want,send)" in got
        assert "mark(send,to)" in got
        assert "advmod(send,home)" in got
        assert "root(want)" in got

    def test_heads_are_in_range_and_one_root(self):
        texts = [
            "The quick brown fox jumped over the lazy dog",
            "Stop",
            "Nobody listens to the workers",
            "numbers like 12 and 7 are fine",
        ]
        for doc in RuleBackend().parse_batch(texts):
            for sentence in doc:
                n = len(sentence)
                roots = [w for w in sentence if w.head == 0]
                assert len(roots) == 1
                for w in sentence:
                    assert 0 <= w.head <= n
                    assert w.deprel

    def test_determiner_and_possessive(self):
        (sentence,) = RuleBackend().parse_batch(["They take our jobs"])[0]
        got = edges(sentence)
        assert "nmod:poss(jobs,our)" in got
        assert "obj(take,jobs)" in got

    def test_prepositional_phrase(self):
        (sentence,) = RuleBackend().parse_batch(["Send money to the families"])[0]
        got = edges(sentence)
        assert "obj(send,money)" in got
        assert "case(families,to)" in got
        assert "obl(send,families)" in got
        assert "det(families,the)" in got

    def test_sentence_split_on_terminal_punctuation(self):
        doc = RuleBackend().parse_batch(["They hate us. We know it."])[0]
        assert len(doc) == 2
        assert "obj(hate,us)" in edges(doc[0])
        assert "nsubj(know,we)" in edges(doc[1])

    def test_copula_promotion(self):
        (sentence,) = RuleBackend().parse_batch(["They are criminals"])[0]
        got = edges(sentence)
        assert "root(are)" in got
        assert "nsubj(are,they)" in got

    def test_control_characters_rejected(self):
        with pytest.raises(BackendParseError, match="control character"):
            RuleBackend().parse_batch(["fine text\x07here"])

    def test_plain_whitespace_is_not_a_control_failure(self):
        doc = RuleBackend().parse_batch(["line one\nline two"])[0]
        assert doc

    def test_empty_text_parses_to_no_sentences(self):
        assert RuleBackend().parse_batch([""]) == [[]]

    def test_deterministic(self):
        text = "We must protect our people from them"
        first = RuleBackend().parse_batch([text])
        second = RuleBackend().parse_batch([text])
        assert first == second


def install_fake_spacy(monkeypatch, docs_by_text, version="0.0-fake", load_error=None):
    class FakeNLP:
        def pipe(self, texts, batch_size=32):
            return [docs_by_text[t] for t in texts]

    fake = types.ModuleType("spacy")
    fake.__version__ = version

    def load(model, **kwargs):
        if load_error is not None:
            raise load_error
        fake.loaded_model = model
        return FakeNLP()

    fake.load = load
    monkeypatch.setitem(sys.modules, "spacy", fake)
    return fake


class FakeToken:
    def __init__(self, i, text, lemma, pos, tag, dep):
        self.i = i
        self.text = text
        self.lemma_ = lemma
        self.pos_ = pos
        self.tag_ = tag
        self.dep_ = dep
        self.morph = ""
        self.head = self


class FakeSent:
    def __init__(self, tokens):
        self._tokens = tokens
        self.start = tokens[0].i

    def __iter__(self):
        return iter(self._tokens)


class FakeDoc:
    def __init__(self, sents):
        self.sents = sents


def two_sentence_doc():
    they = FakeToken(0, "They", "they", "PRON", "PRP", "nsubj")
    hate = FakeToken(1, "hate", "hate", "VERB", "VBP", "ROOT")
    us = FakeToken(2, "us", "we", "PRON", "PRP", "dobj")
    they.head = hate
    us.head = hate
    we = FakeToken(3, "We", "we", "PRON", "PRP", "nsubj")
    know = FakeToken(4, "know", "know", "VERB", "VBP", "ROOT")
    we.head = know
    return FakeDoc([FakeSent([they, hate, us]), FakeSent([we, know])])


class TestSpacyBackend:
    def test_conversion_from_pipeline_tokens(self, monkeypatch):
        install_fake_spacy(monkeypatch, {"x": two_sentence_doc()})
        backend = SpacyBackend()
        (doc,) = backend.parse_batch(["x"])
        assert len(doc) == 2
        first, second = doc
        assert [w.head for w in first] == [2, 0, 2]
        assert [w.deprel for w in first] == ["nsubj", "root", "dobj"]
        # heads are sentence-local even though token indices are document-wide
        assert [w.head for w in second] == [2, 0]
        assert first[1].deprel == "root"
        assert backend.version.startswith("0.0-fake/")

    def test_model_passthrough(self, monkeypatch):
        fake = install_fake_spacy(monkeypatch, {})
        SpacyBackend("en_core_web_lg")
        assert fake.loaded_model == "en_core_web_lg"

    def test_missing_package(self, monkeypatch):
        monkeypatch.setitem(sys.modules, "spacy", None)
        with pytest.raises(DataError, match="spacy package"):
            SpacyBackend()

    def test_missing_model(self, monkeypatch):
        install_fake_spacy(monkeypatch, {}, load_error=OSError("no model"))
        with pytest.raises(DataError, match="not installed"):
            SpacyBackend("en_core_web_sm")


class TestRegistry:
    def test_rule_resolves(self):
        assert get_backend("rule").name == "rule"

    def test_spacy_with_model_resolves(self, monkeypatch):
        fake = install_fake_spacy(monkeypatch, {})
        backend = get_backend("spacy:my_model", batch_size=4)
        assert backend.name == "spacy"
        assert fake.loaded_model == "my_model"

    def test_unknown_backend(self):
        with pytest.raises(ValueError, match="unknown backend"):
            get_backend("stanford")


def test_word_is_frozen():
    w = Word("a", "a", "NOUN", "NN", "_", 0, "root")
    with pytest.raises(AttributeError):
        w.form = "b"
