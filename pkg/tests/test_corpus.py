"""Corpus loading, tokenization and two-sidedness."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from otherlex.corpus import (
    Dataset,
    Document,
    PronounConfig,
    default_pronouns,
    is_two_sided,
    load_corpus,
    load_pronouns,
    save_corpus,
    tokenize,
    two_sided_rate,
)
from otherlex.errors import DataError


class TestTokenize:
    def test_frozen_example(self):
        assert tokenize("@user WE hate THEM! http://t.co/x #out") == [
            "<mention>",
            "we",
            "hate",
            "them",
            "!",
            "<url>",
            "out",
        ]

    def test_empty_and_whitespace(self):
        assert tokenize("") == []
        assert tokenize("   \t\n") == []

    def test_lowercases(self):
        assert tokenize("We HATE Them") == ["we", "hate", "them"]

    def test_punctuation_splits_off(self):
        assert tokenize("home!!") == ["home", "!", "!"]
        assert tokenize("go,now") == ["go", ",", "now"]

    def test_url_variants(self):
        assert tokenize("see https://example.com/a?b=1 now") == ["see", "<url>", "now"]
        assert tokenize("www.example.com") == ["<url>"]

    def test_hashtag_keeps_word(self):
        assert tokenize("#SendThemHome") == ["sendthemhome"]

    def test_contractions_stay_whole(self):
        assert tokenize("don't y'all") == ["don't", "y'all"]

    def test_sentinels_survive_retokenization(self):
        assert tokenize("<url> <mention>") == ["<url>", "<mention>"]

    @given(st.text(max_size=200))
    @settings(max_examples=200)
    def test_idempotent_on_joined_output(self, text):
        tokens = tokenize(text)
        assert tokenize(" ".join(tokens)) == tokens

    @given(st.text(max_size=200))
    def test_output_is_lowercase_and_nonempty(self, text):
        for token in tokenize(text):
            assert token
            assert token == token.lower()


class TestPronouns:
    def test_default_inventory(self):
        cfg = default_pronouns()
        assert cfg.ingroup == {"we", "us", "our", "ours", "ourselves"}
        assert cfg.outgroup == {
            "they",
            "them",
            "their",
            "theirs",
            "themselves",
            "you",
            "your",
            "yours",
            "yourselves",
        }
        assert {"i", "me", "he", "she", "it", "himself"} <= cfg.other
        assert cfg.ingroup <= cfg.all_pronouns
        assert cfg.outgroup <= cfg.all_pronouns

    def test_load_custom_file(self, tmp_path):
        path = tmp_path / "pronouns.txt"
        path.write_text("# mine\n[ingroup]\nwe\nWir\n[outgroup]\nthey\n")
        cfg = load_pronouns(path)
        assert cfg.ingroup == {"we", "wir"}
        assert cfg.outgroup == {"they"}
        assert cfg.other == frozenset()

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "pronouns.txt"
        path.write_text("[ingroup]\nwe\n[weird]\nx\n[outgroup]\nthey\n")
        with pytest.raises(DataError, match=r"\[weird\]"):
            load_pronouns(path)

    def test_entry_before_section_rejected(self, tmp_path):
        path = tmp_path / "pronouns.txt"
        path.write_text("we\n[ingroup]\nwe\n[outgroup]\nthey\n")
        with pytest.raises(DataError, match="before any section"):
            load_pronouns(path)

    def test_overlapping_groups_rejected(self):
        with pytest.raises(DataError, match="both ingroup and outgroup"):
            PronounConfig(ingroup=frozenset({"we"}), outgroup=frozenset({"we", "they"}))

    def test_empty_group_rejected(self):
        with pytest.raises(DataError, match="non-empty"):
            PronounConfig(ingroup=frozenset(), outgroup=frozenset({"they"}))


class TestTwoSided:
    def test_ingroup_outgroup_examples(self):
        assert is_two_sided(["we", "hate", "them"]) is True
        assert is_two_sided(["they", "told", "them"]) is False
        assert is_two_sided(["we", "are", "here"]) is False
        assert is_two_sided([]) is False

    def test_any_two_pronouns_examples(self):
        assert is_two_sided(["they", "told", "them"], mode="any_two_pronouns") is True
        assert is_two_sided(["we", "are", "here"], mode="any_two_pronouns") is False
        # repeats count as occurrences
        assert is_two_sided(["we", "we"], mode="any_two_pronouns") is True

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="unknown two-sided mode"):
            is_two_sided(["we"], mode="bogus")

    @given(st.lists(st.sampled_from(["we", "they", "them", "us", "hate", "dog", "i", "you"]), max_size=12))
    def test_ingroup_outgroup_implies_two_occurrences(self, tokens):
        if is_two_sided(tokens, mode="ingroup_outgroup"):
            assert is_two_sided(tokens, mode="any_two_pronouns")


def _write_jsonl(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n")


class TestLoadCorpus:
    def test_jsonl_golden(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(
            path,
            [
                {"id": "a", "text": "We hate THEM", "label": 1},
                {"id": "b", "text": "nice day", "label": 0},
                {"id": "c", "text": "no label here"},
            ],
        )
        ds = load_corpus(path)
        assert ds.name == "c"
        assert [d.id for d in ds.documents] == ["a", "b", "c"]
        assert ds.documents[0].tokens == ["we", "hate", "them"]
        assert ds.documents[2].label is None
        assert ds.class_counts == {0: 1, 1: 1}

    def test_integer_ids_coerced(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [{"id": 17, "text": "x", "label": 0}])
        assert load_corpus(path).documents[0].id == "17"

    def test_csv_golden(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text('id,text,label\na,"We hate them, all",1\nb,fine,\n')
        ds = load_corpus(path)
        assert ds.documents[0].tokens == ["we", "hate", "them", ",", "all"]
        assert ds.documents[0].label == 1
        assert ds.documents[1].label is None

    def test_malformed_json_names_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id": "a", "text": "ok"}\n{broken\n')
        with pytest.raises(DataError, match=r"c\.jsonl:2"):
            load_corpus(path)

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [{"id": "a", "text": "x"}, {"id": "a", "text": "y"}])
        with pytest.raises(DataError, match="duplicate document id 'a'"):
            load_corpus(path)

    def test_unknown_label_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [{"id": "a", "text": "x", "label": 2}])
        with pytest.raises(DataError, match="label must be 0 or 1"):
            load_corpus(path)

    def test_boolean_label_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [{"id": "a", "text": "x", "label": True}])
        with pytest.raises(DataError, match="label must be 0 or 1"):
            load_corpus(path)

    def test_missing_text_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [{"id": "a"}])
        with pytest.raises(DataError, match="'id' and 'text'"):
            load_corpus(path)

    def test_class_counts_at_reference_shape(self, tmp_path):
        # 1901 records, 222 positive, mirrors the largest evaluation corpus
        path = tmp_path / "big.jsonl"
        records = [
            {"id": f"d{i}", "text": "we dislike them" if i < 222 else "fine day", "label": 1 if i < 222 else 0}
            for i in range(1901)
        ]
        _write_jsonl(path, records)
        ds = load_corpus(path)
        assert len(ds) == 1901
        assert ds.class_counts == {0: 1679, 1: 222}

    @pytest.mark.parametrize("ext", ["jsonl", "csv"])
    def test_round_trip(self, tmp_path, ext):
        src = tmp_path / f"src.{ext}"
        dst = tmp_path / f"dst.{ext}"
        records = [
            {"id": "a", "text": "We hate THEM! #out", "label": 1},
            {"id": "b", "text": "quiet, calm", "label": 0},
            {"id": "c", "text": "nothing"},
        ]
        if ext == "jsonl":
            _write_jsonl(src, records)
        else:
            src.write_text(
                "id,text,label\n"
                + "\n".join(f'{r["id"]},"{r["text"]}",{r.get("label", "")}' for r in records)
                + "\n"
            )
        first = load_corpus(src)
        save_corpus(first, dst)
        second = load_corpus(dst)
        assert [(d.id, d.text, d.label, d.tokens) for d in first.documents] == [
            (d.id, d.text, d.label, d.tokens) for d in second.documents
        ]


class TestTwoSidedRate:
    def _dataset(self, rows):
        docs = [Document(id=f"d{i}", text=" ".join(t), tokens=t, label=y) for i, (t, y) in enumerate(rows)]
        return Dataset(name="t", documents=docs)

    def test_exact_rates(self):
        ds = self._dataset(
            [
                (["we", "hate", "them"], 1),
                (["we", "alone"], 1),
                (["calm", "words"], 0),
                (["they", "are", "fine"], 0),
                (["us", "and", "they"], 0),
            ]
        )
        assert two_sided_rate(ds) == {0: 1 / 3, 1: 1 / 2}

    def test_rates_need_labels(self):
        ds = self._dataset([(["we"], 1)])
        ds.documents.append(Document(id="u", text="x", tokens=["x"], label=None))
        with pytest.raises(DataError, match="has no label"):
            two_sided_rate(ds)

    def test_absent_class_absent_from_rates(self):
        ds = self._dataset([(["we", "them"], 1), (["we", "they"], 1)])
        assert two_sided_rate(ds) == {1: 1.0}

    @given(st.permutations(range(6)))
    def test_document_order_irrelevant(self, order):
        rows = [
            (["we", "hate", "them"], 1),
            (["nothing"], 0),
            (["us", "vs", "you"], 1),
            (["they", "won"], 0),
            (["we", "won"], 0),
            (["all", "of", "them", "and", "us"], 1),
        ]
        base = self._dataset(rows)
        shuffled = self._dataset([rows[i] for i in order])
        assert two_sided_rate(base) == two_sided_rate(shuffled)
