import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtcrit.textnorm import (
    CLASSIFIER_NORM,
    EmojiTableError,
    NormConfig,
    TokenSequence,
    emoji_lexicon,
    load_emoji_table,
    metric_tokens,
    normalize,
    stem,
    tokenize,
)

ALL_CONFIGS = [
    NormConfig(),
    NormConfig(lowercase=True),
    NormConfig(strip_punctuation=True),
    NormConfig(map_emoji=True),
    NormConfig(lemmatize=True),
    NormConfig(lowercase=True, strip_punctuation=True),
    CLASSIFIER_NORM,
]


class TestNormalize:
    def test_lowercase_strip(self):
        config = NormConfig(lowercase=True, strip_punctuation=True)
        assert normalize("Hello, World!!", config) == "hello world"

    def test_emoji_mapped_to_lexicon(self):
        assert normalize("feeling 😞 today", NormConfig(map_emoji=True)) == "feeling dislike today"

    def test_emoji_survives_strip_when_mapped_first(self):
        config = NormConfig(strip_punctuation=True, map_emoji=True)
        assert normalize("bad day 😞!!", config) == "bad day dislike"

    def test_emoji_removed_by_strip_when_unmapped(self):
        config = NormConfig(strip_punctuation=True)
        assert normalize("bad day 😞", config) == "bad day"

    def test_empty_string(self):
        for config in ALL_CONFIGS:
            assert normalize("", config) == ""

    def test_all_flags_off_is_nfc_identity(self):
        text = "Café!! ÅB"
        assert normalize(text, NormConfig()) == unicodedata.normalize("NFC", text)

    def test_lemmatize_uses_stemmer(self):
        assert normalize("cats running", NormConfig(lemmatize=True)) == "cat runn"

    def test_arabic_text_preserved_by_strip(self):
        config = NormConfig(strip_punctuation=True)
        assert normalize("ما عندي حياه!", config) == "ما عندي حياه"

    @given(st.text(max_size=40))
    @settings(max_examples=300)
    def test_idempotent_for_every_config(self, text):
        for config in ALL_CONFIGS:
            once = normalize(text, config)
            assert normalize(once, config) == once


class TestStem:
    @pytest.mark.parametrize("word,expected", [
        ("cats", "cat"),
        ("glasses", "glass"),
        ("wanted", "want"),
        ("running", "runn"),
        ("doing", "doing"),   # short-stem guard
        ("as", "as"),
        ("", ""),
    ])
    def test_cases(self, word, expected):
        assert stem(word) == expected

    @given(st.text(alphabet="abcdefgs", max_size=12))
    def test_idempotent(self, word):
        assert stem(stem(word)) == stem(word)


class TestTokenize:
    def test_whitespace_split(self):
        assert tokenize("the cat sat").tokens == ("the", "cat", "sat")

    def test_punctuation_separated(self):
        assert tokenize("don't stop.").tokens == ("don", "'", "t", "stop", ".")

    def test_empty(self):
        assert tokenize("").tokens == ()

    def test_spans_cover_non_whitespace_exactly_once(self):
        text = "ok, fine\tnow!"
        seq = tokenize(text)
        covered = [False] * len(text)
        for start, end in seq.source_char_spans:
            for i in range(start, end):
                assert not covered[i]
                covered[i] = True
        for i, ch in enumerate(text):
            assert covered[i] == (not ch.isspace())

    @given(st.text(max_size=60))
    @settings(max_examples=300)
    def test_join_and_retokenize_is_identity(self, text):
        seq = tokenize(text)
        assert all(seq.tokens)
        again = tokenize(" ".join(seq.tokens))
        assert again.tokens == seq.tokens

    @given(st.text(max_size=60))
    @settings(max_examples=200)
    def test_spans_property(self, text):
        seq = tokenize(text)
        non_ws = sum(1 for ch in text if not ch.isspace())
        covered = sum(end - start for start, end in seq.source_char_spans)
        assert covered == non_ws
        prev_end = -1
        for start, end in seq.source_char_spans:
            assert start >= prev_end
            prev_end = end


class TestTokenSequence:
    def test_rejects_empty_tokens(self):
        with pytest.raises(ValueError):
            TokenSequence(("a", ""))

    def test_rejects_overlapping_spans(self):
        with pytest.raises(ValueError):
            TokenSequence(("a", "b"), ((0, 2), (1, 3)))

    def test_behaves_like_sequence(self):
        seq = tokenize("a b c")
        assert len(seq) == 3
        assert list(seq) == ["a", "b", "c"]
        assert seq[1] == "b"


class TestEmojiLexicon:
    def test_sad_face_maps_to_dislike(self):
        assert emoji_lexicon("😞") == "dislike"

    def test_non_emoji_absent(self):
        assert emoji_lexicon("a") is None

    def test_unmapped_emoji_absent(self):
        assert emoji_lexicon("🦖") is None

    def test_variation_selector_stripped(self):
        assert emoji_lexicon("❤️") == emoji_lexicon("❤") == "love"

    def test_table_is_injective(self):
        table = load_emoji_table()
        assert len(set(table.values())) == len(table)

    def test_duplicate_word_rejected(self, tmp_path):
        path = tmp_path / "emoji.tsv"
        path.write_text("😀\thappy\n😁\thappy\n", encoding="utf-8")
        with pytest.raises(EmojiTableError):
            load_emoji_table(path)

    def test_comments_and_blanks_ignored(self, tmp_path):
        path = tmp_path / "emoji.tsv"
        path.write_text("# header\n\n😀\thappy\n", encoding="utf-8")
        assert load_emoji_table(path) == {"😀": "happy"}


def test_metric_tokens_lowercase_and_separate():
    assert metric_tokens("I feel Tight!").tokens == ("i", "feel", "tight", "!")
