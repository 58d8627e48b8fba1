"""Text normalization and tokenization shared by the classifier input path
and the string metrics.

The classifier path uses the full flag set (lowercase, punctuation removal,
emoji-to-lexicon mapping, lemmatization). The metric path only lowercases;
punctuation is kept but separated into standalone tokens. Arabic source text
is never tokenized here, it passes through the toolkit as opaque payload.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Sequence

# Variation selectors are presentation hints; they are stripped before any
# emoji lookup so that both the plain and the emoji-style form of a symbol
# hit the same table key.
_VARIATION_SELECTORS = "︎️"

_TOKEN_RE = re.compile(r"[^\W_]+|\S")

_WORD_SUFFIXES = ("ing", "ed", "es", "s")
_MIN_STEM = 3


class EmojiTableError(ValueError):
    """The emoji lexicon file is malformed or not injective."""


@dataclass(frozen=True)
class NormConfig:
    """Independent normalization switches."""

    lowercase: bool = False
    strip_punctuation: bool = False
    map_emoji: bool = False
    lemmatize: bool = False


#: Normalization applied to classifier input text.
CLASSIFIER_NORM = NormConfig(lowercase=True, strip_punctuation=True, map_emoji=True, lemmatize=True)

#: Normalization applied before metric tokenization (punctuation is kept,
#: tokenize() separates it into standalone tokens).
METRIC_NORM = NormConfig(lowercase=True)


@dataclass(frozen=True)
class TokenSequence:
    """Ordered list of non-empty tokens, optionally with source offsets.

    Spans, when present, are (start, end) offsets into the original string,
    non-overlapping and monotonically increasing. The object behaves as a
    plain sequence of token strings.
    """

    tokens: tuple[str, ...]
    source_char_spans: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for tok in self.tokens:
            if not tok:
                raise ValueError("empty token in TokenSequence")
        spans = self.source_char_spans
        if spans is not None:
            spans = tuple((int(a), int(b)) for a, b in spans)
            object.__setattr__(self, "source_char_spans", spans)
            if len(spans) != len(self.tokens):
                raise ValueError("span count must equal token count")
            prev_end = -1
            for start, end in spans:
                if start < 0 or end <= start:
                    raise ValueError(f"invalid span ({start}, {end})")
                if start < prev_end:
                    raise ValueError("spans must be non-overlapping and increasing")
                prev_end = end

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    def text(self) -> str:
        return " ".join(self.tokens)


def _strip_variation_selectors(text: str) -> str:
    for ch in _VARIATION_SELECTORS:
        text = text.replace(ch, "")
    return text


def load_emoji_table(path=None) -> dict[str, str]:
    """Load an ``emoji<TAB>word`` table, ``#`` starts a comment line.

    The mapping must be injective: duplicate emojis or duplicate words are
    rejected. Keys are stored NFC-normalized with variation selectors removed.
    """
    if path is None:
        content = resources.files("mtcrit").joinpath("data/emoji_lexicon.tsv").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            content = fh.read()
    table: dict[str, str] = {}
    words: dict[str, str] = {}
    for line_no, line in enumerate(content.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise EmojiTableError(f"line {line_no}: expected 'emoji<TAB>word', got {line!r}")
        emoji = _strip_variation_selectors(unicodedata.normalize("NFC", parts[0]))
        word = parts[1].strip()
        if emoji in table:
            raise EmojiTableError(f"line {line_no}: duplicate emoji {emoji!r}")
        if word in words:
            raise EmojiTableError(
                f"line {line_no}: word {word!r} already used for {words[word]!r}, mapping must be injective"
            )
        table[emoji] = word
        words[word] = emoji
    return table


_default_table: dict[str, str] | None = None
_default_pattern: re.Pattern | None = None


def _default_emoji_table() -> dict[str, str]:
    global _default_table
    if _default_table is None:
        _default_table = load_emoji_table()
    return _default_table


def _emoji_pattern(table: dict[str, str]) -> re.Pattern:
    global _default_pattern
    if table is _default_table and _default_pattern is not None:
        return _default_pattern
    # Longest keys first so multi-codepoint emoji win over their prefixes.
    alternatives = sorted(table, key=len, reverse=True)
    pattern = re.compile("|".join(re.escape(k) for k in alternatives))
    if table is _default_table:
        _default_pattern = pattern
    return pattern


def emoji_lexicon(emoji: str, table: dict[str, str] | None = None) -> str | None:
    """Word equivalent of a single emoji, or None when unmapped."""
    if table is None:
        table = _default_emoji_table()
    key = _strip_variation_selectors(unicodedata.normalize("NFC", emoji))
    return table.get(key)


def stem(word: str) -> str:
    """Light English suffix stemmer: strips s/es/ed/ing to a fixpoint.

    Guards: the remaining stem keeps at least 3 characters and a final
    ``ss`` is never reduced. Idempotent by construction.
    """
    while True:
        for suffix in _WORD_SUFFIXES:
            if not word.endswith(suffix):
                continue
            if suffix == "s" and word.endswith("ss"):
                continue
            candidate = word[: -len(suffix)]
            if len(candidate) >= _MIN_STEM:
                word = candidate
                break
        else:
            return word


Lemmatizer = Callable[[str], str]


def normalize(
    text: str,
    config: NormConfig,
    lemmatizer: Lemmatizer | None = None,
    emoji_table: dict[str, str] | None = None,
) -> str:
    """Normalize a string according to the given flags.

    Idempotent for every config; with all flags off the result is exactly
    the NFC form of the input. Emoji are mapped before punctuation removal,
    otherwise the mapping targets would already be gone.
    """
    s = unicodedata.normalize("NFC", text)
    if config.map_emoji:
        table = emoji_table if emoji_table is not None else _default_emoji_table()
        s = _strip_variation_selectors(s)
        if table:
            s = _emoji_pattern(table).sub(lambda m: f" {table[m.group(0)]} ", s)
    if config.lowercase:
        s = s.lower()
    if config.strip_punctuation:
        s = "".join(ch if ch.isalnum() or ch.isspace() else " " for ch in s)
    if config.lemmatize:
        apply = lemmatizer if lemmatizer is not None else stem
        s = " ".join(apply(w) for w in s.split())
    if config.map_emoji or config.strip_punctuation or config.lemmatize:
        s = " ".join(s.split())
    return unicodedata.normalize("NFC", s)


def tokenize(text: str) -> TokenSequence:
    """Whitespace tokenization with punctuation separated into standalone tokens.

    Word tokens are maximal alphanumeric runs; every other non-space
    character becomes its own token. Spans cover each non-whitespace
    character of the input exactly once, so joining the tokens with single
    spaces and re-tokenizing is the identity.
    """
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    for match in _TOKEN_RE.finditer(text):
        tokens.append(match.group(0))
        spans.append(match.span())
    return TokenSequence(tuple(tokens), tuple(spans))


def metric_tokens(text: str) -> TokenSequence:
    """Default metric-path tokenization: NFC, lowercase, punctuation-separated."""
    return tokenize(normalize(text, METRIC_NORM))


def as_tokens(seq: "TokenSequence | Sequence[str]") -> tuple[str, ...]:
    """Accept either a TokenSequence or any sequence of token strings."""
    if isinstance(seq, TokenSequence):
        return seq.tokens
    return tuple(seq)
