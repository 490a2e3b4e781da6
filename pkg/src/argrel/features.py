"""Tokenization, rule-based POS tagging and the standard pair features.

The standard feature vector for a pair has 41 slots::

    child syntactic (11) | parent syntactic (11) |
    child sentiment (8)  | parent sentiment (8)  | entailment one-hot (3)
"""
from __future__ import annotations

import enum
import json
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import ArgumentPair, EntailmentClass


class PosTag(enum.Enum):
    NOUN = "Noun"
    VERB = "Verb"
    ADJECTIVE = "Adjective"
    ADVERB = "Adverb"
    MODAL = "Modal"
    PRON_1SG = "Pron1Sg"
    PRON_1PL = "Pron1Pl"
    PRON_2 = "Pron2"
    PRON_3SG = "Pron3Sg"
    PRON_3PL = "Pron3Pl"
    PUNCT = "Punct"
    OTHER = "Other"


@dataclass(frozen=True)
class Token:
    surface: str
    pos: PosTag


SYNTACTIC_NAMES = (
    "words", "nouns", "verbs", "pron_1sg", "pron_2", "pron_3sg", "pron_3pl",
    "pron_1pl", "modals", "modifiers", "lexical_diversity",
)
SENTIMENT_NAMES = (
    "score", "n_positive", "n_negative", "n_neutral",
    "polarity_positive", "polarity_negative", "polarity_neutral", "polarity_score",
)
ENTAILMENT_ORDER = (
    EntailmentClass.ENTAILMENT, EntailmentClass.CONTRADICTION, EntailmentClass.NEUTRAL,
)

FEATURE_NAMES: tuple[str, ...] = (
    tuple(f"child_{n}" for n in SYNTACTIC_NAMES)
    + tuple(f"parent_{n}" for n in SYNTACTIC_NAMES)
    + tuple(f"child_sent_{n}" for n in SENTIMENT_NAMES)
    + tuple(f"parent_sent_{n}" for n in SENTIMENT_NAMES)
    + tuple(f"entail_{c.value}" for c in ENTAILMENT_ORDER)
)
N_FEATURES = len(FEATURE_NAMES)
SYNTACTIC_SLOTS = np.arange(2 * len(SYNTACTIC_NAMES))


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch)[0] in "PS"


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, peel leading/trailing punctuation.

    Each peeled punctuation character becomes its own token; punctuation
    inside a word (``don't``) is kept.
    """
    tokens: list[str] = []
    for chunk in text.lower().split():
        start, end = 0, len(chunk)
        while start < end and _is_punct(chunk[start]):
            start += 1
        while end > start and _is_punct(chunk[end - 1]):
            end -= 1
        tokens.extend(chunk[:start])
        if start < end:
            tokens.append(chunk[start:end])
        tokens.extend(chunk[end:])
    return tokens


@dataclass(frozen=True)
class PosTagger:
    """Closed-class lexicon lookup followed by longest-suffix heuristics."""

    closed_class: dict[str, PosTag]
    suffixes: tuple[tuple[str, PosTag], ...]
    min_stem: int = 2

    @classmethod
    def from_file(cls, path: str | Path | None = None) -> "PosTagger":
        if path is None:
            raw = resources.files("argrel").joinpath("data/pos_rules.json").read_text("utf-8")
        else:
            raw = Path(path).read_text(encoding="utf-8")
        rules = json.loads(raw)
        closed = {
            word: PosTag(tag)
            for tag, words in rules["closed_class"].items()
            for word in words
        }
        suffixes = sorted(
            ((s, PosTag(tag)) for s, tag in rules["suffixes"]),
            key=lambda item: -len(item[0]),
        )
        return cls(closed, tuple(suffixes), int(rules.get("min_stem", 2)))

    def tag_word(self, word: str) -> PosTag:
        if word in self.closed_class:
            return self.closed_class[word]
        if all(_is_punct(ch) for ch in word):
            return PosTag.PUNCT
        for suffix, tag in self.suffixes:
            if word.endswith(suffix) and len(word) - len(suffix) >= self.min_stem:
                return tag
        return PosTag.OTHER

    def tag(self, tokens: Iterable[str]) -> list[Token]:
        return [Token(t, self.tag_word(t)) for t in tokens]


_default_tagger: PosTagger | None = None


def default_tagger() -> PosTagger:
    global _default_tagger
    if _default_tagger is None:
        _default_tagger = PosTagger.from_file()
    return _default_tagger


def tag_pos(tokens: Iterable[str], tagger: PosTagger | None = None) -> list[Token]:
    return (tagger or default_tagger()).tag(tokens)


def syntactic_features(tokens: Sequence[Token]) -> np.ndarray:
    """Word/POS counts plus lexical diversity. Punctuation is not counted as words."""
    words = [t for t in tokens if t.pos is not PosTag.PUNCT]
    n = len(words)
    tags = [t.pos for t in words]
    modifiers = tags.count(PosTag.ADVERB) + tags.count(PosTag.ADJECTIVE)
    diversity = len({t.surface for t in words}) / n if n else 0.0
    return np.array([
        n,
        tags.count(PosTag.NOUN),
        tags.count(PosTag.VERB),
        tags.count(PosTag.PRON_1SG),
        tags.count(PosTag.PRON_2),
        tags.count(PosTag.PRON_3SG),
        tags.count(PosTag.PRON_3PL),
        tags.count(PosTag.PRON_1PL),
        tags.count(PosTag.MODAL),
        modifiers,
        diversity,
    ], dtype=float)


@dataclass(frozen=True)
class SentimentLexicon:
    scores: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        for word, (pos, neg) in self.scores.items():
            if not (0.0 <= pos <= 1.0 and 0.0 <= neg <= 1.0):
                raise ValueError(f"sentiment scores for {word!r} outside [0, 1]")

    @classmethod
    def from_file(cls, path: str | Path) -> "SentimentLexicon":
        scores: dict[str, tuple[float, float]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(f"{path}:{lineno}: expected word<TAB>pos<TAB>neg")
                word = parts[0].strip().lower()
                pos, neg = float(parts[1]), float(parts[2])
                if not (0.0 <= pos <= 1.0 and 0.0 <= neg <= 1.0):
                    raise ValueError(f"{path}:{lineno}: scores outside [0, 1]")
                scores.setdefault(word, (pos, neg))
        return cls(scores)

    def lookup(self, word: str) -> tuple[float, float]:
        return self.scores.get(word.lower(), (0.0, 0.0))

    def polarity(self, word: str) -> int:
        """+1 positive, -1 negative, 0 neutral (pos == neg, including unknown words)."""
        pos, neg = self.lookup(word)
        return (pos > neg) - (neg > pos)


def _surfaces(tokens: Iterable[Token | str]) -> list[str]:
    return [t.surface if isinstance(t, Token) else t for t in tokens]


def sentiment_score(tokens: Iterable[Token | str], lexicon: SentimentLexicon) -> float:
    return float(sum(p - n for p, n in map(lexicon.lookup, _surfaces(tokens))))


def sentiment_features(tokens: Iterable[Token | str], lexicon: SentimentLexicon) -> np.ndarray:
    words = _surfaces(tokens)
    score = sentiment_score(words, lexicon)
    polarities = [lexicon.polarity(w) for w in words]
    n_pos, n_neg = polarities.count(1), polarities.count(-1)
    n_neutral = len(words) - n_pos - n_neg
    if score > 0:
        one_hot = (1.0, 0.0, 0.0)
    elif score < 0:
        one_hot = (0.0, 1.0, 0.0)
    else:
        one_hot = (0.0, 0.0, 1.0)
    return np.array(
        [score, n_pos, n_neg, n_neutral, *one_hot, score / max(1, len(words))],
        dtype=float,
    )


def entailment_one_hot(entailment: EntailmentClass | None) -> np.ndarray:
    cls = entailment or EntailmentClass.NEUTRAL
    return np.array([float(cls is c) for c in ENTAILMENT_ORDER])


def text_tokens(text: str, tagger: PosTagger | None = None) -> list[Token]:
    return tag_pos(tokenize(text), tagger)


def build_feature_vector(
    pair: ArgumentPair,
    lexicon: SentimentLexicon,
    tagger: PosTagger | None = None,
) -> np.ndarray:
    child = text_tokens(pair.child, tagger)
    parent = text_tokens(pair.parent, tagger)
    child_words = [t for t in child if t.pos is not PosTag.PUNCT]
    parent_words = [t for t in parent if t.pos is not PosTag.PUNCT]
    return np.concatenate([
        syntactic_features(child),
        syntactic_features(parent),
        sentiment_features(child_words, lexicon),
        sentiment_features(parent_words, lexicon),
        entailment_one_hot(pair.entailment),
    ])


def feature_matrix(
    pairs: Sequence[ArgumentPair],
    lexicon: SentimentLexicon,
    tagger: PosTagger | None = None,
) -> np.ndarray:
    if not pairs:
        return np.zeros((0, N_FEATURES))
    return np.stack([build_feature_vector(p, lexicon, tagger) for p in pairs])


@dataclass(frozen=True)
class Normalizer:
    """Per-slot min-max scaling fitted on training vectors; output clamped to [0, 1]."""

    mins: np.ndarray
    maxs: np.ndarray

    def __call__(self, vectors: np.ndarray) -> np.ndarray:
        return apply_normalizer(self, vectors)


def fit_normalizer(train_vectors) -> Normalizer:
    data = np.asarray(train_vectors, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("fit_normalizer needs a non-empty 2-D array of vectors")
    return Normalizer(data.min(axis=0), data.max(axis=0))


def apply_normalizer(normalizer: Normalizer, vectors) -> np.ndarray:
    v = np.asarray(vectors, dtype=float)
    span = normalizer.maxs - normalizer.mins
    constant = span == 0
    scaled = (v - normalizer.mins) / np.where(constant, 1.0, span)
    scaled = np.where(constant, 0.0, scaled)
    return np.clip(scaled, 0.0, 1.0)
