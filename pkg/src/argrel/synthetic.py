"""Seeded toy corpora where one marker word in the child decides the relation.

Used by the test suite and the README walkthrough::

    python -m argrel.synthetic demo/
"""
from __future__ import annotations

import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import ArgumentPair, Relation, save_corpus
from .embeddings import VectorTable
from .features import SentimentLexicon

SUPPORT_MARKER = "agree"
ATTACK_MARKER = "disagree"
FILLER = (
    "people video game violence youth players policy school city tax energy health "
    "students parents government market science history music water cars phones "
    "media law rights family budget research nature sport travel food art"
).split()


def marker_corpus(n: int, seed: int, datasets: Sequence[str] = ("web",),
                  min_words: int = 4, max_words: int = 8) -> list[ArgumentPair]:
    """``n`` pairs with alternating labels; datasets take consecutive label pairs round-robin."""
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(n):
        label = Relation.SUPPORT if i % 2 == 0 else Relation.ATTACK
        marker = SUPPORT_MARKER if label is Relation.SUPPORT else ATTACK_MARKER
        child = list(rng.choice(FILLER, size=rng.integers(min_words, max_words + 1)))
        child.insert(int(rng.integers(0, len(child) + 1)), marker)
        parent = rng.choice(FILLER, size=rng.integers(min_words, max_words + 1))
        pairs.append(ArgumentPair(
            id=f"syn-{seed}-{i:04d}",
            dataset=datasets[(i // 2) % len(datasets)],
            child=" ".join(child) + ".",
            parent=" ".join(parent) + ".",
            label=label,
        ))
    return pairs


def marker_vectors(dim: int = 8, seed: int = 0, filler_scale: float = 0.1) -> VectorTable:
    """Filler words live in the first ``dim - 2`` axes, each marker on its own last axis."""
    if dim < 3:
        raise ValueError("marker vectors need at least 3 dimensions")
    rng = np.random.default_rng(seed)
    vectors = {}
    for w in FILLER:
        v = np.zeros(dim)
        v[:-2] = rng.normal(scale=filler_scale, size=dim - 2)
        vectors[w] = v
    vectors[SUPPORT_MARKER] = np.eye(dim)[-2]
    vectors[ATTACK_MARKER] = np.eye(dim)[-1]
    return VectorTable(dim, vectors)


def marker_lexicon() -> SentimentLexicon:
    return SentimentLexicon({SUPPORT_MARKER: (0.75, 0.0), ATTACK_MARKER: (0.0, 0.75)})


def write_demo(out_dir: str | Path, n: int = 240, dim: int = 8, seed: int = 0) -> dict[str, Path]:
    """Write corpus.jsonl, vectors.txt and lexicon.tsv for a small multi-dataset demo."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"corpus": out / "corpus.jsonl", "vectors": out / "vectors.txt", "lexicon": out / "lexicon.tsv"}
    pairs = marker_corpus(n, seed, datasets=("essay", "micro", "web", "cdcp"))
    # cdcp carries supports only
    pairs = [p for p in pairs if not (p.dataset == "cdcp" and p.label is Relation.ATTACK)]
    save_corpus(pairs, paths["corpus"])
    table = marker_vectors(dim, seed)
    with open(paths["vectors"], "w", encoding="utf-8") as fh:
        for word, vec in table.vectors.items():
            fh.write(word + " " + " ".join(f"{v:.6f}" for v in vec) + "\n")
    with open(paths["lexicon"], "w", encoding="utf-8") as fh:
        for word, (pos, neg) in marker_lexicon().scores.items():
            fh.write(f"{word}\t{pos}\t{neg}\n")
    return paths


if __name__ == "__main__":
    for name, path in write_demo(sys.argv[1] if len(sys.argv) > 1 else "demo").items():
        print(f"{name}: {path}")
