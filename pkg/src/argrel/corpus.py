"""Argument pairs, dataset registry, harmonization rules and splits.

Corpus files are line-delimited JSON records::

    {"id": "essay-0001", "dataset": "essay", "child": "...", "parent": "...",
     "label": "attack", "entailment": "neutral"}

``entailment`` is optional. Raw source corpora are converted into this form
offline; the rules the converters need (AIF node mapping, the UKP topic
template) live here as pure functions.
"""
from __future__ import annotations

import enum
import json
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable


class CorpusError(ValueError):
    """Raised for malformed or inconsistent corpus input."""


class Relation(enum.Enum):
    ATTACK = "attack"
    SUPPORT = "support"

    @classmethod
    def parse(cls, value: str) -> "Relation":
        try:
            return cls(value.strip().lower())
        except (ValueError, AttributeError):
            raise CorpusError(f"unknown label {value!r}") from None


class EntailmentClass(enum.Enum):
    ENTAILMENT = "entailment"
    CONTRADICTION = "contradiction"
    NEUTRAL = "neutral"

    @classmethod
    def parse(cls, value: str) -> "EntailmentClass":
        try:
            return cls(value.strip().lower())
        except (ValueError, AttributeError):
            raise CorpusError(f"unknown entailment class {value!r}") from None


# Canonical dataset order; stats follow it.
DATASETS: tuple[str, ...] = (
    "essay", "micro", "nk", "db", "ibm", "com", "web", "cdcp", "ukp", "aif",
)

# Column order used by the published result tables.
REPORT_ORDER: tuple[str, ...] = (
    "essay", "micro", "db", "ibm", "com", "web", "cdcp", "ukp", "nk", "aif",
)

# Published class counts per dataset (attacks, supports).
PUBLISHED_STATS: dict[str, tuple[int, int]] = {
    "essay": (497, 4841),
    "micro": (108, 263),
    "nk": (378, 353),
    "db": (141, 179),
    "ibm": (1069, 1325),
    "com": (296, 462),
    "web": (1301, 1329),
    "cdcp": (0, 1220),
    "ukp": (5935, 4759),
    "aif": (9854, 7543),
}

# Datasets large enough to train on; ukp is excluded because its parent is a topic.
LARGE_DATASETS: tuple[str, ...] = ("aif", "essay", "ibm", "web")
NEVER_TRAIN: frozenset[str] = frozenset({"ukp"})


def check_dataset(dataset: str) -> str:
    if dataset not in DATASETS:
        raise CorpusError(f"unknown dataset id {dataset!r}")
    return dataset


@dataclass(frozen=True)
class ArgumentPair:
    id: str
    dataset: str
    child: str
    parent: str
    label: Relation
    entailment: EntailmentClass | None = None

    def __post_init__(self):
        check_dataset(self.dataset)
        if not isinstance(self.label, Relation):
            raise CorpusError(f"unknown label {self.label!r}")
        if not self.child.strip():
            raise CorpusError(f"pair {self.id!r}: empty child text")
        if not self.parent.strip():
            raise CorpusError(f"pair {self.id!r}: empty parent text")

    def to_record(self) -> dict:
        record = {
            "id": self.id,
            "dataset": self.dataset,
            "child": self.child,
            "parent": self.parent,
            "label": self.label.value,
        }
        if self.entailment is not None:
            record["entailment"] = self.entailment.value
        return record


@dataclass(frozen=True)
class DatasetStats:
    dataset: str
    attacks: int
    supports: int

    @property
    def total(self) -> int:
        return self.attacks + self.supports


def pair_from_record(record: dict, default_id: str = "") -> ArgumentPair:
    if not isinstance(record, dict):
        raise CorpusError("record is not a key-value object")
    missing = [k for k in ("dataset", "child", "parent", "label") if k not in record]
    if missing:
        raise CorpusError(f"missing keys: {', '.join(missing)}")
    entailment = record.get("entailment")
    return ArgumentPair(
        id=str(record.get("id", default_id)),
        dataset=check_dataset(str(record["dataset"])),
        child=str(record["child"]),
        parent=str(record["parent"]),
        label=Relation.parse(record["label"]),
        entailment=None if entailment is None else EntailmentClass.parse(entailment),
    )


def load_corpus(path: str | Path) -> list[ArgumentPair]:
    """Read a line-delimited corpus file, validating every record.

    Blank lines are skipped. Errors carry the 1-based line number.
    """
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: malformed record ({exc.msg})") from None
            try:
                pairs.append(pair_from_record(record, default_id=f"line-{lineno}"))
            except CorpusError as exc:
                raise CorpusError(f"line {lineno}: {exc}") from None
    return pairs


def save_corpus(pairs: Iterable[ArgumentPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_record(), ensure_ascii=False) + "\n")


def compute_stats(pairs: Iterable[ArgumentPair]) -> list[DatasetStats]:
    counts: dict[str, Counter] = {}
    for pair in pairs:
        counts.setdefault(pair.dataset, Counter())[pair.label] += 1
    return [
        DatasetStats(ds, counts[ds][Relation.ATTACK], counts[ds][Relation.SUPPORT])
        for ds in DATASETS
        if ds in counts
    ]


def map_aif_relation(node_kind: str) -> Relation:
    """Map an AIF scheme-node kind to a relation (CA attacks, RA/TA support)."""
    mapping = {"CA": Relation.ATTACK, "RA": Relation.SUPPORT, "TA": Relation.SUPPORT}
    try:
        return mapping[node_kind]
    except KeyError:
        raise CorpusError(f"AIF node kind {node_kind!r} is not a relation") from None


def apply_ukp_template(topic: str) -> str:
    """Turn a UKP topic into a parent argument: ``"<topic> is good"``."""
    if not topic.strip():
        raise CorpusError("empty topic")
    return f"{topic.strip()} is good"


def oversample_minority(pairs: list[ArgumentPair], seed: int) -> list[ArgumentPair]:
    """Balance classes by drawing minority pairs with replacement.

    All original pairs are kept in their original order; the drawn
    duplicates are appended after them.
    """
    by_label = {rel: [p for p in pairs if p.label is rel] for rel in Relation}
    if any(not group for group in by_label.values()):
        raise CorpusError("cannot oversample single-class corpus")
    n_attack = len(by_label[Relation.ATTACK])
    n_support = len(by_label[Relation.SUPPORT])
    if n_attack == n_support:
        return list(pairs)
    minority = by_label[Relation.ATTACK] if n_attack < n_support else by_label[Relation.SUPPORT]
    rng = random.Random(seed)
    extra = rng.choices(minority, k=abs(n_attack - n_support))
    return list(pairs) + extra


def split_train_test(
    pairs: list[ArgumentPair], train_datasets: Iterable[str]
) -> tuple[list[ArgumentPair], dict[str, list[ArgumentPair]]]:
    """Train on the union of ``train_datasets``; test on each remaining dataset."""
    train_ids = {check_dataset(d) for d in train_datasets}
    if not train_ids:
        raise CorpusError("no training datasets given")
    present = {p.dataset for p in pairs}
    absent = sorted(train_ids - present)
    if absent:
        raise CorpusError(f"training datasets not in corpus: {', '.join(absent)}")
    if present <= train_ids:
        raise CorpusError("no test datasets remain")
    train = [p for p in pairs if p.dataset in train_ids]
    tests = {
        ds: [p for p in pairs if p.dataset == ds]
        for ds in DATASETS
        if ds in present and ds not in train_ids
    }
    return train, tests
