"""Per-class F1, cross-dataset averaging and the benchmark harness.

Averages follow the published tables: only test datasets count, an
undefined F1 (no gold instances of the class, e.g. attacks in cdcp) is
skipped, and the macro average is the mean of the two class averages.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import (
    LARGE_DATASETS,
    NEVER_TRAIN,
    REPORT_ORDER,
    ArgumentPair,
    Relation,
    oversample_minority,
    split_train_test,
)

log = logging.getLogger(__name__)

TABLE_PRECISION = 3
BASELINE_KINDS = ("rf", "svm")


@dataclass(frozen=True)
class ClassCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def gold(self) -> int:
        return self.tp + self.fn


@dataclass(frozen=True)
class ConfusionCounts:
    attack: ClassCounts
    support: ClassCounts

    def __getitem__(self, rel: Relation) -> ClassCounts:
        return self.attack if rel is Relation.ATTACK else self.support


def confusion_counts(gold: Sequence[Relation], pred: Sequence[Relation]) -> ConfusionCounts:
    if len(gold) != len(pred):
        raise ValueError("gold and prediction lists differ in length")
    per_class = {}
    for rel in Relation:
        tp = sum(1 for g, p in zip(gold, pred) if g is rel and p is rel)
        fp = sum(1 for g, p in zip(gold, pred) if g is not rel and p is rel)
        fn = sum(1 for g, p in zip(gold, pred) if g is rel and p is not rel)
        per_class[rel] = ClassCounts(tp, fp, fn)
    return ConfusionCounts(per_class[Relation.ATTACK], per_class[Relation.SUPPORT])


def f1(counts: ConfusionCounts, rel: Relation) -> float | None:
    """F1 for one class; ``None`` when the class has no gold instances."""
    c = counts[rel]
    if c.gold == 0:
        return None
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / c.gold
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class DatasetScores:
    f1_attack: float | None
    f1_support: float | None


def score(gold: Sequence[Relation], pred: Sequence[Relation]) -> DatasetScores:
    counts = confusion_counts(gold, pred)
    return DatasetScores(f1(counts, Relation.ATTACK), f1(counts, Relation.SUPPORT))


@dataclass(frozen=True)
class EvalReport:
    rows: dict[str, DatasetScores]
    train_datasets: frozenset[str]
    avg_attack: float | None
    avg_support: float | None
    macro_avg: float | None
    name: str = ""


def _mean(values: Iterable[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    return sum(defined) / len(defined) if defined else None


def aggregate(
    rows: Mapping[str, DatasetScores],
    train_datasets: Iterable[str] = (),
    precision: int | None = TABLE_PRECISION,
    name: str = "",
) -> EvalReport:
    """Average per-dataset F1 over test datasets.

    Class averages are rounded to ``precision`` decimals as printed in the
    result tables (``None`` keeps full precision); the macro average is the
    mean of the two class averages as reported.
    """
    train = frozenset(train_datasets)
    test_rows = {ds: s for ds, s in rows.items() if ds not in train}
    if not test_rows:
        raise ValueError("no test datasets to aggregate")
    avg_a = _mean(s.f1_attack for s in test_rows.values())
    avg_s = _mean(s.f1_support for s in test_rows.values())
    if precision is not None:
        avg_a = None if avg_a is None else round(avg_a, precision)
        avg_s = None if avg_s is None else round(avg_s, precision)
    macro = None if avg_a is None or avg_s is None else (avg_a + avg_s) / 2
    return EvalReport(dict(rows), train, avg_a, avg_s, macro, name)


# -- report rendering -----------------------------------------------------------

def _fmt(value: float | None, digits: int = 2) -> str:
    return "-" if value is None else f"{value:.{digits}f}"


def report_records(reports: Sequence[EvalReport], datasets: Sequence[str] = REPORT_ORDER) -> list[dict]:
    records = []
    for r in reports:
        rec = {
            "name": r.name,
            "train": sorted(r.train_datasets),
            "f1_attack": {},
            "f1_support": {},
            "avg_attack": r.avg_attack,
            "avg_support": r.avg_support,
            "macro_avg": r.macro_avg,
        }
        for ds in datasets:
            if ds in r.train_datasets or ds not in r.rows:
                continue
            rec["f1_attack"][ds] = r.rows[ds].f1_attack
            rec["f1_support"][ds] = r.rows[ds].f1_support
        records.append(rec)
    return records


def render_csv(reports: Sequence[EvalReport], datasets: Sequence[str] = REPORT_ORDER) -> str:
    """Two lines per report (F1 A, F1 S). Training datasets are blank, undefined cells are ``null``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", "train", "metric", *datasets, "avg", "macro_avg"])
    for r in reports:
        for metric, attr, avg in (("F1 A", "f1_attack", r.avg_attack), ("F1 S", "f1_support", r.avg_support)):
            cells = []
            for ds in datasets:
                if ds in r.train_datasets or ds not in r.rows:
                    cells.append("")
                else:
                    v = getattr(r.rows[ds], attr)
                    cells.append("null" if v is None else f"{v:.6f}")
            macro = "" if metric == "F1 S" else ("null" if r.macro_avg is None else f"{r.macro_avg:.6f}")
            writer.writerow([r.name, "+".join(sorted(r.train_datasets)), metric, *cells,
                             "null" if avg is None else f"{avg:.6f}", macro])
    return buf.getvalue()


def render_table(reports: Sequence[EvalReport], datasets: Sequence[str] = REPORT_ORDER) -> str:
    """Fixed-width text table in the layout of the published result tables."""
    name_w = max([len("model")] + [len(r.name) for r in reports])
    header = f"{'model':<{name_w}}  {'':<6}" + "".join(f"{ds:>7}" for ds in datasets) + f"{'Avg':>8}{'Mcr Avg':>9}"
    lines = [header, "-" * len(header)]
    for r in reports:
        for metric, attr, avg in (("F1 A", "f1_attack", r.avg_attack), ("F1 S", "f1_support", r.avg_support)):
            cells = []
            for ds in datasets:
                if ds in r.train_datasets or ds not in r.rows:
                    cells.append(f"{'':>7}")
                else:
                    cells.append(f"{_fmt(getattr(r.rows[ds], attr)):>7}")
            macro = _fmt(r.macro_avg, 4) if metric == "F1 A" else ""
            name = r.name if metric == "F1 A" else ""
            lines.append(f"{name:<{name_w}}  {metric:<6}" + "".join(cells) + f"{_fmt(avg, 3):>8}{macro:>9}")
    return "\n".join(lines) + "\n"


def write_reports(reports: Sequence[EvalReport], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "results.csv", out / "results.txt", out / "results.json"]
    paths[0].write_text(render_csv(reports), encoding="utf-8")
    paths[1].write_text(render_table(reports), encoding="utf-8")
    paths[2].write_text(json.dumps(report_records(reports), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return paths


# -- benchmark -------------------------------------------------------------------

@dataclass(frozen=True)
class BenchmarkCell:
    architecture: str
    embedding: str
    feature_set: str
    train_datasets: tuple[str, ...]

    @property
    def name(self) -> str:
        return f"{self.architecture}/{self.embedding}/{self.feature_set}/{'+'.join(self.train_datasets)}"


def training_sets(
    available: Iterable[str],
    primary: Iterable[str] = LARGE_DATASETS,
    pair_with_others: bool = False,
) -> list[tuple[str, ...]]:
    """Single large datasets, optionally each paired with one other dataset.

    ukp is never a training dataset.
    """
    present = [ds for ds in REPORT_ORDER if ds in set(available) and ds not in NEVER_TRAIN]
    sets: list[tuple[str, ...]] = []
    for big in (ds for ds in REPORT_ORDER if ds in set(primary) and ds in present):
        sets.append((big,))
    if pair_with_others:
        for big in (ds for ds in REPORT_ORDER if ds in set(primary) and ds in present):
            for other in present:
                if other != big:
                    combo = tuple(ds for ds in REPORT_ORDER if ds in (big, other))
                    if combo not in sets:
                        sets.append(combo)
    return sets


@dataclass
class BenchmarkPlan:
    architectures: Sequence[str]
    embeddings: Sequence[str]
    feature_sets: Sequence[str]
    train_sets: Sequence[tuple[str, ...]]
    oversample: frozenset[str] = field(default_factory=lambda: frozenset({"essay"}))

    def cells(self) -> list[BenchmarkCell]:
        for ts in self.train_sets:
            bad = NEVER_TRAIN.intersection(ts)
            if bad:
                raise ValueError(f"dataset(s) {', '.join(sorted(bad))} cannot be used for training")
        cells = []
        for a, e, f, t in itertools.product(
                self.architectures, self.embeddings, self.feature_sets, self.train_sets):
            if a in BASELINE_KINDS:
                # baselines read no embeddings and always use every feature
                e, f = "none", "all"
            cell = BenchmarkCell(a, e, f, tuple(t))
            if cell not in cells:
                cells.append(cell)
        return cells


def balance_training(train: list[ArgumentPair], oversample: Iterable[str], seed: int) -> list[ArgumentPair]:
    """Oversample the minority class within each listed training dataset."""
    targets = set(oversample)
    out: list[ArgumentPair] = []
    for ds in REPORT_ORDER:
        part = [p for p in train if p.dataset == ds]
        if not part:
            continue
        if ds in targets and len({p.label for p in part}) == 2:
            part = oversample_minority(part, seed)
        out.extend(part)
    return out


def run_cell(cell: BenchmarkCell, pairs: Sequence[ArgumentPair], factory, oversample=frozenset({"essay"}),
             seed: int = 42) -> EvalReport:
    train, tests = split_train_test(list(pairs), cell.train_datasets)
    train = balance_training(train, oversample, seed)
    clf = factory(cell)
    clf.fit(train)
    rows = {}
    for ds, test in tests.items():
        rows[ds] = score([p.label for p in test], clf.predict(test))
    log.info("cell %s done", cell.name)
    return aggregate(rows, cell.train_datasets, name=cell.name)


def _run_cell_star(args):
    return run_cell(*args)


def run_benchmark(
    plan: BenchmarkPlan,
    pairs: Sequence[ArgumentPair],
    factory,
    seed: int = 42,
    jobs: int = 1,
) -> list[EvalReport]:
    """Train once per cell, evaluate on every non-training dataset, aggregate.

    ``factory(cell)`` returns an unfitted classifier with ``fit``/``predict``.
    Reports come back in plan order whatever ``jobs`` is.
    """
    cells = plan.cells()
    args = [(cell, pairs, factory, plan.oversample, seed) for cell in cells]
    if jobs <= 1 or len(cells) <= 1:
        return [_run_cell_star(a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_cell_star, args))
