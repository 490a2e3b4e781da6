import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from argrel.corpus import Relation
from argrel.evaluation import (
    BenchmarkPlan,
    ClassCounts,
    ConfusionCounts,
    DatasetScores,
    aggregate,
    balance_training,
    confusion_counts,
    f1,
    render_csv,
    render_table,
    run_benchmark,
    score,
    training_sets,
    write_reports,
)
from argrel.synthetic import marker_corpus

A, S = Relation.ATTACK, Relation.SUPPORT


def test_f1_examples():
    counts = ConfusionCounts(ClassCounts(8, 2, 2), ClassCounts(0, 0, 0))
    assert f1(counts, A) == pytest.approx(0.8)
    assert f1(counts, S) is None
    perfect = score([A, S, S], [A, S, S])
    assert perfect == DatasetScores(1.0, 1.0)


def test_f1_no_predictions_is_zero():
    assert score([A, S], [S, S]).f1_attack == 0.0


def brute_force_f1(gold, pred, rel):
    tp = fp = fn = 0
    for g, p in zip(gold, pred):
        tp += g is rel and p is rel
        fp += g is not rel and p is rel
        fn += g is rel and p is not rel
    if tp + fn == 0:
        return None
    if tp == 0:
        return 0.0
    precision, recall = tp / (tp + fp), tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


labels = st.lists(st.sampled_from([A, S]), max_size=50)


@given(st.data())
def test_f1_matches_brute_force(data):
    gold = data.draw(labels)
    pred = data.draw(st.lists(st.sampled_from([A, S]), min_size=len(gold), max_size=len(gold)))
    s = score(gold, pred)
    assert s.f1_attack == brute_force_f1(gold, pred, A)
    assert s.f1_support == brute_force_f1(gold, pred, S)


def test_confusion_length_mismatch():
    with pytest.raises(ValueError):
        confusion_counts([A], [A, S])


TABLE3_ATTACK = dict(zip(["micro", "db", "ibm", "com", "ukp", "nk", "aif"], [0.36, 0.48, 0.43, 0.39, 0.52, 0.45, 0.51]))
TABLE3_SUPPORT = dict(zip(["micro", "db", "ibm", "com", "cdcp", "ukp", "nk", "aif"], [0.75, 0.66, 0.62, 0.68, 0.79, 0.52, 0.56, 0.54]))


def table3_rows():
    rows = {ds: DatasetScores(TABLE3_ATTACK.get(ds), v) for ds, v in TABLE3_SUPPORT.items()}
    rows["web"] = DatasetScores(0.9, 0.9)
    rows["essay"] = DatasetScores(0.9, 0.9)
    return rows


def test_aggregate_reproduces_published_row():
    report = aggregate(table3_rows(), ["web", "essay"])
    assert report.avg_attack == pytest.approx(0.449, abs=5e-4)
    assert report.avg_support == pytest.approx(0.640, abs=5e-4)
    assert report.macro_avg == (0.449 + 0.640) / 2


def test_aggregate_full_precision_option():
    report = aggregate(table3_rows(), ["web", "essay"], precision=None)
    assert report.avg_attack == pytest.approx(3.14 / 7)


def test_aggregate_single_dataset_and_errors():
    report = aggregate({"micro": DatasetScores(0.25, 0.75)}, precision=None)
    assert (report.avg_attack, report.avg_support, report.macro_avg) == (0.25, 0.75, 0.5)
    with pytest.raises(ValueError):
        aggregate({"web": DatasetScores(1.0, 1.0)}, ["web"])


def test_render_blanks_and_undefined():
    report = aggregate({"web": DatasetScores(1.0, 1.0), "cdcp": DatasetScores(None, 0.5),
                        "micro": DatasetScores(0.4, 0.6)}, ["web"], name="m")
    csv_lines = render_csv([report]).splitlines()
    header = csv_lines[0].split(",")
    attack = csv_lines[1].split(",")
    assert attack[header.index("web")] == ""
    assert attack[header.index("cdcp")] == "null"
    table = render_table([report])
    assert "-" in table.splitlines()[2]


def test_write_reports(tmp_path):
    report = aggregate({"micro": DatasetScores(0.4, None)}, name="x")
    paths = write_reports([report], tmp_path)
    assert [p.name for p in paths] == ["results.csv", "results.txt", "results.json"]
    data = json.loads(paths[2].read_text())
    assert data[0]["f1_support"]["micro"] is None and data[0]["macro_avg"] is None


def test_training_sets_exclude_ukp():
    sets = training_sets(["web", "essay", "ukp", "micro"], pair_with_others=True)
    assert ("essay",) in sets and ("web",) in sets
    assert all("ukp" not in s for s in sets)
    assert ("essay", "micro") in sets
    with pytest.raises(ValueError):
        BenchmarkPlan(["rf"], ["none"], ["all"], [("ukp",)]).cells()


def test_plan_dedupes_baselines():
    plan = BenchmarkPlan(["rf", "concat"], ["glove", "ft"], ["syntactic", "all"], [("web",)])
    names = [c.name for c in plan.cells()]
    assert names.count("rf/none/all/web") == 1
    assert len(names) == 1 + 4


def test_balance_training_only_targets():
    pairs = marker_corpus(60, seed=0, datasets=("essay", "web", "micro"))
    pairs = [p for i, p in enumerate(pairs) if not (p.label is A and i % 4 == 3)]
    out = balance_training(pairs, ["essay"], seed=0)
    essay = [p for p in out if p.dataset == "essay"]
    web = [p for p in out if p.dataset == "web"]
    before = [p for p in pairs if p.dataset == "essay"]
    assert sum(p.label is A for p in before) < sum(p.label is S for p in before)
    assert sum(p.label is A for p in essay) == sum(p.label is S for p in essay)
    assert web == [p for p in pairs if p.dataset == "web"]


class Majority:
    def fit(self, pairs):
        self.label = max((A, S), key=[p.label for p in pairs].count)

    def predict(self, pairs):
        return [self.label] * len(pairs)


class MajorityFactory:
    def __call__(self, cell):
        return Majority()


def test_run_benchmark_parallel_matches_serial():
    pairs = marker_corpus(60, seed=0, datasets=("essay", "web", "micro"))
    plan = BenchmarkPlan(["rf"], ["none"], ["all"], [("essay",), ("web",)])
    factory = lambda cell: Majority()
    serial = run_benchmark(plan, pairs, factory)
    assert [r.name for r in serial] == ["rf/none/all/essay", "rf/none/all/web"]
    assert set(serial[0].rows) == {"web", "micro"}
    parallel = run_benchmark(plan, pairs, MajorityFactory(), jobs=2)
    assert [(r.name, r.rows) for r in parallel] == [(r.name, r.rows) for r in serial]
