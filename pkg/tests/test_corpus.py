import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from argrel.corpus import (
    DATASETS,
    ArgumentPair,
    CorpusError,
    Relation,
    apply_ukp_template,
    compute_stats,
    load_corpus,
    map_aif_relation,
    oversample_minority,
    split_train_test,
)

from .conftest import write_records


def make_pairs(counts, seed=0):
    """counts: {dataset: (attacks, supports)}"""
    pairs = []
    for ds, (a, s) in counts.items():
        for i in range(a):
            pairs.append(ArgumentPair(f"{ds}-a{i}", ds, f"child {i}", "parent", Relation.ATTACK))
        for i in range(s):
            pairs.append(ArgumentPair(f"{ds}-s{i}", ds, f"child {i}", "parent", Relation.SUPPORT))
    random.Random(seed).shuffle(pairs)
    return pairs


def test_load_single_record(tmp_path):
    path = write_records(tmp_path / "c.jsonl", [
        {"id": "x", "child": "a", "parent": "b", "label": "support", "dataset": "db"}])
    pairs = load_corpus(path)
    assert len(pairs) == 1
    assert pairs[0].label is Relation.SUPPORT
    assert pairs[0].entailment is None


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert load_corpus(path) == []


def test_unknown_label_rejected(tmp_path):
    path = write_records(tmp_path / "c.jsonl", [
        {"child": "a", "parent": "b", "label": "undercut", "dataset": "db"}])
    with pytest.raises(CorpusError, match="unknown label"):
        load_corpus(path)


def test_unknown_dataset_rejected(tmp_path):
    path = write_records(tmp_path / "c.jsonl", [
        {"child": "a", "parent": "b", "label": "attack", "dataset": "reddit"}])
    with pytest.raises(CorpusError, match="reddit"):
        load_corpus(path)


def test_malformed_line_names_line_number(tmp_path):
    path = write_records(tmp_path / "c.jsonl", [
        {"child": "a", "parent": "b", "label": "attack", "dataset": "db"}, "{not json"])
    with pytest.raises(CorpusError, match="line 2"):
        load_corpus(path)


def test_blank_child_rejected():
    with pytest.raises(CorpusError, match="empty child"):
        ArgumentPair("x", "db", "   ", "parent", Relation.ATTACK)


def test_entailment_parsed(tmp_path):
    path = write_records(tmp_path / "c.jsonl", [
        {"child": "a", "parent": "b", "label": "attack", "dataset": "db", "entailment": "contradiction"}])
    assert load_corpus(path)[0].entailment.value == "contradiction"


def test_stats_essay_and_cdcp():
    stats = compute_stats(make_pairs({"essay": (497, 4841), "cdcp": (0, 1220)}))
    by_ds = {s.dataset: (s.attacks, s.supports) for s in stats}
    assert by_ds == {"essay": (497, 4841), "cdcp": (0, 1220)}
    # table order, not input order
    assert [s.dataset for s in stats] == ["essay", "cdcp"]


def test_stats_empty():
    assert compute_stats([]) == []


@given(st.lists(st.tuples(st.sampled_from(DATASETS), st.sampled_from(list(Relation))), max_size=60))
def test_stats_partition(items):
    pairs = [ArgumentPair(str(i), ds, "c", "p", rel) for i, (ds, rel) in enumerate(items)]
    assert sum(s.total for s in compute_stats(pairs)) == len(pairs)


@pytest.mark.parametrize("kind,expected", [
    ("CA", Relation.ATTACK), ("RA", Relation.SUPPORT), ("TA", Relation.SUPPORT)])
def test_aif_mapping(kind, expected):
    assert map_aif_relation(kind) is expected


@pytest.mark.parametrize("kind", ["YA", "MA", "ca", ""])
def test_aif_mapping_rejects_other_nodes(kind):
    with pytest.raises(CorpusError):
        map_aif_relation(kind)


def test_ukp_template():
    assert apply_ukp_template("marijuana legalization") == "marijuana legalization is good"
    assert apply_ukp_template("gun control") == "gun control is good"
    with pytest.raises(CorpusError):
        apply_ukp_template("")


def test_oversample_balances_essay_proportions():
    pairs = make_pairs({"essay": (497, 4841)})
    out = oversample_minority(pairs, seed=3)
    stats = compute_stats(out)[0]
    assert (stats.attacks, stats.supports) == (4841, 4841)
    assert out[:len(pairs)] == pairs


def test_oversample_balanced_is_fixed_point():
    pairs = make_pairs({"db": (10, 10)})
    assert oversample_minority(pairs, seed=0) == pairs


def test_oversample_deterministic():
    pairs = make_pairs({"micro": (7, 30)})
    assert oversample_minority(pairs, 5) == oversample_minority(pairs, 5)
    assert oversample_minority(pairs, 5) != oversample_minority(pairs, 6)


def test_oversample_single_class_error():
    with pytest.raises(CorpusError, match="single-class"):
        oversample_minority(make_pairs({"cdcp": (0, 5)}), 0)


@settings(max_examples=50)
@given(st.integers(1, 40), st.integers(1, 40), st.integers(0, 10**6))
def test_oversample_properties(a, s, seed):
    pairs = make_pairs({"web": (a, s)})
    out = oversample_minority(pairs, seed)
    st_ = compute_stats(out)[0]
    assert st_.attacks == st_.supports == max(a, s)
    assert set(pairs) <= set(out)


ALL_TEN = {ds: (2, 3) for ds in DATASETS}


def test_split_web_essay():
    pairs = make_pairs(ALL_TEN)
    train, tests = split_train_test(pairs, {"web", "essay"})
    assert len(tests) == 8
    assert {p.dataset for p in train} == {"web", "essay"}


def test_split_single():
    _, tests = split_train_test(make_pairs(ALL_TEN), {"aif"})
    assert len(tests) == 9 and "aif" not in tests


def test_split_all_is_error():
    with pytest.raises(CorpusError, match="no test datasets remain"):
        split_train_test(make_pairs(ALL_TEN), set(DATASETS))


def test_split_missing_train_dataset():
    with pytest.raises(CorpusError):
        split_train_test(make_pairs({"web": (1, 1), "db": (1, 1)}), {"aif"})


@given(st.sets(st.sampled_from(DATASETS), min_size=1, max_size=9))
def test_split_partitions_input(train_ids):
    pairs = make_pairs(ALL_TEN)
    train, tests = split_train_test(pairs, train_ids)
    joined = train + [p for t in tests.values() for p in t]
    assert sorted(p.id for p in joined) == sorted(p.id for p in pairs)
