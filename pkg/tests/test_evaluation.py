import json

import pytest

from planegeo.evaluation import (BadRatios, DuplicateId, EmptyRecords,
                                 ExperimentConfig, MissingAnnotation,
                                 difficulty_level, derive_seed, emit_report,
                                 load_corpus, records_from_csv, records_to_csv,
                                 run_experiment, split_corpus)
from planegeo.problems import parse_problem
from planegeo.search import SearchLimits
from tests.conftest import CORPUS_PATH, KB_PATH


def test_load_corpus_rejects_duplicate_ids(kb):
    with open(CORPUS_PATH) as fh:
        docs = json.load(fh)
    docs.append(dict(docs[0]))
    with pytest.raises(DuplicateId):
        load_corpus(docs, kb)


def test_split_is_seeded_and_sized(problems):
    train, valid, test = split_corpus(problems, seed=0)
    assert (len(train), len(valid), len(test)) == (14, 3, 3)
    ids = lambda ps: [p.id for p in ps]
    again = split_corpus(problems, seed=0)
    assert tuple(map(ids, again)) == (ids(train), ids(valid), ids(test))
    other = split_corpus(problems, seed=1)
    assert ids(other[0]) != ids(train)
    # a partition: nothing lost, nothing duplicated
    assert sorted(ids(train) + ids(valid) + ids(test)) == sorted(ids(problems))


def test_bad_ratios_rejected(problems):
    with pytest.raises(BadRatios):
        split_corpus(problems, ratios=(0.5, 0.2, 0.2))
    with pytest.raises(BadRatios):
        split_corpus(problems, ratios=(1.2, -0.1, -0.1))


def test_difficulty_levels(kb, problems):
    levels = [difficulty_level(p) for p in problems]
    assert levels.count("l1") == 12 and levels.count("l2") == 4
    assert levels.count("l3") == 2 and levels.count("l4") == 2
    bare = parse_problem({
        "problem_id": 1, "description": "", "construction_cdl": [],
        "text_cdl": [], "goal_cdl": "Value(LengthOfLine(AB))",
        "theorem_seqs": [],
    }, kb)
    with pytest.raises(MissingAnnotation):
        difficulty_level(bare)


def test_derived_seeds_differ_by_cell():
    cells = [("fw", "bfs", "plain"), ("fw", "bfs", "tp"), ("bw", "dfs", "plain")]
    seeds = {derive_seed(0, 7, c) for c in cells}
    assert len(seeds) == len(cells)
    assert derive_seed(0, 7, cells[0]) == derive_seed(0, 7, cells[0])
    assert derive_seed(1, 7, cells[0]) != derive_seed(0, 7, cells[0])


def small_config(**kw):
    base = dict(cells=(("fw", "bfs", "plain"), ("fw", "bfs", "tp")),
                limits=SearchLimits(timeout=600.0),
                predictor_spec=("oracle",), master_seed=0, jobs=1)
    base.update(kw)
    return ExperimentConfig(**base)


def load_docs(n=6):
    with open(CORPUS_PATH) as fh:
        return json.load(fh)[:n]


def test_records_sorted_and_complete():
    docs = load_docs()
    records = run_experiment(KB_PATH, docs, small_config())
    assert len(records) == len(docs) * 2
    keys = [(r["problem_id"], r["method"], r["strategy"], r["mode"])
            for r in records]
    assert keys == sorted(keys)


def test_parallel_run_is_byte_identical():
    docs = load_docs()
    serial = run_experiment(KB_PATH, docs, small_config(jobs=1))
    parallel = run_experiment(KB_PATH, docs, small_config(jobs=4))
    assert records_to_csv(serial) == records_to_csv(parallel)


def test_csv_round_trip():
    docs = load_docs(3)
    records = run_experiment(KB_PATH, docs, small_config())
    text = records_to_csv(records)
    back = records_from_csv(text)
    assert records_to_csv(back) == text


def test_report_is_deterministic_and_has_all_tables():
    docs = load_docs()
    records = run_experiment(KB_PATH, docs, small_config())
    report = emit_report(records)
    assert report == emit_report(list(records))
    for title in ("Outcome rates (%)", "Mean cost per run", "Solved (%) by mode",
                  "Solved (%) by difficulty", "Predictor coverage (%)"):
        assert title in report, title


def test_report_rejects_empty_records():
    with pytest.raises(EmptyRecords):
        emit_report([])
