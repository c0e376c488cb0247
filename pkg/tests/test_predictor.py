import itertools
from fractions import Fraction

import pytest

from planegeo.evaluation import split_corpus
from planegeo.predictor import (EOS, START, EmptyAnnotation, EmptyTrainingSet,
                                FrequencyPredictor, ListPredictor,
                                ModelPredictor, OraclePredictor, SeqModel,
                                beam_decode, evaluate_predictor, goal_bucket,
                                matching_degree, mean_nll, train_predictor,
                                union_sequences)


def test_matching_degree_is_positional():
    assert matching_degree([1, 2, 3, 4, 5], [2, 4, 9]) == Fraction(2, 5)
    assert matching_degree([1, 1, 2], [1]) == Fraction(2, 3)
    with pytest.raises(EmptyAnnotation):
        matching_degree([], [1])


def test_union_keeps_first_occurrence_rank_order():
    assert union_sequences([(3, 1), (1, 2), (3, 4)]) == (3, 1, 2, 4)
    assert union_sequences([]) == ()


def test_oracle_predictor_covers_annotation(kb, problems):
    score = evaluate_predictor(OraclePredictor(), problems)
    assert score.average == 1 and score.complete == 1


def test_frequency_predictor_is_constant(kb, problems):
    train, _, _ = split_corpus(problems, seed=0)
    pred = FrequencyPredictor(train)
    outs = {pred.predict(p) for p in problems}
    assert len(outs) == 1
    with pytest.raises(EmptyTrainingSet):
        FrequencyPredictor([])


def test_trained_model_beats_frequency_baseline(kb, problems):
    train, valid, _ = split_corpus(problems, seed=0)
    model, _ = train_predictor(train, valid, kb)
    trained = evaluate_predictor(ModelPredictor(model), problems)
    baseline = evaluate_predictor(FrequencyPredictor(train), problems)
    assert trained.average > baseline.average


def test_lambda_chosen_from_grid_minimizes_validation_nll(kb, problems):
    train, valid, _ = split_corpus(problems, seed=0)
    model, report = train_predictor(train, valid, kb)
    for i in range(1, 10):
        model.lam = Fraction(i, 10)
        assert mean_nll(model, valid) >= report.valid_nll - 1e-12
    model.lam = report.lam


def test_probabilities_are_exact_and_normalized(kb, problems):
    train, valid, _ = split_corpus(problems, seed=0)
    model, _ = train_predictor(train, valid, kb)
    bucket = goal_bucket(problems[0])
    for prev in (START, 1, 5, EOS):
        total = sum(model.prob(c, prev, bucket) for c in model.vocab)
        assert isinstance(total, Fraction) and total == 1


def test_model_persistence_round_trip(tmp_path, kb, problems):
    train, valid, _ = split_corpus(problems, seed=0)
    model, _ = train_predictor(train, valid, kb)
    path = str(tmp_path / "model.json")
    model.save(path)
    loaded = SeqModel.load(path)
    assert loaded == model
    assert mean_nll(loaded, problems) == mean_nll(model, problems)


def test_persistence_rejects_unknown_format(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"format_version": 99}')
    with pytest.raises(ValueError):
        SeqModel.load(str(path))


def enumerate_sequences(model, bucket, k, max_len):
    """Oracle: score every sequence up to max_len exhaustively."""
    scored = []
    for n in range(0, max_len + 1):
        for seq in itertools.product(model.vocab[:-1], repeat=n):
            prob = Fraction(1)
            prev = START
            for code in seq + (EOS,):
                prob *= model.prob(code, prev, bucket)
                prev = code
            scored.append((prob, seq))
    scored.sort(key=lambda t: (-t[0], t[1]))
    return [seq for _, seq in scored[:k]]


def test_beam_decode_matches_exhaustive_enumeration():
    # tiny vocabulary so enumeration stays tractable
    model = SeqModel(n_theorems=3)
    model.observe("Value:X", (1, 2))
    model.observe("Value:X", (1, 2, 3))
    model.observe("Value:X", (2,))
    model.observe("Value:Y", (3, 3))
    for bucket in ("Value:X", "Value:Y", "Value:unseen"):
        got = beam_decode(model, bucket, k=5, max_len=4)
        want = enumerate_sequences(model, bucket, k=5, max_len=4)
        assert got == want, bucket


def test_empty_training_set_raises(kb):
    with pytest.raises(EmptyTrainingSet):
        train_predictor([], [], kb)


def test_list_predictor_is_a_stub(kb, problems):
    pred = ListPredictor((4, 2))
    assert pred.predict(problems[0]) == (4, 2)
