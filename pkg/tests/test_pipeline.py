import pytest

from planegeo.conditions import ConditionSet
from planegeo.pipeline import (PipelineConfig, execute_sequence, solve_hybrid,
                               solve_plain, solve_tp)
from planegeo.predictor import ListPredictor, OraclePredictor
from planegeo.search import Clock, SearchLimits
from tests.conftest import FLOOD_CODES, make_adversarial


def cfg(timeout=1e9, **kw):
    return PipelineConfig(limits=SearchLimits(timeout=timeout), **kw)


def test_execute_sequence_reaches_goal(kb, problems):
    for p in problems:
        cs = ConditionSet.from_problem(p, kb)
        execute_sequence(cs, kb, p.annotated_sequences[0], passes=3)
        result = cs.check_goal(p.goal_cdl)
        assert result.solved, p.id
        if p.goal_kind == "value":
            assert result.answer == p.answer


def test_execute_sequence_extra_passes_change_nothing(kb, problems):
    for p in problems[:8]:
        one = ConditionSet.from_problem(p, kb)
        execute_sequence(one, kb, p.annotated_sequences[0], passes=3)
        ten = ConditionSet.from_problem(p, kb)
        execute_sequence(ten, kb, p.annotated_sequences[0], passes=10)
        assert one.signature() == ten.signature()


def test_execute_sequence_skips_inapplicable_codes(kb, problems):
    p = problems[0]
    cs = ConditionSet.from_problem(p, kb)
    # pythagorean never fires here; the run must not fail because of it
    applied = execute_sequence(cs, kb, [2, 3], passes=3)
    assert 2 not in applied and 3 in applied
    assert cs.check_goal(p.goal_cdl).solved


def test_execute_sequence_honors_deadline(kb):
    p = make_adversarial(kb)
    cs = ConditionSet.from_problem(p, kb)
    clock = Clock(0.01)
    execute_sequence(cs, kb, FLOOD_CODES, passes=3, clock=clock)
    # may overshoot by at most the application in flight, never run to the end
    assert clock.elapsed < 0.05


def test_tp_with_oracle_needs_no_search(kb, problems):
    for p in problems:
        out = solve_tp(p, kb, OraclePredictor(), cfg())
        assert out.status == "solved" and out.steps == 0, p.id


def test_tp_enrichment_is_sound(kb, problems):
    """Guided runs must reach the same answers as plain search."""
    for p in problems:
        plain = solve_plain(p, kb, cfg())
        tp = solve_tp(p, kb, OraclePredictor(), cfg())
        assert tp.answer == plain.answer, p.id


def test_tp_falls_back_to_search_on_predictor_failure(kb, problems):
    class Broken:
        def predict(self, problem):
            raise RuntimeError("predictor unavailable")

    out = solve_tp(problems[0], kb, Broken(), cfg())
    assert out.status == "solved" and out.phase == "fallback"


def test_tp_with_unhelpful_prediction_still_solves(kb, problems):
    out = solve_tp(problems[0], kb, ListPredictor((8, 9)), cfg())
    assert out.status == "solved" and out.steps > 0


def test_adversarial_tp_times_out_but_hybrid_recovers(kb):
    p = make_adversarial(kb)
    flood = ListPredictor(FLOOD_CODES)
    budget = cfg(timeout=0.4)
    assert solve_plain(p, kb, budget).status == "solved"
    tp = solve_tp(p, kb, flood, budget)
    assert tp.status == "timeout"
    hy = solve_hybrid(p, kb, flood, budget)
    assert hy.status == "solved" and hy.answer == "5" and hy.phase == "search"


def test_hybrid_equals_tp_when_tp_succeeds(kb, problems):
    flood = OraclePredictor()
    for p in problems[:6]:
        tp = solve_tp(p, kb, flood, cfg())
        hy = solve_hybrid(p, kb, flood, cfg())
        assert (hy.status, hy.answer, hy.applied_sequence) == \
            (tp.status, tp.answer, tp.applied_sequence)
        assert hy.phase == "tp"


def test_hybrid_split_budget_is_respected(kb):
    p = make_adversarial(kb)
    flood = ListPredictor(FLOOD_CODES)
    out = solve_hybrid(p, kb, flood, cfg(timeout=0.4, hybrid_split=0.5))
    # the tp phase burned at most half; the rest went to the plain search
    assert out.elapsed <= 0.4 + 0.001


def test_unknown_code_raises(kb, problems):
    from planegeo.pipeline import UnknownTheoremCode
    cs = ConditionSet.from_problem(problems[0], kb)
    with pytest.raises(UnknownTheoremCode):
        execute_sequence(cs, kb, [99], passes=1)
