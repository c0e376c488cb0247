"""Predictor-guided solving: enrich the conditions with predicted theorems,
then fall back to search for whatever remains."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

from .algebra import InconsistentSystem
from .conditions import ConditionSet
from .knowledge import KnowledgeBase, UnknownTheorem
from .predictor import Predictor
from .problems import ProblemInstance
from .search import (APPLY_COST, Clock, SearchLimits, backward_search,
                     forward_search)


class UnknownTheoremCode(Exception):
    pass


@dataclass
class PipelineConfig:
    method: str = "fw"  # fw | bw
    strategy: str = "bfs"
    limits: SearchLimits = field(default_factory=SearchLimits)
    passes: int = 3  # fixpoint passes over the predicted sequence
    hybrid_split: float = 0.5  # share of the budget given to the tp phase


@dataclass
class PipelineOutcome:
    status: str  # solved | unsolved | timeout
    answer: Optional[str]
    applied_sequence: Tuple[int, ...]
    steps: int
    elapsed: float
    predicted: Tuple[int, ...] = ()
    phase: str = "tp"  # tp | search | fallback


def execute_sequence(cs: ConditionSet, kb: KnowledgeBase, codes, passes: int = 3,
                     clock: Optional[Clock] = None) -> Tuple[int, ...]:
    """Apply each code's theorem exhaustively, in order, for up to `passes`
    rounds; unknown applications are skipped silently. Returns the codes that
    contributed at least one new item, in application order."""
    applied = []
    for _ in range(max(1, passes)):
        changed = False
        for code in codes:
            try:
                th = kb.theorem_by_code(code)
            except UnknownTheorem:
                raise UnknownTheoremCode(f"no theorem with code {code}") from None
            if clock is not None and clock.exceeded:
                return tuple(applied)
            for binding in cs.match_premise(th):
                if clock is not None:
                    clock.charge(APPLY_COST)
                    if clock.exceeded:
                        return tuple(applied)
                try:
                    new_items = cs.apply_theorem(th, binding)
                    if new_items:
                        cs.solve_equations(
                            charge=clock.charge_rows if clock else None)
                        applied.append(code)
                        changed = True
                except InconsistentSystem:
                    continue
        if not changed:
            break
    return tuple(applied)


def _search(problem, kb, config: PipelineConfig, initial_cs, clock):
    fn = backward_search if config.method == "bw" else forward_search
    return fn(problem, kb, config.strategy, config.limits,
              initial_cs=initial_cs, clock=clock)


def solve_plain(problem: ProblemInstance, kb: KnowledgeBase,
                config: PipelineConfig) -> PipelineOutcome:
    clock = Clock(config.limits.timeout)
    out = _search(problem, kb, config, None, clock)
    return PipelineOutcome(out.status, out.answer, out.applied_sequence,
                           out.steps, out.elapsed, (), "search")


def solve_tp(problem: ProblemInstance, kb: KnowledgeBase, predictor: Predictor,
             config: PipelineConfig, clock: Optional[Clock] = None) -> PipelineOutcome:
    """Predict a theorem set, execute it, then search from the enriched state."""
    clock = clock or Clock(config.limits.timeout)
    try:
        predicted = tuple(predictor.predict(problem))
    except Exception:
        out = _search(problem, kb, config, None, clock)
        return PipelineOutcome(out.status, out.answer, out.applied_sequence,
                               out.steps, out.elapsed, (), "fallback")
    cs = ConditionSet.from_problem(problem, kb)
    try:
        cs.solve_equations(charge=clock.charge_rows)
        applied = execute_sequence(cs, kb, predicted, config.passes, clock)
        result = cs.check_goal(problem.goal_cdl)
    except InconsistentSystem:
        out = _search(problem, kb, config, None, clock)
        return PipelineOutcome(out.status, out.answer, out.applied_sequence,
                               out.steps, out.elapsed, predicted, "fallback")
    if result.solved:
        return PipelineOutcome("solved", result.answer, applied, 0,
                               clock.elapsed, predicted, "tp")
    if clock.exceeded:
        return PipelineOutcome("timeout", None, applied, 0, clock.elapsed,
                               predicted, "tp")
    out = _search(problem, kb, config, cs, clock)
    return PipelineOutcome(out.status, out.answer, applied + out.applied_sequence,
                           out.steps, out.elapsed, predicted, "tp")


def solve_hybrid(problem: ProblemInstance, kb: KnowledgeBase, predictor: Predictor,
                 config: PipelineConfig) -> PipelineOutcome:
    """Run the tp pipeline on part of the budget; on timeout, restart with a
    plain search on the remainder."""
    split = min(max(config.hybrid_split, 0.0), 1.0)
    tp_budget = config.limits.timeout * split
    if tp_budget > 0:
        tp_clock = Clock(tp_budget)
        tp_out = solve_tp(problem, kb, predictor, config, tp_clock)
        if tp_out.status != "timeout":
            return tp_out
    else:
        tp_out = None
    clock = Clock(config.limits.timeout - tp_budget)
    out = _search(problem, kb, config, None, clock)
    spent = (tp_out.elapsed if tp_out else 0.0) + out.elapsed
    return PipelineOutcome(out.status, out.answer, out.applied_sequence,
                           out.steps, spent,
                           tp_out.predicted if tp_out else (), "search")
