"""Deduction core: the growing condition set and theorem application.

Facts are stored in symmetry-canonical form (per predicate schema), the
algebraic side lives in an exact EquationSystem, and every derived item
carries provenance (theorem code, binding, premise facts) so solution
traces can be exported.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from . import algebra
from .algebra import EquationSystem, Exact, Poly, poly_key
from .knowledge import KnowledgeBase, TheoremRule
from .terms import Entity, Number, Predicate, Term, Variable, render_term


class NonGroundFact(Exception):
    pass


class InvalidBinding(Exception):
    pass


Binding = Dict[str, str]  # pattern point variable -> concrete point label


def canonicalize(term: Predicate, kb: KnowledgeBase) -> Predicate:
    """Rewrite a predicate's entity points to the minimal symmetry variant."""
    schema = kb.schemas.get(term.head)
    if schema is None or not schema.symmetry:
        return term
    flat = []
    for arg in term.args:
        if isinstance(arg, Entity):
            flat.extend(arg.points)
    best = min(tuple(flat[i] for i in perm) for perm in schema.symmetry)
    out_args = []
    idx = 0
    for arg in term.args:
        if isinstance(arg, Entity):
            n = len(arg.points)
            out_args.append(Entity(tuple(best[idx:idx + n])))
            idx += n
        else:
            out_args.append(arg)
    return Predicate(term.head, tuple(out_args))


def measure_var(term: Predicate, kb: KnowledgeBase) -> str:
    """Canonical variable id for a measure term like MeasureOfAngle(ABC)."""
    return render_term(canonicalize(term, kb))


def expr_to_poly(term: Term, kb: KnowledgeBase) -> Poly:
    """Convert an algebraic CDL expression to a polynomial over measure vars."""
    if isinstance(term, Number):
        return algebra.poly_const(term.value)
    if isinstance(term, Variable):
        return algebra.poly_var(term.name)
    if isinstance(term, Predicate):
        head, args = term.head, term.args
        if head == "Add":
            out: Poly = {}
            for a in args:
                out = algebra.poly_add(out, expr_to_poly(a, kb))
            return out
        if head == "Sub":
            out = expr_to_poly(args[0], kb)
            for a in args[1:]:
                out = algebra.poly_sub(out, expr_to_poly(a, kb))
            return out
        if head == "Mul":
            out = algebra.poly_const(1)
            for a in args:
                out = algebra.poly_mul(out, expr_to_poly(a, kb))
            return out
        if head == "Div":
            denom = expr_to_poly(args[1], kb)
            if set(denom) - {()}:
                raise ValueError("division by a non-constant expression")
            return algebra.poly_scale(expr_to_poly(args[0], kb), 1 / denom[()])
        if head == "Pow":
            if not isinstance(args[1], Number) or args[1].value.denominator != 1:
                raise ValueError("Pow exponent must be an integer literal")
            out = algebra.poly_const(1)
            base = expr_to_poly(args[0], kb)
            for _ in range(int(args[1].value)):
                out = algebra.poly_mul(out, base)
            return out
        # measure function head
        return algebra.poly_var(measure_var(term, kb))
    raise ValueError(f"not an algebraic expression: {term!r}")


def equal_to_poly(term: Predicate, kb: KnowledgeBase) -> Poly:
    """Equal(lhs, rhs) -> polynomial lhs - rhs (== 0)."""
    if term.head != "Equal" or len(term.args) != 2:
        raise ValueError(f"not an equation: {term!r}")
    return algebra.poly_sub(expr_to_poly(term.args[0], kb), expr_to_poly(term.args[1], kb))


@dataclass
class TraceStep:
    index: int
    theorem: Optional[str]
    binding: Binding
    new_items: List[str]


@dataclass
class GoalResult:
    solved: bool
    answer: Optional[str] = None
    value: Optional[Exact] = None
    provenance: Tuple = ()

    def __bool__(self):
        return self.solved


class ConditionSet:
    """Monotone store of canonical ground facts plus an equation system."""

    def __init__(self, kb: KnowledgeBase):
        self.kb = kb
        self.facts_by_head: Dict[str, list] = {}
        self.fact_set: set = set()
        self.equations = EquationSystem()
        self.provenance: dict = {}  # fact term or poly key -> (code, binding, premises)
        self.points: set = set()
        self.trace: List[TraceStep] = []

    def clone(self) -> "ConditionSet":
        out = ConditionSet.__new__(ConditionSet)
        out.kb = self.kb
        out.facts_by_head = {h: list(v) for h, v in self.facts_by_head.items()}
        out.fact_set = set(self.fact_set)
        out.equations = self.equations.clone()
        out.provenance = dict(self.provenance)
        out.points = set(self.points)
        out.trace = list(self.trace)
        return out

    def signature(self) -> tuple:
        return (frozenset(self.fact_set), frozenset(self.equations._keys))

    # -- insertion ---------------------------------------------------------

    def add_fact(self, fact: Predicate, provenance=None) -> bool:
        """Insert a ground fact (or route an Equal to the equation store)."""
        if not isinstance(fact, Predicate):
            raise NonGroundFact(f"not a predicate: {fact!r}")
        if fact.head == "Equal":
            poly = equal_to_poly(fact, self.kb)
            self._note_points(fact)
            return self.add_equation(poly, provenance)
        for p in _entity_points(fact):
            if not p.isupper():
                raise NonGroundFact(f"non-ground point {p!r} in {render_term(fact)}")
        canon = canonicalize(fact, self.kb)
        if canon in self.fact_set:
            return False
        self.fact_set.add(canon)
        self.facts_by_head.setdefault(canon.head, []).append(canon)
        self._note_points(canon)
        if provenance is not None:
            self.provenance[canon] = provenance
        return True

    def add_equation(self, poly: Poly, provenance=None) -> bool:
        new = self.equations.add(poly)
        if new and provenance is not None:
            self.provenance[poly_key(poly)] = provenance
        return new

    def _note_points(self, term: Term):
        for p in _entity_points(term):
            if p.isupper():
                self.points.add(p)

    # -- queries -----------------------------------------------------------

    def has_fact(self, fact: Predicate) -> bool:
        return canonicalize(fact, self.kb) in self.fact_set

    def solve_equations(self, charge=None) -> int:
        return self.equations.solve(charge=charge)

    def eval_expr(self, expr: Term) -> Optional[Exact]:
        poly = expr_to_poly(expr, self.kb)
        return algebra.poly_eval(poly, self.equations.solved)

    def check_goal(self, goal: Term) -> GoalResult:
        self.solve_equations()
        if isinstance(goal, Predicate) and goal.head == "Value":
            value = self.eval_expr(goal.args[0])
            if value is None:
                return GoalResult(False)
            return GoalResult(True, answer=str(value), value=value)
        if isinstance(goal, Predicate):
            canon = canonicalize(goal, self.kb)
            if canon in self.fact_set:
                return GoalResult(
                    True, answer=render_term(canon),
                    provenance=self.provenance_chain(canon),
                )
            return GoalResult(False)
        return GoalResult(False)

    def provenance_chain(self, fact: Predicate) -> tuple:
        """Facts and theorem codes justifying `fact`, root-first."""
        chain = []
        seen = set()

        def walk(f):
            if f in seen:
                return
            seen.add(f)
            prov = self.provenance.get(f)
            if prov is None:
                return
            code, binding, premises = prov
            for p in premises:
                walk(p)
            chain.append((code, binding, f))

        walk(fact)
        return tuple(chain)

    # -- matching and application -------------------------------------------

    def match_premise(self, th: TheoremRule) -> List[Binding]:
        """All bindings grounding the premise in this condition set.

        Bindings are injective on points, duplicate-free, and ordered
        lexicographically on the bound points.
        """
        self.solve_equations()
        # fail-fast join order: fewest candidate facts first
        patterns = sorted(
            th.premise_facts,
            key=lambda p: (len(self.facts_by_head.get(p.head, [])), render_term(p)),
        )
        results: List[Binding] = []
        seen = set()

        def backtrack(i: int, binding: Binding):
            if i == len(patterns):
                if self._premise_equations_hold(th, binding):
                    key = tuple(sorted(binding.items()))
                    if key not in seen:
                        seen.add(key)
                        results.append(dict(binding))
                return
            pat = patterns[i]
            for fact in self.facts_by_head.get(pat.head, []):
                for variant in self._variants(fact):
                    ext = _unify_points(pat, variant, binding)
                    if ext is not None:
                        backtrack(i + 1, ext)

        backtrack(0, {})
        results.sort(key=lambda b: tuple(sorted(b.items())))
        return results

    def _variants(self, fact: Predicate):
        schema = self.kb.schemas.get(fact.head)
        flat = [p for p in _entity_points(fact)]
        if schema is None or not schema.symmetry:
            yield tuple(flat)
            return
        seen = set()
        for perm in schema.symmetry:
            v = tuple(flat[i] for i in perm)
            if v not in seen:
                seen.add(v)
                yield v

    def _premise_equations_hold(self, th: TheoremRule, binding: Binding) -> bool:
        for eq in th.premise_equations:
            inst = instantiate(eq, binding)
            poly = equal_to_poly(inst, self.kb)
            if not self.equations.entails(poly):
                return False
        return True

    def apply_theorem(self, th: TheoremRule, binding: Binding):
        """Instantiate and insert th's conclusions; returns new items.

        New facts are returned as Terms, new equations as Equal Terms.
        Raises InvalidBinding when the premise does not hold under binding.
        """
        self._check_binding(th, binding)
        premises = [
            canonicalize(instantiate(p, binding), self.kb) for p in th.premise_facts
        ]
        prov = (th.code, dict(binding), tuple(premises))
        new_items: List[Term] = []
        for pat in th.conclusion_facts:
            inst = instantiate(pat, binding)
            if self.add_fact(inst, prov):
                new_items.append(canonicalize(inst, self.kb))
        for pat in th.conclusion_equations:
            inst = instantiate(pat, binding)
            poly = equal_to_poly(inst, self.kb)
            if self.add_equation(poly, prov):
                new_items.append(inst)
        if new_items:
            self.trace.append(TraceStep(
                index=len(self.trace),
                theorem=th.name,
                binding=dict(binding),
                new_items=[render_term(t) for t in new_items],
            ))
        return new_items

    def _check_binding(self, th: TheoremRule, binding: Binding):
        vals = list(binding.values())
        if len(set(vals)) != len(vals):
            raise InvalidBinding(f"binding not injective: {binding}")
        for pat in th.premise_facts:
            inst = instantiate(pat, binding)
            if not self.has_fact(inst):
                raise InvalidBinding(f"premise fact missing: {render_term(inst)}")
        self.solve_equations()
        if not self._premise_equations_hold(th, binding):
            raise InvalidBinding(f"premise constraints unmet for {th.name} under {binding}")

    # -- setup & export ------------------------------------------------------

    @classmethod
    def from_problem(cls, problem, kb: KnowledgeBase) -> "ConditionSet":
        cs = cls(kb)
        for t in problem.construction_cdl:
            cs.add_fact(t)
        for t in problem.condition_cdl:
            cs.add_fact(t)
        cs.solve_equations()
        return cs

    def export_trace(self) -> List[dict]:
        return [
            {
                "step": s.index,
                "theorem": s.theorem,
                "binding": dict(sorted(s.binding.items())),
                "new": list(s.new_items),
            }
            for s in self.trace
        ]


def _entity_points(term: Term):
    if isinstance(term, Entity):
        yield from term.points
    elif isinstance(term, Predicate):
        for a in term.args:
            yield from _entity_points(a)


def instantiate(pattern: Term, binding: Binding) -> Term:
    """Replace pattern point variables with bound concrete points."""
    if isinstance(pattern, Entity):
        return Entity(tuple(binding.get(p, p) for p in pattern.points))
    if isinstance(pattern, Predicate):
        return Predicate(pattern.head, tuple(instantiate(a, binding) for a in pattern.args))
    return pattern


def _unify_points(pattern: Predicate, fact_points: tuple, binding: Binding):
    """Unify a pattern's flattened points against a fact-variant point tuple."""
    pat_points = list(_entity_points(pattern))
    if len(pat_points) != len(fact_points):
        return None
    out = dict(binding)
    used = set(out.values())
    for var, point in zip(pat_points, fact_points):
        bound = out.get(var)
        if bound is None:
            if point in used:
                return None  # injectivity
            out[var] = point
            used.add(point)
        elif bound != point:
            return None
    return out
