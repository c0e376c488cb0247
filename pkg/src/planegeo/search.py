"""Forward and backward theorem search with resource limits.

Timing uses a deterministic cost-model clock: every theorem application and
equation-solver row operation advances simulated time by a fixed quantum.
This keeps outcomes byte-identical across replays and across parallel batch
runs (wall-clock timing would make timeout classification racy and
irreproducible), at the price of "elapsed" measuring modeled work rather
than host seconds.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .algebra import InconsistentSystem, poly_vars
from .conditions import ConditionSet, expr_to_poly, instantiate
from .knowledge import KnowledgeBase, TheoremRule
from .problems import ProblemInstance
from .terms import Entity, Predicate, parse_term, render_term

# virtual-clock quanta (simulated seconds)
APPLY_COST = 1e-3  # one theorem application (clone + insert + goal check)
ROW_OP_COST = 5e-5  # one exact elimination row operation
EXPAND_COST = 1e-4  # frontier bookkeeping per expansion


class Clock:
    """Deterministic simulated clock with a budget."""

    def __init__(self, budget: float):
        self.budget = budget
        self.elapsed = 0.0

    def charge(self, seconds: float):
        self.elapsed += seconds

    def charge_rows(self, n: int):
        self.elapsed += n * ROW_OP_COST

    @property
    def exceeded(self) -> bool:
        return self.elapsed >= self.budget


@dataclass
class SearchLimits:
    max_depth: int = 15
    beam_size: int = 20
    timeout: float = 600.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_depth < 1 or self.beam_size < 1 or self.timeout <= 0:
            raise ValueError("max_depth >= 1, beam_size >= 1, timeout > 0 required")


@dataclass
class SearchOutcome:
    status: str  # solved | unsolved | timeout
    answer: Optional[str] = None
    applied_sequence: Tuple[int, ...] = ()
    steps: int = 0
    elapsed: float = 0.0


STRATEGIES = ("bfs", "dfs", "rs", "bs")


class Frontier:
    """Node container implementing the four selection strategies.

    bfs pops FIFO, dfs LIFO, rs uniformly at random; bs is level-synchronous
    and keeps a uniform-random subset of at most beam_size nodes per level
    (FIFO within the kept set).
    """

    def __init__(self, strategy: str, beam_size: int, rng: random.Random):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}")
        self.strategy = strategy
        self.beam_size = beam_size
        self.rng = rng
        self.items: deque = deque()
        self.next_level: list = []

    def push(self, item):
        if self.strategy == "bs":
            self.next_level.append(item)
        else:
            self.items.append(item)

    def pop(self):
        if self.strategy == "bs" and not self.items:
            self._promote()
        if not self.items:
            raise IndexError("pop from empty frontier")
        if self.strategy == "bfs":
            return self.items.popleft()
        if self.strategy == "dfs":
            return self.items.pop()
        if self.strategy == "rs":
            i = self.rng.randrange(len(self.items))
            self.items.rotate(-i)
            out = self.items.popleft()
            self.items.rotate(i)
            return out
        return self.items.popleft()  # bs: FIFO within the kept level

    def _promote(self):
        level = self.next_level
        self.next_level = []
        if len(level) > self.beam_size:
            keep = sorted(self.rng.sample(range(len(level)), self.beam_size))
            level = [level[i] for i in keep]
        self.items.extend(level)

    def __bool__(self):
        return bool(self.items) or bool(self.next_level)


def _init_conditions(problem: ProblemInstance, kb: KnowledgeBase,
                     initial_cs: Optional[ConditionSet]) -> ConditionSet:
    if initial_cs is not None:
        return initial_cs.clone()
    return ConditionSet.from_problem(problem, kb)


@dataclass
class _FwNode:
    cs: ConditionSet
    path: Tuple[int, ...]
    depth: int


def forward_search(problem: ProblemInstance, kb: KnowledgeBase, strategy: str,
                   limits: SearchLimits, initial_cs: Optional[ConditionSet] = None,
                   clock: Optional[Clock] = None) -> SearchOutcome:
    """Expand (theorem, binding) pairs from the conditions until the goal holds."""
    clock = clock or Clock(limits.timeout)
    rng = random.Random(limits.rng_seed)
    goal = problem.goal_cdl
    steps = 0

    root_cs = _init_conditions(problem, kb, initial_cs)
    root_cs.solve_equations(charge=clock.charge_rows)
    result = root_cs.check_goal(goal)
    if result.solved:
        return SearchOutcome("solved", result.answer, (), 0, clock.elapsed)

    frontier = Frontier(strategy, limits.beam_size, rng)
    frontier.push(_FwNode(root_cs, (), 0))
    visited = {root_cs.signature()}

    while frontier:
        node = frontier.pop()
        steps += 1
        clock.charge(EXPAND_COST)
        if clock.exceeded:
            return SearchOutcome("timeout", None, (), steps, clock.elapsed)
        for th in kb.theorems:
            for binding in node.cs.match_premise(th):
                clock.charge(APPLY_COST)
                if clock.exceeded:
                    return SearchOutcome("timeout", None, (), steps, clock.elapsed)
                child_cs = node.cs.clone()
                try:
                    new_items = child_cs.apply_theorem(th, binding)
                    if not new_items:
                        continue
                    child_cs.solve_equations(charge=clock.charge_rows)
                except InconsistentSystem:
                    continue  # contradictory branch: prune
                sig = child_cs.signature()
                if sig in visited:
                    continue
                visited.add(sig)
                path = node.path + (th.code,)
                result = child_cs.check_goal(goal)
                if result.solved:
                    return SearchOutcome("solved", result.answer, path, steps,
                                         clock.elapsed)
                if node.depth + 1 < limits.max_depth:
                    frontier.push(_FwNode(child_cs, path, node.depth + 1))
    return SearchOutcome("unsolved", None, (), steps, clock.elapsed)


# -- backward search ---------------------------------------------------------


@dataclass(eq=False)
class _Subgoal:
    key: tuple
    kind: str  # "rel" | "val"
    payload: object  # canonical Predicate, or tuple of target measure vars
    depth: int
    parents: list = field(default_factory=list)  # _RuleNode links
    tried: set = field(default_factory=set)  # (code, binding items) candidates seen
    solved: bool = False


@dataclass(eq=False)
class _RuleNode:
    th: TheoremRule
    binding: dict
    goal: _Subgoal
    children: list = field(default_factory=list)
    pending: int = 0  # children not yet closed
    fired: bool = False


def backward_search(problem: ProblemInstance, kb: KnowledgeBase, strategy: str,
                    limits: SearchLimits, initial_cs: Optional[ConditionSet] = None,
                    clock: Optional[Clock] = None) -> SearchOutcome:
    """Goal decomposition: expand subgoals via theorems concluding them.

    A candidate (theorem, binding) whose premise already holds is applied
    forward immediately to certify the step; otherwise its unmet premises
    become child subgoals. Applications are monotone, so re-expanding an
    open subgoal after the condition set grew only ever tries new candidates.
    """
    clock = clock or Clock(limits.timeout)
    rng = random.Random(limits.rng_seed)
    cs = _init_conditions(problem, kb, initial_cs)
    cs.solve_equations(charge=clock.charge_rows)
    steps = 0
    applied: List[int] = []

    goal = problem.goal_cdl
    result = cs.check_goal(goal)
    if result.solved:
        return SearchOutcome("solved", result.answer, (), 0, clock.elapsed)

    registry = {}
    open_goals: set = set()  # subgoals not yet closed, scanned on settle
    ready: deque = deque()  # rules whose pending count reached zero

    def get_subgoal(kind, payload, depth):
        key = (kind, render_term(payload) if kind == "rel" else tuple(payload))
        node = registry.get(key)
        if node is None:
            node = _Subgoal(key=key, kind=kind, payload=payload, depth=depth)
            registry[key] = node
            if not _sg_closed(node, cs):
                open_goals.add(node)
        return node

    def goal_closed(sg: _Subgoal) -> bool:
        return _sg_closed(sg, cs)

    def root_subgoal():
        if isinstance(goal, Predicate) and goal.head == "Value":
            targets = _unsolved_vars(cs, expr_to_poly(goal.args[0], kb))
            return get_subgoal("val", tuple(sorted(targets)), 0)
        return get_subgoal("rel", cs_canonical(goal), 0)

    def cs_canonical(term):
        from .conditions import canonicalize
        return canonicalize(term, kb)

    frontier = Frontier(strategy, limits.beam_size, rng)
    root = root_subgoal()
    frontier.push(root)
    queued = {root.key}

    def try_apply(th, binding) -> bool:
        """Forward-certify a candidate whose premise holds; returns success."""
        nonlocal applied
        try:
            new_items = cs.apply_theorem(th, binding)
        except InconsistentSystem:
            return False
        if not new_items:
            return True  # already fired, nothing to certify
        try:
            cs.solve_equations(charge=clock.charge_rows)
        except InconsistentSystem:
            return False
        applied.append(th.code)
        return True

    def premise_status(th, binding):
        missing = []
        for pat in th.premise_facts:
            inst = cs_canonical(instantiate(pat, binding))
            if not cs.has_fact(inst):
                missing.append(("rel", inst))
        for pat in th.premise_equations:
            from .conditions import equal_to_poly
            poly = equal_to_poly(instantiate(pat, binding), kb)
            if not cs.equations.entails(poly):
                unsolved = _unsolved_vars(cs, poly)
                if unsolved:
                    missing.append(("val", tuple(sorted(unsolved))))
                else:
                    return None  # constraint violated outright
        return missing

    while frontier:
        sg = frontier.pop()
        queued.discard(sg.key)
        steps += 1
        clock.charge(EXPAND_COST)
        if clock.exceeded:
            return SearchOutcome("timeout", None, tuple(applied), steps, clock.elapsed)
        if sg.solved or goal_closed(sg):
            sg.solved = True
            continue
        if sg.kind == "val":
            # the reachable target set may have grown with the equation store
            targets = _closure_vars(cs, sg.payload)
        else:
            targets = None
        applied_snapshot = len(applied)

        for th, binding in _candidates(cs, kb, sg, targets):
            cand_key = (th.code, tuple(sorted(binding.items())))
            if cand_key in sg.tried:
                continue
            sg.tried.add(cand_key)
            clock.charge(APPLY_COST)
            if clock.exceeded:
                return SearchOutcome("timeout", None, tuple(applied), steps,
                                     clock.elapsed)
            missing = premise_status(th, binding)
            if missing is None:
                continue
            if not missing:
                if try_apply(th, binding):
                    result = cs.check_goal(goal)
                    if result.solved:
                        return SearchOutcome("solved", result.answer, tuple(applied),
                                             steps, clock.elapsed)
                    # progress may have closed or re-opened candidates elsewhere
                    if not sg.solved and not goal_closed(sg) and sg.key not in queued:
                        frontier.push(sg)
                        queued.add(sg.key)
                continue
            if sg.depth + 1 >= limits.max_depth:
                continue
            rule = _RuleNode(th=th, binding=binding, goal=sg)
            for kind, payload in missing:
                child = get_subgoal(kind, payload, sg.depth + 1)
                if _is_open_ancestor(child, sg):
                    rule.children = []
                    break
                rule.children.append(child)
                child.parents.append(rule)
                if not _sg_closed(child, cs):
                    rule.pending += 1
                    if child.key not in queued:
                        frontier.push(child)
                        queued.add(child.key)
            if rule.children and rule.pending == 0:
                ready.append(rule)
        # fire rules whose premise subgoals have all closed
        if ready or len(applied) != applied_snapshot:
            _settle(open_goals, ready, cs, try_apply)
        result = cs.check_goal(goal)
        if result.solved:
            return SearchOutcome("solved", result.answer, tuple(applied), steps,
                                 clock.elapsed)
    return SearchOutcome("unsolved", None, tuple(applied), steps, clock.elapsed)


def _settle(open_goals, ready, cs, try_apply):
    """Fire ready rules and propagate newly closed subgoals to fixpoint.

    A rule becomes ready when its pending-children count hits zero; firing
    rules grows the condition set, which may close further subgoals, whose
    waiting rules are then enqueued in turn.
    """
    while True:
        while ready:
            rule = ready.popleft()
            if rule.fired:
                continue
            rule.fired = True
            if _premise_ok(rule, cs):
                try_apply(rule.th, rule.binding)
        newly = [sg for sg in open_goals if _sg_closed(sg, cs)]
        if not newly:
            return
        for sg in newly:
            open_goals.discard(sg)
            for rule in sg.parents:
                rule.pending -= 1
                if rule.pending == 0 and not rule.fired:
                    ready.append(rule)
        if not ready:
            return


def _sg_closed(sg: _Subgoal, cs: ConditionSet) -> bool:
    if sg.solved:
        return True
    if sg.kind == "rel":
        ok = sg.payload in cs.fact_set  # payload is stored canonicalized
    else:
        ok = all(cs.equations.value_of(v) is not None for v in sg.payload)
    if ok:
        sg.solved = True
    return ok


def _premise_ok(rule: _RuleNode, cs: ConditionSet) -> bool:
    try:
        cs._check_binding(rule.th, rule.binding)
        return True
    except Exception:
        return False


def _unsolved_vars(cs: ConditionSet, poly) -> set:
    return {v for v in poly_vars(poly) if cs.equations.value_of(v) is None}


def _closure_vars(cs: ConditionSet, seed_vars) -> set:
    """Unsolved vars connected to the seeds through the equation graph."""
    cs.solve_equations()
    adj = {}
    for p in cs.equations.equations:
        vs = [v for v in poly_vars(p) if cs.equations.value_of(v) is None]
        for v in vs:
            adj.setdefault(v, set()).update(vs)
    out = {v for v in seed_vars if cs.equations.value_of(v) is None}
    frontier = list(out)
    while frontier:
        v = frontier.pop()
        for w in adj.get(v, ()):
            if w not in out:
                out.add(w)
                frontier.append(w)
    return out


def _candidates(cs: ConditionSet, kb: KnowledgeBase, sg: _Subgoal, targets):
    """(theorem, binding) pairs whose conclusions could close the subgoal."""
    from .conditions import canonicalize

    points = sorted(cs.points)
    for th in kb.theorems:
        partials = []
        if sg.kind == "rel":
            fact = sg.payload
            schema = cs.kb.schemas.get(fact.head)
            flat = tuple(_flat_points(fact))
            variants = {flat}
            if schema and schema.symmetry:
                variants = {tuple(flat[i] for i in perm) for perm in schema.symmetry}
            for pat in th.conclusion_facts:
                if pat.head != fact.head:
                    continue
                pat_flat = list(_flat_points(pat))
                for var_points in sorted(variants):
                    sigma = _bind(pat_flat, var_points)
                    if sigma is not None:
                        partials.append(sigma)
        else:
            target_vars = targets if targets is not None else set(sg.payload)
            target_terms = []
            for v in target_vars:
                try:
                    t = parse_term(v)
                except Exception:
                    continue
                if isinstance(t, Predicate):
                    target_terms.append(t)
            for pat in th.conclusion_equations:
                for mt in _measure_terms(pat, kb):
                    for tt in target_terms:
                        if tt.head != mt.head:
                            continue
                        schema = kb.schemas.get(tt.head)
                        flat = tuple(_flat_points(tt))
                        variants = {flat}
                        if schema and schema.symmetry:
                            variants = {tuple(flat[i] for i in perm)
                                        for perm in schema.symmetry}
                        mt_flat = list(_flat_points(mt))
                        for var_points in sorted(variants):
                            sigma = _bind(mt_flat, var_points)
                            if sigma is not None:
                                partials.append(sigma)
        # dedup partial bindings, then complete over the point set
        seen = set()
        all_vars = sorted(th.pattern_vars(th.premise_facts)
                          | th.pattern_vars(th.premise_equations)
                          | th.pattern_vars(th.conclusion_facts)
                          | th.pattern_vars(th.conclusion_equations))
        done = set()
        for sigma in partials:
            key = tuple(sorted(sigma.items()))
            if key in seen:
                continue
            seen.add(key)
            for full in _completions(cs, th, sigma, all_vars, points):
                fkey = (tuple(sorted(full.items())),)
                if fkey not in done:
                    done.add(fkey)
                    yield th, full


def _flat_points(term):
    if isinstance(term, Entity):
        yield from term.points
    elif isinstance(term, Predicate):
        for a in term.args:
            yield from _flat_points(a)


def _measure_terms(pat, kb):
    out = []

    def walk(t):
        if isinstance(t, Predicate):
            schema = kb.schemas.get(t.head)
            if schema is not None and schema.measure:
                out.append(t)
            else:
                for a in t.args:
                    walk(a)

    walk(pat)
    return out


def _bind(pattern_vars, points):
    if len(pattern_vars) != len(points):
        return None
    out = {}
    used = {}
    for v, p in zip(pattern_vars, points):
        if v in out:
            if out[v] != p:
                return None
        elif p in used:
            return None
        else:
            out[v] = p
            used[p] = v
    return out


def _completions(cs: ConditionSet, th: TheoremRule, sigma, all_vars, points):
    """Extend a partial binding to all theorem variables.

    Premise fact patterns are first matched against stored facts to constrain
    the extension; variables left unbound after that (their premise facts are
    absent and must themselves become subgoals) fall back to enumerating the
    remaining points.
    """
    import itertools

    from .conditions import _unify_points

    results = []
    seen = set()
    patterns = sorted(th.premise_facts, key=render_term)

    def backtrack(i, binding):
        if i == len(patterns):
            free = [v for v in all_vars if v not in binding]
            if not free:
                key = tuple(sorted(binding.items()))
                if key not in seen:
                    seen.add(key)
                    results.append(dict(binding))
                return
            avail = [p for p in points if p not in binding.values()]
            for combo in itertools.permutations(avail, len(free)):
                full = dict(binding)
                full.update(zip(free, combo))
                key = tuple(sorted(full.items()))
                if key not in seen:
                    seen.add(key)
                    results.append(full)
            return
        pat = patterns[i]
        matched = False
        for fact in cs.facts_by_head.get(pat.head, []):
            for variant in cs._variants(fact):
                ext = _unify_points(pat, variant, binding)
                if ext is not None:
                    matched = True
                    backtrack(i + 1, ext)
        if not matched:
            backtrack(i + 1, binding)  # absent premise: leave for subgoaling

    backtrack(0, dict(sigma))
    return results


def _is_open_ancestor(child: _Subgoal, node: _Subgoal) -> bool:
    """True if `child` equals `node` or an open goal above it (cycle guard)."""
    seen = set()
    stack = [node]
    while stack:
        g = stack.pop()
        if g.key in seen:
            continue
        seen.add(g.key)
        if g.key == child.key and not g.solved:
            return True
        for rule in g.parents:
            stack.append(rule.goal)
    return False
