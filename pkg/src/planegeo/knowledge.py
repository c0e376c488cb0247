"""Geometry definition language (GDL): predicate schemas and theorem rules.

A knowledge base is loaded from a YAML document holding predicate schemas
(with symmetry permutation groups over their flattened point slots) and
theorem rules (premise patterns -> conclusion patterns). It also owns the
theorem-name <-> integer-code codec; code 0 is reserved as the predictor's
end-of-sequence token, so codes start at 1.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field

import yaml

from .terms import Entity, Predicate, Term, parse_pattern_term


class SchemaError(Exception):
    pass


class DuplicateName(SchemaError):
    pass


class UnboundConclusionVariable(SchemaError):
    pass


class UnknownTheorem(KeyError):
    pass


@dataclass(frozen=True)
class PredicateSchema:
    name: str
    arity: int
    arg_kinds: tuple  # each "entity:<n>" or "term" or "number"
    symmetry: tuple = ()  # closed permutation group over flattened point slots
    measure: bool = False  # numeric-valued function head (LengthOfLine, ...)

    @property
    def point_count(self) -> int:
        return sum(int(k.split(":")[1]) for k in self.arg_kinds if k.startswith("entity"))


@dataclass(frozen=True)
class TheoremRule:
    name: str
    code: int
    premise_facts: tuple  # Term patterns
    premise_equations: tuple
    conclusion_facts: tuple
    conclusion_equations: tuple

    def pattern_vars(self, terms) -> set:
        out = set()
        for t in terms:
            out |= _points_of(t)
        return out


def _points_of(t: Term) -> set:
    if isinstance(t, Entity):
        return set(t.points)
    if isinstance(t, Predicate):
        out = set()
        for a in t.args:
            out |= _points_of(a)
        return out
    return set()


@dataclass
class KnowledgeBase:
    schemas: dict = field(default_factory=dict)  # name -> PredicateSchema
    theorems: list = field(default_factory=list)  # ordered TheoremRule list
    _by_name: dict = field(default_factory=dict)
    _by_code: dict = field(default_factory=dict)

    def theorem_by_name(self, name: str) -> TheoremRule:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownTheorem(name) from None

    def theorem_by_code(self, code: int) -> TheoremRule:
        try:
            return self._by_code[code]
        except KeyError:
            raise UnknownTheorem(code) from None

    def name_to_code(self, name: str) -> int:
        return self.theorem_by_name(name).code

    def code_to_name(self, code: int) -> str:
        return self.theorem_by_code(code).name

    def codes(self) -> list:
        return [t.code for t in self.theorems]

    def schema(self, head: str) -> PredicateSchema:
        return self.schemas[head]


# Arithmetic heads allowed inside algebraic expressions; not schema-checked.
ARITHMETIC_HEADS = {"Add", "Sub", "Mul", "Div", "Pow", "Equal"}


def _closure(perms, n) -> tuple:
    """Close a set of permutations (index tuples of length n) under composition."""
    group = {tuple(range(n))}
    frontier = [tuple(p) for p in perms]
    for p in frontier:
        if len(p) != n or sorted(p) != list(range(n)):
            raise SchemaError(f"invalid permutation {p} for {n} points")
    group.update(frontier)
    changed = True
    while changed:
        changed = False
        for a, b in itertools.product(list(group), repeat=2):
            c = tuple(a[i] for i in b)
            if c not in group:
                group.add(c)
                changed = True
    return tuple(sorted(group))


def load_knowledge_base(path_or_text) -> KnowledgeBase:
    """Load and validate a GDL document from a file path or YAML text."""
    if isinstance(path_or_text, dict):
        doc = path_or_text
    elif hasattr(path_or_text, "read"):
        doc = yaml.safe_load(path_or_text)
    else:
        text = str(path_or_text)
        if "\n" not in text and os.path.exists(text):
            with open(text) as fh:
                doc = yaml.safe_load(fh)
        else:
            doc = yaml.safe_load(text)
    if not isinstance(doc, dict):
        raise SchemaError("GDL document must be a mapping")

    kb = KnowledgeBase()
    for entry in doc.get("predicates", []):
        _require(entry, ("name", "args"), "predicate")
        name = entry["name"]
        if name in kb.schemas:
            raise DuplicateName(f"duplicate predicate {name}")
        arg_kinds = tuple(entry["args"])
        n_points = sum(int(k.split(":")[1]) for k in arg_kinds if k.startswith("entity"))
        sym = _closure(entry.get("symmetry", []), n_points)
        kb.schemas[name] = PredicateSchema(
            name=name,
            arity=len(arg_kinds),
            arg_kinds=arg_kinds,
            symmetry=sym,
            measure=bool(entry.get("measure", False)),
        )

    next_code = 1
    for entry in doc.get("theorems", []):
        _require(entry, ("name", "premise", "conclusions"), "theorem")
        name = entry["name"]
        if name in kb._by_name:
            raise DuplicateName(f"duplicate theorem {name}")
        code = int(entry.get("code", next_code))
        next_code = max(next_code, code) + 1
        rule = TheoremRule(
            name=name,
            code=code,
            premise_facts=_parse_patterns(entry["premise"].get("facts", [])),
            premise_equations=_parse_patterns(entry["premise"].get("equations", [])),
            conclusion_facts=_parse_patterns(entry["conclusions"].get("facts", [])),
            conclusion_equations=_parse_patterns(entry["conclusions"].get("equations", [])),
        )
        kb.theorems.append(rule)
        kb._by_name[name] = rule
        if code in kb._by_code:
            raise DuplicateName(f"duplicate theorem code {code}")
        kb._by_code[code] = rule

    diagnostics = validate(kb)
    if diagnostics:
        first = diagnostics[0]
        if first.startswith("UnboundConclusionVariable"):
            raise UnboundConclusionVariable("; ".join(diagnostics))
        raise SchemaError("; ".join(diagnostics))
    return kb


def _require(entry, keys, what):
    for k in keys:
        if k not in entry:
            raise SchemaError(f"{what} entry missing field {k!r}: {entry!r}")


def _parse_patterns(texts) -> tuple:
    return tuple(parse_pattern_term(t) for t in texts)


def validate(kb: KnowledgeBase) -> list:
    """Return a list of diagnostic strings; empty iff the KB is well-formed."""
    diags = []
    seen_codes = {}
    for th in kb.theorems:
        if th.code in seen_codes and seen_codes[th.code] != th.name:
            diags.append(f"DuplicateCode: {th.name} and {seen_codes[th.code]} share {th.code}")
        seen_codes.setdefault(th.code, th.name)
        if th.code < 1:
            diags.append(f"BadCode: {th.name} has non-positive code {th.code}")
        premise_vars = th.pattern_vars(th.premise_facts) | th.pattern_vars(th.premise_equations)
        concl_vars = th.pattern_vars(th.conclusion_facts) | th.pattern_vars(th.conclusion_equations)
        loose = concl_vars - premise_vars
        if loose:
            diags.append(
                f"UnboundConclusionVariable: {th.name} concludes with {sorted(loose)} "
                "absent from its premise"
            )
        for pat in th.premise_facts + th.conclusion_facts:
            diags.extend(_check_pattern(kb, th.name, pat))
        for pat in th.premise_equations + th.conclusion_equations:
            diags.extend(_check_equation(kb, th.name, pat))
    return diags


def _check_pattern(kb, owner, pat) -> list:
    if not isinstance(pat, Predicate):
        return [f"BadPattern: {owner} has non-predicate fact pattern {pat!r}"]
    schema = kb.schemas.get(pat.head)
    if schema is None:
        return [f"UnknownPredicate: {owner} uses {pat.head}"]
    diags = []
    if len(pat.args) != schema.arity:
        diags.append(
            f"ArityMismatch: {owner} uses {pat.head} with {len(pat.args)} args, "
            f"declared {schema.arity}"
        )
        return diags
    for kind, arg in zip(schema.arg_kinds, pat.args):
        if kind.startswith("entity"):
            want = int(kind.split(":")[1])
            if not isinstance(arg, Entity) or len(arg.points) != want:
                diags.append(
                    f"ArityMismatch: {owner} passes {arg!r} where {pat.head} "
                    f"expects a {want}-point entity"
                )
    return diags


def _check_equation(kb, owner, pat) -> list:
    if not isinstance(pat, Predicate) or pat.head != "Equal" or len(pat.args) != 2:
        return [f"BadEquation: {owner} has equation pattern {pat!r} (want Equal(lhs,rhs))"]
    diags = []

    def walk(t):
        if isinstance(t, Predicate):
            if t.head in ARITHMETIC_HEADS:
                for a in t.args:
                    walk(a)
            else:
                schema = kb.schemas.get(t.head)
                if schema is None:
                    diags.append(f"UnknownPredicate: {owner} uses {t.head}")
                elif not schema.measure:
                    diags.append(f"BadEquation: {owner} uses non-measure {t.head} in algebra")
                else:
                    diags.extend(_check_pattern(kb, owner, t))

    walk(pat.args[0])
    walk(pat.args[1])
    return diags
