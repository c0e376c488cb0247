import copy

import pytest
import yaml

from planegeo.knowledge import UnknownTheorem, load_knowledge_base, validate
from tests.conftest import KB_PATH


def test_codes_start_at_one_in_declaration_order(kb):
    assert [t.code for t in kb.theorems] == list(range(1, len(kb.theorems) + 1))
    assert kb.theorems[0].name == "perpendicular_right_angle"
    assert kb.name_to_code("pythagorean") == 2


def test_code_name_round_trip(kb):
    for th in kb.theorems:
        assert kb.code_to_name(kb.name_to_code(th.name)) == th.name
        assert kb.theorem_by_code(th.code) is th


def test_unknown_theorem_raises(kb):
    with pytest.raises(UnknownTheorem):
        kb.name_to_code("no_such_theorem")
    with pytest.raises(UnknownTheorem):
        kb.theorem_by_code(0)


def test_symmetry_closure_is_a_group(kb):
    for schema in kb.schemas.values():
        perms = set(schema.symmetry)
        if not perms:
            continue
        n = len(next(iter(perms)))
        assert tuple(range(n)) in perms  # identity
        for p in perms:
            for q in perms:
                assert tuple(p[i] for i in q) in perms  # composition closed


def test_mutation_yields_exactly_one_arity_diagnostic():
    with open(KB_PATH) as fh:
        doc = yaml.safe_load(fh)
    broken = copy.deepcopy(doc)
    # corrupt one premise: Collinear takes three points, give it two
    for th in broken["theorems"]:
        if th["name"] == "segment_addition":
            th["premise"]["facts"] = ["Collinear(ab)"]
    with pytest.raises(Exception) as exc_info:
        load_knowledge_base(broken)
    assert str(exc_info.value).count("ArityMismatch") == 1


def test_conclusion_variables_must_be_bound():
    from planegeo.knowledge import UnboundConclusionVariable
    doc = {
        "predicates": [{"name": "Line", "args": ["entity:2"]}],
        "theorems": [{
            "name": "bad",
            "premise": {"facts": ["Line(ab)"]},
            "conclusions": {"facts": ["Line(cd)"]},
        }],
    }
    with pytest.raises(UnboundConclusionVariable):
        load_knowledge_base(doc)


def test_clean_kb_has_no_diagnostics(kb):
    assert validate(kb) == []
