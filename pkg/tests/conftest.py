import importlib.resources as resources
import string

import pytest

from planegeo.evaluation import load_corpus
from planegeo.knowledge import load_knowledge_base
from planegeo.problems import parse_problem

KB_PATH = str(resources.files("planegeo") / "data" / "mini_kb.yaml")
CORPUS_PATH = str(resources.files("planegeo") / "data" / "mini_corpus.json")


@pytest.fixture(scope="session")
def kb():
    return load_knowledge_base(KB_PATH)


@pytest.fixture(scope="session")
def problems(kb):
    return load_corpus(CORPUS_PATH, kb)


def make_adversarial(kb, n_midpoints=8):
    """A right triangle solvable in two steps, plus a fan of segments sharing
    midpoint O. Executing midpoint_bisects and then vertical_angles floods the
    equation store, making predictor-guided runs far more expensive than a
    plain search that reaches the goal via the first two theorem codes."""
    letters = [c for c in string.ascii_uppercase if c not in "OPQR"]
    cons = ["Polygon(PQR)", "Perpendicular(PQ,QR)"]
    for i in range(n_midpoints):
        cons.append(f"Midpoint(O,{letters[2 * i]}{letters[2 * i + 1]})")
    return parse_problem({
        "problem_id": 999,
        "description": "right triangle beside a fan of midpoints through O",
        "construction_cdl": cons,
        "text_cdl": ["Equal(LengthOfLine(PQ),3)", "Equal(LengthOfLine(QR),4)"],
        "goal_cdl": "Value(LengthOfLine(PR))",
        "theorem_seqs": [["perpendicular_right_angle", "pythagorean"]],
        "answer": "5",
    }, kb)


# the flood prediction: bisect every midpoint, then churn vertical angles
FLOOD_CODES = (5, 8, 4, 9, 3)
