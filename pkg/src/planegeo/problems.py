"""Problem records: the annotated-problem file format and its ingestion."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .knowledge import KnowledgeBase
from .terms import Predicate, Term, parse_term


class ProblemSchemaError(Exception):
    pass


@dataclass
class ProblemInstance:
    id: int
    description: str
    construction_cdl: List[Term]
    condition_cdl: List[Term]
    goal_cdl: Term
    annotated_sequences: List[tuple] = field(default_factory=list)  # theorem codes or names
    answer: Optional[str] = None  # hand-verified expected answer, when recorded

    @property
    def goal_kind(self) -> str:
        if isinstance(self.goal_cdl, Predicate) and self.goal_cdl.head == "Value":
            return "value"
        return "relation"


REQUIRED_FIELDS = ("problem_id", "description", "construction_cdl", "text_cdl",
                   "goal_cdl", "theorem_seqs")


def parse_problem(doc: dict, kb: Optional[KnowledgeBase] = None) -> ProblemInstance:
    """Parse one structured problem record.

    Annotated sequences are resolved to theorem codes when a knowledge base
    is supplied, otherwise kept as names.
    """
    for f in REQUIRED_FIELDS:
        if f not in doc:
            raise ProblemSchemaError(f"problem record missing field {f!r}")
    sequences: List[tuple] = []
    for seq in doc["theorem_seqs"]:
        if kb is not None:
            resolved: Tuple = tuple(kb.name_to_code(name) for name in seq)
        else:
            resolved = tuple(seq)
        sequences.append(resolved)
    return ProblemInstance(
        id=int(doc["problem_id"]),
        description=str(doc["description"]),
        construction_cdl=[parse_term(s) for s in doc["construction_cdl"]],
        condition_cdl=[parse_term(s) for s in doc["text_cdl"]],
        goal_cdl=parse_term(doc["goal_cdl"]),
        annotated_sequences=sequences,
        answer=doc.get("answer"),
    )
