"""Corpus handling and the batch evaluation harness.

Every run is reconstructed from picklable primitives (knowledge-base path,
raw problem record, cell tuple, derived seed), so parallel execution is a
pure partition of the serial work and produces byte-identical records and
reports.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import random
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Dict, List, Optional, Sequence, Tuple

from .knowledge import KnowledgeBase, load_knowledge_base
from .pipeline import PipelineConfig, solve_hybrid, solve_plain, solve_tp
from .predictor import (ListPredictor, ModelPredictor, OraclePredictor,
                        Predictor, SeqModel, matching_degree)
from .problems import ProblemInstance, parse_problem
from .search import SearchLimits


class DuplicateId(Exception):
    pass


class BadRatios(Exception):
    pass


class MissingAnnotation(Exception):
    pass


class EmptyRecords(Exception):
    pass


# -- corpus -------------------------------------------------------------------


def load_corpus(path_or_docs, kb: Optional[KnowledgeBase] = None
                ) -> List[ProblemInstance]:
    if isinstance(path_or_docs, str):
        with open(path_or_docs) as fh:
            docs = json.load(fh)
    else:
        docs = list(path_or_docs)
    seen = set()
    problems = []
    for doc in docs:
        pid = int(doc["problem_id"])
        if pid in seen:
            raise DuplicateId(f"duplicate problem_id {pid}")
        seen.add(pid)
        problems.append(parse_problem(doc, kb))
    return problems


def split_corpus(problems: Sequence, ratios=(0.7, 0.15, 0.15), seed: int = 0):
    """Seeded shuffle, then contiguous slices. Validation and test sizes are
    floored; the remainder goes to train (20 problems -> 14/3/3)."""
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1) > 1e-9:
        raise BadRatios(f"ratios must be three non-negatives summing to 1: {ratios}")
    order = list(problems)
    random.Random(seed).shuffle(order)
    n = len(order)
    n_valid = int(n * ratios[1])
    n_test = int(n * ratios[2])
    n_train = n - n_valid - n_test
    return (order[:n_train], order[n_train:n_train + n_valid],
            order[n_train + n_valid:])


DIFFICULTY_BOUNDS = (2, 4, 6, 8, 10)  # upper bound of l1..l5; above is l6


def difficulty_level(problem: ProblemInstance) -> str:
    """l1..l6 by the length of the first annotated theorem sequence."""
    if not problem.annotated_sequences or not problem.annotated_sequences[0]:
        raise MissingAnnotation(f"problem {problem.id} has no annotated sequence")
    n = len(problem.annotated_sequences[0])
    for i, bound in enumerate(DIFFICULTY_BOUNDS, start=1):
        if n <= bound:
            return f"l{i}"
    return "l6"


# -- experiment ----------------------------------------------------------------


Cell = Tuple[str, str, str]  # (method, strategy, mode)

RECORD_FIELDS = ("problem_id", "method", "strategy", "mode", "status",
                 "steps", "elapsed_ms", "level", "match_degree")


@dataclass
class ExperimentConfig:
    cells: Tuple[Cell, ...] = (("fw", "bfs", "plain"),)
    limits: SearchLimits = field(default_factory=SearchLimits)
    passes: int = 3
    hybrid_split: float = 0.5
    predictor_spec: tuple = ("oracle",)
    master_seed: int = 0
    jobs: int = 1


def derive_seed(master_seed: int, problem_id: int, cell: Cell) -> int:
    tag = f"{master_seed}|{problem_id}|{cell[0]}|{cell[1]}|{cell[2]}"
    return int.from_bytes(hashlib.sha256(tag.encode()).digest()[:8], "big")


def build_predictor(spec: tuple) -> Predictor:
    kind = spec[0]
    if kind == "oracle":
        return OraclePredictor()
    if kind == "list":
        return ListPredictor(spec[1])
    if kind == "model":
        return ModelPredictor(SeqModel.load(spec[1]))
    raise ValueError(f"unknown predictor spec {spec!r}")


def _run_one(args) -> dict:
    (kb_path, doc, cell, limit_args, passes, hybrid_split, predictor_spec,
     seed) = args
    kb = load_knowledge_base(kb_path)
    problem = parse_problem(doc, kb)
    method, strategy, mode = cell
    limits = SearchLimits(**{**limit_args, "rng_seed": seed})
    config = PipelineConfig(method=method, strategy=strategy, limits=limits,
                            passes=passes, hybrid_split=hybrid_split)
    if mode == "plain":
        out = solve_plain(problem, kb, config)
        degree = ""
    else:
        predictor = build_predictor(predictor_spec)
        solver = solve_tp if mode == "tp" else solve_hybrid
        out = solver(problem, kb, predictor, config)
        if problem.annotated_sequences and problem.annotated_sequences[0]:
            d = matching_degree(problem.annotated_sequences[0], out.predicted)
            degree = f"{float(d):.4f}"
        else:
            degree = ""
    return {
        "problem_id": problem.id,
        "method": method,
        "strategy": strategy,
        "mode": mode,
        "status": out.status,
        "steps": out.steps,
        "elapsed_ms": round(out.elapsed * 1000.0, 3),
        "level": difficulty_level(problem),
        "match_degree": degree,
    }


def run_experiment(kb_path: str, docs: Sequence[dict],
                   config: ExperimentConfig) -> List[dict]:
    """Run every (problem, cell) pair; records sorted by (problem_id, cell)."""
    limit_args = {
        "max_depth": config.limits.max_depth,
        "beam_size": config.limits.beam_size,
        "timeout": config.limits.timeout,
    }
    tasks = []
    for doc in docs:
        for cell in config.cells:
            seed = derive_seed(config.master_seed, int(doc["problem_id"]), cell)
            tasks.append((kb_path, doc, cell, limit_args, config.passes,
                          config.hybrid_split, config.predictor_spec, seed))
    if config.jobs > 1:
        import multiprocessing
        with multiprocessing.Pool(config.jobs) as pool:
            records = pool.map(_run_one, tasks)
    else:
        records = [_run_one(t) for t in tasks]
    records.sort(key=lambda r: (r["problem_id"], r["method"], r["strategy"],
                                r["mode"]))
    return records


def records_to_csv(records: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=RECORD_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(r)
    return buf.getvalue()


def records_from_csv(text: str) -> List[dict]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        row["problem_id"] = int(row["problem_id"])
        row["steps"] = int(row["steps"])
        row["elapsed_ms"] = float(row["elapsed_ms"])
        out.append(row)
    return out


# -- report --------------------------------------------------------------------


def _pct(numer: int, denom: int) -> str:
    if denom == 0:
        return "-"
    q = Decimal(numer) * 100 / Decimal(denom)
    return str(q.quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


def _mean(values) -> str:
    values = list(values)
    if not values:
        return "-"
    q = sum(Decimal(str(v)) for v in values) / len(values)
    return str(q.quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


def _table(title: str, headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(str(cell)))
    def fmt(row):
        return "  ".join(str(c).rjust(w) for c, w in zip(row, widths))
    lines = [title, fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines)


def emit_report(records: Sequence[dict]) -> str:
    """Plain-text report: outcome rates, mean time/steps, tp-vs-hybrid
    comparison, per-difficulty appendix, and predictor coverage."""
    if not records:
        raise EmptyRecords("no records to report")
    cells = sorted({(r["method"], r["strategy"], r["mode"]) for r in records})

    def of_cell(cell):
        return [r for r in records
                if (r["method"], r["strategy"], r["mode"]) == cell]

    sections = []

    rows = []
    for cell in cells:
        rs = of_cell(cell)
        n = len(rs)
        rows.append(["/".join(cell),
                     _pct(sum(r["status"] == "solved" for r in rs), n),
                     _pct(sum(r["status"] == "unsolved" for r in rs), n),
                     _pct(sum(r["status"] == "timeout" for r in rs), n)])
    sections.append(_table("Outcome rates (%)",
                           ["cell", "solved", "unsolved", "timeout"], rows))

    rows = []
    for cell in cells:
        rs = of_cell(cell)
        rows.append(["/".join(cell),
                     _mean(r["elapsed_ms"] for r in rs),
                     _mean(r["steps"] for r in rs)])
    sections.append(_table("Mean cost per run",
                           ["cell", "elapsed_ms", "steps"], rows))

    combos = sorted({(r["method"], r["strategy"]) for r in records})
    modes = sorted({r["mode"] for r in records})
    rows = []
    for method, strategy in combos:
        row = [f"{method}/{strategy}"]
        for mode in modes:
            rs = of_cell((method, strategy, mode))
            row.append(_pct(sum(r["status"] == "solved" for r in rs), len(rs))
                       if rs else "-")
        rows.append(row)
    sections.append(_table("Solved (%) by mode",
                           ["method/strategy"] + list(modes), rows))

    levels = sorted({r["level"] for r in records})
    rows = []
    for cell in cells:
        rs = of_cell(cell)
        row = ["/".join(cell)]
        for level in levels:
            lv = [r for r in rs if r["level"] == level]
            row.append(_pct(sum(r["status"] == "solved" for r in lv), len(lv))
                       if lv else "-")
        rows.append(row)
    sections.append(_table("Solved (%) by difficulty",
                           ["cell"] + list(levels), rows))

    rows = []
    for cell in cells:
        if cell[2] == "plain":
            continue
        rs = [r for r in of_cell(cell) if r["match_degree"] != ""]
        if not rs:
            continue
        degrees = [float(r["match_degree"]) for r in rs]
        rows.append(["/".join(cell),
                     _mean(d * 100 for d in degrees),
                     _pct(sum(d == 1.0 for d in degrees), len(degrees))])
    if rows:
        sections.append(_table("Predictor coverage (%)",
                               ["cell", "average", "complete"], rows))

    return "\n\n".join(sections) + "\n"
