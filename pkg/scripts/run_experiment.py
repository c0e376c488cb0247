#!/usr/bin/env python3
"""End-to-end experiment: train the sequence predictor, then compare plain,
predictor-guided (tp), and hybrid solving across both search methods.

Writes the trained model, the per-run records CSV, and a plain-text report
into --outdir. The whole run is deterministic for a fixed --seed.
"""

import argparse
import importlib.resources as resources
import json
import os

from planegeo.evaluation import (ExperimentConfig, emit_report, load_corpus,
                                 records_to_csv, run_experiment, split_corpus)
from planegeo.knowledge import load_knowledge_base
from planegeo.predictor import ModelPredictor, evaluate_predictor, train_predictor
from planegeo.search import SearchLimits

DEFAULT_KB = str(resources.files("planegeo") / "data" / "mini_kb.yaml")
DEFAULT_CORPUS = str(resources.files("planegeo") / "data" / "mini_corpus.json")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kb", default=DEFAULT_KB)
    ap.add_argument("--corpus", default=DEFAULT_CORPUS)
    ap.add_argument("--outdir", default="experiment_out")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--timeout-secs", type=float, default=600.0)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    kb = load_knowledge_base(args.kb)
    problems = load_corpus(args.corpus, kb)
    train, valid, test = split_corpus(problems, seed=args.seed)
    print(f"corpus: {len(problems)} problems -> "
          f"{len(train)}/{len(valid)}/{len(test)} train/valid/test")

    model, fit = train_predictor(train, valid, kb)
    model_path = os.path.join(args.outdir, "model.json")
    model.save(model_path)
    score = evaluate_predictor(ModelPredictor(model), test)
    print(f"model: lambda={fit.lam} train_nll={fit.train_nll:.4f} "
          f"valid_nll={fit.valid_nll:.4f}")
    print(f"test matching degree: average={float(score.average):.4f} "
          f"complete={float(score.complete):.4f}")

    with open(args.corpus) as fh:
        docs = json.load(fh)
    cells = tuple((method, "bfs", mode)
                  for method in ("fw", "bw")
                  for mode in ("plain", "tp", "hybrid"))
    config = ExperimentConfig(
        cells=cells,
        limits=SearchLimits(timeout=args.timeout_secs),
        predictor_spec=("model", model_path),
        master_seed=args.seed,
        jobs=args.jobs,
    )
    records = run_experiment(args.kb, docs, config)
    csv_path = os.path.join(args.outdir, "records.csv")
    with open(csv_path, "w") as fh:
        fh.write(records_to_csv(records))
    report_path = os.path.join(args.outdir, "report.txt")
    report = emit_report(records)
    with open(report_path, "w") as fh:
        fh.write(report)
    print(f"wrote {model_path}, {csv_path}, {report_path}\n")
    print(report, end="")


if __name__ == "__main__":
    main()
