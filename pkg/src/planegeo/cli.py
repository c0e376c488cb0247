"""Command-line interface: solve, predict, train, evaluate, report."""

from __future__ import annotations

import argparse
import json
import sys

from .evaluation import (ExperimentConfig, emit_report, load_corpus,
                         records_from_csv, records_to_csv, run_experiment,
                         split_corpus)
from .knowledge import load_knowledge_base
from .pipeline import PipelineConfig, solve_hybrid, solve_plain, solve_tp
from .predictor import (FrequencyPredictor, ModelPredictor, OraclePredictor,
                        SeqModel, evaluate_predictor, train_predictor)

from .search import SearchLimits


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--kb", required=True, help="knowledge base YAML path")
    p.add_argument("--corpus", required=True, help="problem corpus JSON path")
    p.add_argument("--max-depth", type=int, default=15)
    p.add_argument("--beam-size", type=int, default=20)
    p.add_argument("--timeout-secs", type=float, default=600.0)
    p.add_argument("--passes", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="planegeo",
                                  description="plane-geometry theorem solver")
    sub = top.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one problem")
    _add_common(solve)
    solve.add_argument("--problem", type=int, required=True, help="problem id")
    solve.add_argument("--method", choices=("fw", "bw"), default="fw")
    solve.add_argument("--strategy", choices=("bfs", "dfs", "rs", "bs"),
                       default="bfs")
    solve.add_argument("--mode", choices=("plain", "tp", "hybrid"),
                       default="plain")
    solve.add_argument("--predictor", default="oracle",
                       help="oracle | freq | model:<path>")

    predict = sub.add_parser("predict", help="print predicted theorems")
    _add_common(predict)
    predict.add_argument("--problem", type=int, required=True)
    predict.add_argument("--predictor", default="oracle")

    train = sub.add_parser("train", help="fit a sequence model on the corpus")
    _add_common(train)
    train.add_argument("--out", required=True, help="model JSON output path")

    evaluate = sub.add_parser("evaluate", help="run the batch harness")
    _add_common(evaluate)
    evaluate.add_argument("--method", choices=("fw", "bw"), default="fw")
    evaluate.add_argument("--strategy", choices=("bfs", "dfs", "rs", "bs"),
                          default="bfs")
    evaluate.add_argument("--mode", choices=("plain", "tp", "hybrid"),
                          action="append", default=None)
    evaluate.add_argument("--predictor", default="oracle")
    evaluate.add_argument("--jobs", type=int, default=1)
    evaluate.add_argument("--out", required=True, help="records CSV output path")

    report = sub.add_parser("report", help="summarize a records CSV")
    report.add_argument("--records", required=True, help="records CSV path")
    report.add_argument("--out", default=None,
                        help="report output path (default: stdout)")
    return top


def _limits(args) -> SearchLimits:
    return SearchLimits(max_depth=args.max_depth, beam_size=args.beam_size,
                        timeout=args.timeout_secs, rng_seed=args.seed)


def _predictor_spec(name: str, problems, seed: int) -> tuple:
    """Resolve a predictor spec to picklable form (freq bakes in its codes)."""
    if name == "oracle":
        return ("oracle",)
    if name == "freq":
        train, _, _ = split_corpus(problems, seed=seed)
        return ("list", FrequencyPredictor(train).codes)
    if name.startswith("model:"):
        return ("model", name.split(":", 1)[1])
    raise ValueError(f"unknown predictor {name!r}")


def _build_predictor(name: str, problems, seed: int):
    if name == "oracle":
        return OraclePredictor()
    if name == "freq":
        train, _, _ = split_corpus(problems, seed=seed)
        return FrequencyPredictor(train)
    if name.startswith("model:"):
        return ModelPredictor(SeqModel.load(name.split(":", 1)[1]))
    raise ValueError(f"unknown predictor {name!r}")


def _print_config(args, keys):
    parts = [f"{k}={getattr(args, k.replace('-', '_'))}" for k in keys]
    print("config:", " ".join(parts))


def cmd_solve(args) -> int:
    kb = load_knowledge_base(args.kb)
    problems = load_corpus(args.corpus, kb)
    _print_config(args, ["kb", "corpus", "problem", "method", "strategy",
                         "mode", "max_depth", "beam_size", "timeout_secs",
                         "seed"])
    matches = [p for p in problems if p.id == args.problem]
    if not matches:
        print(f"error: no problem with id {args.problem}", file=sys.stderr)
        return 1
    problem = matches[0]
    config = PipelineConfig(method=args.method, strategy=args.strategy,
                            limits=_limits(args), passes=args.passes)
    if args.mode == "plain":
        out = solve_plain(problem, kb, config)
    else:
        predictor = _build_predictor(args.predictor, problems, args.seed)
        solver = solve_tp if args.mode == "tp" else solve_hybrid
        out = solver(problem, kb, predictor, config)
    print(f"status: {out.status}")
    print(f"answer: {out.answer if out.answer is not None else '-'}")
    print("applied:", " ".join(kb.code_to_name(c) for c in out.applied_sequence)
          or "-")
    print(f"steps: {out.steps}")
    print(f"elapsed: {out.elapsed:.6f}")
    return 0 if out.status == "solved" else 1


def cmd_predict(args) -> int:
    kb = load_knowledge_base(args.kb)
    problems = load_corpus(args.corpus, kb)
    _print_config(args, ["kb", "corpus", "problem", "predictor", "seed"])
    matches = [p for p in problems if p.id == args.problem]
    if not matches:
        print(f"error: no problem with id {args.problem}", file=sys.stderr)
        return 1
    predictor = _build_predictor(args.predictor, problems, args.seed)
    codes = predictor.predict(matches[0])
    print("predicted:", " ".join(f"{c}:{kb.code_to_name(c)}" for c in codes)
          or "-")
    return 0


def cmd_train(args) -> int:
    kb = load_knowledge_base(args.kb)
    problems = load_corpus(args.corpus, kb)
    _print_config(args, ["kb", "corpus", "seed", "out"])
    train, valid, test = split_corpus(problems, seed=args.seed)
    model, report = train_predictor(train, valid, kb)
    model.save(args.out)
    score = evaluate_predictor(ModelPredictor(model), test or valid or train)
    print(f"train_nll: {report.train_nll:.6f}")
    print(f"valid_nll: {report.valid_nll:.6f}")
    print(f"lambda: {report.lam}")
    print(f"sequences: train={report.n_train} valid={report.n_valid}")
    print(f"test_matching: average={float(score.average):.4f} "
          f"complete={float(score.complete):.4f}")
    print(f"saved: {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    kb = load_knowledge_base(args.kb)  # validate before running
    problems = load_corpus(args.corpus, kb)
    modes = args.mode or ["plain"]
    _print_config(args, ["kb", "corpus", "method", "strategy", "predictor",
                         "max_depth", "beam_size", "timeout_secs", "seed",
                         "jobs", "out"])
    with open(args.corpus) as fh:
        docs = json.load(fh)
    spec = _predictor_spec(args.predictor, problems, args.seed)
    config = ExperimentConfig(
        cells=tuple((args.method, args.strategy, m) for m in modes),
        limits=_limits(args),
        passes=args.passes,
        predictor_spec=spec,
        master_seed=args.seed,
        jobs=args.jobs,
    )
    records = run_experiment(args.kb, docs, config)
    csv_text = records_to_csv(records)
    with open(args.out, "w") as fh:
        fh.write(csv_text)
    solved = sum(r["status"] == "solved" for r in records)
    print(f"runs: {len(records)} solved: {solved}")
    print(f"saved: {args.out}")
    return 0


def cmd_report(args) -> int:
    with open(args.records) as fh:
        records = records_from_csv(fh.read())
    text = emit_report(records)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"saved: {args.out}")
    else:
        print(text, end="")
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "predict": cmd_predict,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:  # component failures -> exit 1 with a message
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
