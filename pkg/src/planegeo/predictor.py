"""Theorem-sequence prediction.

A trained model scores theorem sequences with an interpolated bigram /
goal-bucket-unigram distribution and decodes the top-k sequences by beam
search. The predicted sequences are merged into a single pruning set for
the search engine. Probabilities are exact fractions so rankings (and the
decoded sequences) are fully deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import log
from typing import Dict, List, Sequence, Tuple

from .knowledge import KnowledgeBase
from .problems import ProblemInstance

START = -1  # sentinel preceding every sequence
EOS = 0  # end-of-sequence token (theorem codes start at 1)

FORMAT_VERSION = 1


class EmptyTrainingSet(Exception):
    pass


class EmptyAnnotation(Exception):
    pass


def goal_bucket(problem: ProblemInstance) -> str:
    """Conditioning bucket: goal kind plus goal head, e.g. 'Value:LengthOfLine'."""
    goal = problem.goal_cdl
    kind = problem.goal_kind.capitalize()
    if kind == "Relation":
        head = getattr(goal, "head", "") or ""
    else:
        inner = goal.args[0] if getattr(goal, "args", None) else None
        head = getattr(inner, "head", "") or ""
    return f"{kind}:{head}"


@dataclass
class SeqModel:
    """Interpolated bigram model over theorem codes, conditioned on goal bucket.

    P(y_n | y_{n-1}, bucket) =
        lam * P_bigram(y_n | y_{n-1}) + (1 - lam) * P_unigram(y_n | bucket),
    both components add-alpha smoothed over the vocabulary {1..n_theorems, EOS}.
    """

    n_theorems: int
    alpha: Fraction = Fraction(1, 10)
    lam: Fraction = Fraction(1, 2)
    bigram: Dict[int, Dict[int, int]] = field(default_factory=dict)
    bigram_totals: Dict[int, int] = field(default_factory=dict)
    unigram: Dict[str, Dict[int, int]] = field(default_factory=dict)
    unigram_totals: Dict[str, int] = field(default_factory=dict)

    @property
    def vocab(self) -> Tuple[int, ...]:
        return tuple(range(1, self.n_theorems + 1)) + (EOS,)

    def observe(self, bucket: str, sequence: Sequence[int]):
        prev = START
        for code in tuple(sequence) + (EOS,):
            self.bigram.setdefault(prev, {})
            self.bigram[prev][code] = self.bigram[prev].get(code, 0) + 1
            self.bigram_totals[prev] = self.bigram_totals.get(prev, 0) + 1
            self.unigram.setdefault(bucket, {})
            self.unigram[bucket][code] = self.unigram[bucket].get(code, 0) + 1
            self.unigram_totals[bucket] = self.unigram_totals.get(bucket, 0) + 1
            prev = code

    def prob(self, code: int, prev: int, bucket: str) -> Fraction:
        v = len(self.vocab)
        big_n = self.bigram.get(prev, {}).get(code, 0)
        big_d = self.bigram_totals.get(prev, 0)
        p_big = (big_n + self.alpha) / (big_d + self.alpha * v)
        uni_n = self.unigram.get(bucket, {}).get(code, 0)
        uni_d = self.unigram_totals.get(bucket, 0)
        p_uni = (uni_n + self.alpha) / (uni_d + self.alpha * v)
        return self.lam * p_big + (1 - self.lam) * p_uni

    def sequence_nll(self, bucket: str, sequence: Sequence[int]) -> float:
        """Negative log-likelihood of one annotated sequence (with EOS)."""
        prev = START
        total = 0.0
        for code in tuple(sequence) + (EOS,):
            total -= log(self.prob(code, prev, bucket))
            prev = code
        return total

    def to_dict(self) -> dict:
        def enc(d):
            return {str(k): {str(c): n for c, n in v.items()} for k, v in d.items()}

        return {
            "format_version": FORMAT_VERSION,
            "n_theorems": self.n_theorems,
            "alpha": [self.alpha.numerator, self.alpha.denominator],
            "lam": [self.lam.numerator, self.lam.denominator],
            "bigram": enc(self.bigram),
            "bigram_totals": {str(k): v for k, v in self.bigram_totals.items()},
            "unigram": enc(self.unigram),
            "unigram_totals": dict(self.unigram_totals),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SeqModel":
        if doc.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format: {doc.get('format_version')}")
        model = cls(
            n_theorems=doc["n_theorems"],
            alpha=Fraction(*doc["alpha"]),
            lam=Fraction(*doc["lam"]),
        )
        model.bigram = {int(k): {int(c): n for c, n in v.items()}
                        for k, v in doc["bigram"].items()}
        model.bigram_totals = {int(k): v for k, v in doc["bigram_totals"].items()}
        model.unigram = {k: {int(c): n for c, n in v.items()}
                         for k, v in doc["unigram"].items()}
        model.unigram_totals = dict(doc["unigram_totals"])
        return model

    def save(self, path: str):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path: str) -> "SeqModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


LAMBDA_GRID = tuple(Fraction(i, 10) for i in range(1, 10))


@dataclass
class TrainReport:
    train_nll: float
    valid_nll: float
    lam: Fraction
    n_train: int
    n_valid: int


def _examples(problems: Sequence[ProblemInstance]):
    out = []
    for p in problems:
        bucket = goal_bucket(p)
        for seq in p.annotated_sequences:
            if seq:
                out.append((bucket, tuple(seq)))
    return out


def mean_nll(model: SeqModel, problems: Sequence[ProblemInstance]) -> float:
    ex = _examples(problems)
    if not ex:
        raise EmptyTrainingSet("no annotated sequences to score")
    return sum(model.sequence_nll(b, s) for b, s in ex) / len(ex)


def train_predictor(train: Sequence[ProblemInstance],
                    valid: Sequence[ProblemInstance],
                    kb: KnowledgeBase,
                    alpha: Fraction = Fraction(1, 10)) -> Tuple[SeqModel, TrainReport]:
    """Fit counts on `train`; pick the interpolation weight on `valid`."""
    train_ex = _examples(train)
    if not train_ex:
        raise EmptyTrainingSet("training set has no annotated sequences")
    model = SeqModel(n_theorems=len(kb.theorems), alpha=alpha)
    for bucket, seq in train_ex:
        model.observe(bucket, seq)

    score_set = valid if _examples(valid) else train
    best = None
    for lam in LAMBDA_GRID:
        model.lam = lam
        nll = mean_nll(model, score_set)
        if best is None or nll < best[0]:
            best = (nll, lam)
    model.lam = best[1]
    report = TrainReport(
        train_nll=mean_nll(model, train),
        valid_nll=best[0],
        lam=best[1],
        n_train=len(train_ex),
        n_valid=len(_examples(valid)),
    )
    return model, report


def beam_decode(model: SeqModel, bucket: str, k: int = 5,
                max_len: int = 20) -> List[Tuple[int, ...]]:
    """Top-k sequences by beam search; exact-probability ranking.

    Ties break lexicographically on the code sequence. Always returns
    exactly k sequences (unterminated beams are emitted as-is if fewer
    than k finish within max_len).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    beams: List[Tuple[Fraction, Tuple[int, ...]]] = [(Fraction(1), ())]
    finished: List[Tuple[Fraction, Tuple[int, ...]]] = []
    while beams:
        candidates = []
        for prob, seq in beams:
            prev = seq[-1] if seq else START
            finished.append((prob * model.prob(EOS, prev, bucket), seq))
            if len(seq) < max_len:
                for code in model.vocab[:-1]:
                    candidates.append((prob * model.prob(code, prev, bucket),
                                       seq + (code,)))
        candidates.sort(key=lambda t: (-t[0], t[1]))
        beams = candidates[:k]
        finished.sort(key=lambda t: (-t[0], t[1]))
        finished = finished[:k]
        if len(finished) == k and beams and finished[-1][0] >= beams[0][0]:
            break  # no live beam can outrank the current top-k
    out = [seq for _, seq in finished]
    for _, seq in beams:
        if len(out) >= k:
            break
        out.append(seq)
    while len(out) < k:
        out.append(())
    return out[:k]


def union_sequences(sequences: Sequence[Sequence[int]]) -> Tuple[int, ...]:
    """Rank-order concatenation, keeping the first occurrence of each code."""
    seen = set()
    out = []
    for seq in sequences:
        for code in seq:
            if code not in seen:
                seen.add(code)
                out.append(code)
    return tuple(out)


def matching_degree(annotated: Sequence[int], predicted: Sequence[int]) -> Fraction:
    """Fraction of annotated positions whose theorem appears in the prediction."""
    if not annotated:
        raise EmptyAnnotation("annotated sequence is empty")
    pred = set(predicted)
    hit = sum(1 for code in annotated if code in pred)
    return Fraction(hit, len(annotated))


# -- predictor interface ------------------------------------------------------


class Predictor:
    """Maps a problem to an ordered set of theorem codes for search pruning."""

    name = "base"

    def predict(self, problem: ProblemInstance) -> Tuple[int, ...]:
        raise NotImplementedError


class OraclePredictor(Predictor):
    """Returns the union of the problem's own annotated sequences."""

    name = "oracle"

    def predict(self, problem: ProblemInstance) -> Tuple[int, ...]:
        return union_sequences(problem.annotated_sequences)


class FrequencyPredictor(Predictor):
    """Baseline: the globally most frequent codes, as many as the mean
    training sequence length (rounded)."""

    name = "freq"

    def __init__(self, train: Sequence[ProblemInstance]):
        counts: Dict[int, int] = {}
        lengths = []
        for p in train:
            for seq in p.annotated_sequences:
                if not seq:
                    continue
                lengths.append(len(seq))
                for code in seq:
                    counts[code] = counts.get(code, 0) + 1
        if not lengths:
            raise EmptyTrainingSet("no annotated sequences in training set")
        m = max(1, round(sum(lengths) / len(lengths)))
        ranked = sorted(counts, key=lambda c: (-counts[c], c))
        self.codes = tuple(ranked[:m])

    def predict(self, problem: ProblemInstance) -> Tuple[int, ...]:
        return self.codes


class ListPredictor(Predictor):
    """Fixed prediction regardless of the problem (testing stub)."""

    name = "list"

    def __init__(self, codes: Sequence[int]):
        self.codes = tuple(codes)

    def predict(self, problem: ProblemInstance) -> Tuple[int, ...]:
        return self.codes


class ModelPredictor(Predictor):
    name = "model"

    def __init__(self, model: SeqModel, k: int = 5, max_len: int = 20):
        self.model = model
        self.k = k
        self.max_len = max_len

    def predict(self, problem: ProblemInstance) -> Tuple[int, ...]:
        seqs = beam_decode(self.model, goal_bucket(problem), self.k, self.max_len)
        return union_sequences(seqs)


@dataclass
class PredictorScore:
    average: Fraction  # mean matching degree
    complete: Fraction  # share of problems fully covered


def evaluate_predictor(predictor: Predictor,
                       problems: Sequence[ProblemInstance]) -> PredictorScore:
    degrees = []
    complete = 0
    for p in problems:
        if not p.annotated_sequences or not p.annotated_sequences[0]:
            raise EmptyAnnotation(f"problem {p.id} has no annotated sequence")
        predicted = predictor.predict(p)
        d = matching_degree(p.annotated_sequences[0], predicted)
        degrees.append(d)
        if d == 1:
            complete += 1
    if not degrees:
        raise EmptyAnnotation("no problems to evaluate")
    return PredictorScore(
        average=sum(degrees, Fraction(0)) / len(degrees),
        complete=Fraction(complete, len(degrees)),
    )
