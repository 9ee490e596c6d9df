"""Masked-node-prediction metrics.

Generated and reference papers are compared answer-by-answer in the
five-question format; reviews are compared bullet-by-bullet with a
recall-oriented max-match, and scores by absolute difference.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .agents import JUDGE_FIELDS, Paper5Q, ReviewRecord, judge_proposals


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class PaperSimilarity:
    per_question: tuple[float, ...]
    overall: float

    def as_metrics(self) -> dict[str, float]:
        out = {f"q{i}": v for i, v in enumerate(self.per_question, 1)}
        out["overall"] = self.overall
        return out


@dataclass(frozen=True)
class ReviewSimilarity:
    strength: float
    weakness: float
    delta_score: float

    def as_metrics(self) -> dict[str, float]:
        return {"strength": self.strength, "weakness": self.weakness, "delta_score": self.delta_score}


@dataclass(frozen=True)
class JudgeScores:
    scores: Mapping[str, int]

    def __post_init__(self) -> None:
        missing = set(JUDGE_FIELDS) - set(self.scores)
        if missing:
            raise MetricError(f"judge scores missing {sorted(missing)}")
        for k, v in self.scores.items():
            if not 0 <= v <= 10:
                raise MetricError(f"judge score {k!r}={v} outside 0..10")

    def __getitem__(self, key: str) -> int:
        return self.scores[key]


def _values(v) -> np.ndarray:
    return np.asarray(getattr(v, "values", v), dtype=float)


def cosine(u, v) -> float:
    a, b = _values(u), _values(v)
    if a.shape != b.shape:
        raise MetricError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise MetricError("cosine of a zero vector is undefined")
    return float(np.dot(a, b) / (na * nb))


def cosine_matrix(rows: Sequence, cols: Sequence) -> np.ndarray:
    """Pairwise cosine, ``out[i, j] = cosine(rows[i], cols[j])``."""
    a = np.vstack([_values(r) for r in rows])
    b = np.vstack([_values(c) for c in cols])
    if a.shape[1] != b.shape[1]:
        raise MetricError(f"length mismatch: {a.shape[1]} vs {b.shape[1]}")
    na = np.linalg.norm(a, axis=1, keepdims=True)
    nb = np.linalg.norm(b, axis=1, keepdims=True)
    if (na == 0).any() or (nb == 0).any():
        raise MetricError("cosine of a zero vector is undefined")
    a, b = a / na, b / nb
    # Entry by entry, so a value never depends on which other rows are present.
    return np.array([[float(np.dot(x, y)) for y in b] for x in a]).reshape(len(a), len(b))


def mean_aligned(sims: Sequence[float]) -> float:
    return math.fsum(sims) / len(sims)


def recall_similarity(sim: np.ndarray) -> float:
    """Mean over reference columns of the best-matching generated row."""
    sim = np.asarray(sim, dtype=float)
    if sim.ndim != 2 or 0 in sim.shape:
        raise MetricError("similarity matrix must be non-empty 2-D (generated x reference)")
    return math.fsum(sim.max(axis=0)) / sim.shape[1]


def paper_similarity(generated: Paper5Q, reference: Paper5Q, gateway) -> PaperSimilarity:
    vecs = gateway.embed(list(generated.answers) + list(reference.answers))
    per_q = tuple(cosine(vecs[i], vecs[i + 5]) for i in range(5))
    return PaperSimilarity(per_q, mean_aligned(per_q))


def review_similarity(generated: Sequence[str], reference: Sequence[str], gateway) -> float:
    if not generated or not reference:
        raise MetricError("review_similarity needs non-empty generated and reference bullet lists")
    vecs = gateway.embed(list(generated) + list(reference))
    gen, ref = vecs[: len(generated)], vecs[len(generated) :]
    return recall_similarity(cosine_matrix(gen, ref))


def score_delta(generated: int, reference: float) -> float:
    if isinstance(generated, bool) or int(generated) != generated or not 1 <= generated <= 10:
        raise MetricError(f"generated score {generated!r} must be an integer in 1..10")
    if not 1 <= reference <= 10:
        raise MetricError(f"reference score {reference!r} must lie in [1, 10]")
    return abs(generated - reference)


def evaluate_review(
    generated: ReviewRecord,
    ref_strengths: Sequence[str],
    ref_weaknesses: Sequence[str],
    ref_score: float,
    gateway,
) -> ReviewSimilarity:
    return ReviewSimilarity(
        review_similarity(generated.strengths, ref_strengths, gateway),
        review_similarity(generated.weaknesses, ref_weaknesses, gateway),
        score_delta(generated.score, ref_score),
    )


def judge_fine_grained(reference: Paper5Q, generated: Paper5Q, gateway) -> JudgeScores:
    return JudgeScores(judge_proposals(reference, generated, gateway))


# -- reporting ---------------------------------------------------------------

METRIC_ORDER = ("q1", "q2", "q3", "q4", "q5", "overall", "strength", "weakness", "delta_score")
_LEVEL_ORDER = {"easy": 0, "medium": 1, "hard": 2, "self": 0, "agent": 1, "data": 2, "global": 3}


@dataclass(frozen=True)
class GroupSummary:
    group: tuple[tuple[str, str], ...]
    count: int
    means: Mapping[str, float]

    @property
    def label(self) -> str:
        return ", ".join(f"{k}={v}" for k, v in self.group) or "all"

    def to_dict(self) -> dict:
        return {"group": dict(self.group), "count": self.count, "means": dict(self.means)}


def _metric_keys(keys: Iterable[str]) -> list[str]:
    keys = set(keys)
    return [k for k in METRIC_ORDER if k in keys] + sorted(keys - set(METRIC_ORDER))


def _group_sort_key(group):
    return tuple((k, _LEVEL_ORDER.get(v, 99), v) for k, v in group)


def _summarise(group, rows) -> GroupSummary:
    sums: dict[str, list[float]] = defaultdict(list)
    for r in rows:
        for k, v in r["metrics"].items():
            sums[k].append(float(v))
    means = {k: math.fsum(sums[k]) / len(sums[k]) for k in _metric_keys(sums)}
    return GroupSummary(group, len(rows), means)


def aggregate_report(results: Sequence[Mapping], group_by: Sequence[str] = ("mode", "difficulty")) -> list[GroupSummary]:
    """Per-group metric means plus an overall row (first), deterministically ordered.

    Each result is a mapping with a ``metrics`` dict and the ``group_by`` keys;
    a missing group key is reported as ``"-"``. Results without metrics are
    skipped.
    """
    rows = [r for r in results if r.get("metrics")]
    if not rows:
        raise MetricError("aggregate_report needs at least one evaluated result")
    rows.sort(key=lambda r: str(r.get("task_id", "")))
    out = [_summarise((), rows)]
    if group_by:
        buckets: dict[tuple, list] = defaultdict(list)
        for r in rows:
            key = tuple((g, str(r.get(g) or "-")) for g in group_by)
            buckets[key].append(r)
        for key in sorted(buckets, key=_group_sort_key):
            out.append(_summarise(key, buckets[key]))
    return out


def format_report(summaries: Sequence[GroupSummary], title: str = "") -> str:
    keys = _metric_keys(k for s in summaries for k in s.means)
    width = max([len("group")] + [len(s.label) for s in summaries])
    lines = [title] if title else []
    lines.append(f"{'group':<{width}}  {'n':>5}  " + "  ".join(f"{k:>11}" for k in keys))
    for s in summaries:
        cells = "  ".join(f"{s.means[k]:>11.4f}" if k in s.means else f"{'-':>11}" for k in keys)
        lines.append(f"{s.label:<{width}}  {s.count:>5}  {cells}")
    return "\n".join(lines) + "\n"
