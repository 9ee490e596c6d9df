"""Per-task simulation and evaluation, shared by the CLI and the test suite."""

from __future__ import annotations

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from . import agents as ag
from .agents import Paper5Q, ReviewRecord
from .agents.prompts import TEMPLATE_VERSION
from .bench_io import (
    TARGET,
    PaperTask,
    ResultRecord,
    ReviewTask,
    paper_task_graph,
    review_task_graph,
)
from .engine import StageConfig, Trace, match_reviewers, run_simulation, stage_paper_reading
from .engine.stages import StageError
from .evaluation import aggregate_report, evaluate_review, judge_fine_grained, paper_similarity
from .gateway import GatewayError, hash_hex

logger = logging.getLogger(__name__)

Clock = Callable[[], str]


def wall_clock() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def frozen_clock() -> str:
    return "1970-01-01T00:00:00+00:00"


def _digest(trace) -> str:
    return hash_hex([[e.stage, e.node, e.prompt_hash, e.reply_hash] for e in trace])


def _failed(task_id: str, kind: str, mode: str, exc: Exception, started: str, clock: Clock, difficulty=None) -> ResultRecord:
    logger.error("task %s failed: %s", task_id, exc)
    return ResultRecord(
        task_id=task_id, kind=kind, mode=mode, status="failed", difficulty=difficulty,
        error=f"{type(exc).__name__}: {exc}", started=started, finished=clock(),
    )


def simulate_paper_task(task: PaperTask, config: StageConfig, gateway, clock: Clock = wall_clock) -> ResultRecord:
    started = clock()
    mode = config.mode.value
    try:
        out = run_simulation(paper_task_graph(task), TARGET, config, gateway)
    except (StageError, GatewayError, ValueError) as exc:
        return _failed(task.task_id, "paper", mode, exc, started, clock, task.difficulty)
    extra = {"agent-failures": dict(sorted(out.failures.items()))} if out.failures else {}
    return ResultRecord(
        task_id=task.task_id, kind="paper", mode=mode,
        generated={"paper": list(out.paper.answers)},
        difficulty=task.difficulty, trace_digest=_digest(out.trace), calls=len(out.trace),
        started=started, finished=clock(), extra=extra,
    )


def _choose_reviewers(task: ReviewTask, k: int, gateway, trace: Trace):
    """Read every candidate, then keep the ``k`` whose profiles best match the abstract."""
    graph = review_task_graph(task)
    graph = stage_paper_reading(graph, TARGET, gateway, trace=trace)
    ids = sorted(graph.agents)
    excluded = {a for a in ids if graph.agents[a].name in set(task.authors)}
    pool = [(a, graph.agents[a].profile) for a in ids if graph.agents[a].profile]
    eligible = [a for a, _ in pool if a not in excluded]
    if not eligible:
        raise StageError("review", "no eligible reviewers after exclusions", TARGET)
    chosen = match_reviewers(task.abstract or task.full_paper, pool, min(k, len(eligible)), excluded, gateway)
    keep = sorted(ids.index(a) for a in chosen)
    sub = review_task_graph(task, keep)
    for a in sub.agents:
        sub = sub.set_profile(a, graph.agents[a].profile)
    return sub


def simulate_review_task(
    task: ReviewTask, config: StageConfig, gateway, reviewers: int = 5, clock: Clock = wall_clock
) -> ResultRecord:
    started = clock()
    mode = config.mode.value
    pre = Trace()
    try:
        if config.mode.uses_agents and len(task.reviewers) > reviewers:
            graph = _choose_reviewers(task, reviewers, gateway, pre)
        else:
            graph = review_task_graph(task)
        out = run_simulation(graph, TARGET, config, gateway, ground_truth_paper=task.full_paper, write=False)
    except (StageError, GatewayError, ValueError) as exc:
        return _failed(task.task_id, "review", mode, exc, started, clock)
    trace = list(pre.entries) + list(out.trace)
    failures = {**pre.failures, **out.failures}
    r = out.review
    return ResultRecord(
        task_id=task.task_id, kind="review", mode=mode,
        generated={"strengths": list(r.strengths), "weaknesses": list(r.weaknesses), "score": r.score},
        trace_digest=_digest(trace), calls=len(trace), started=started, finished=clock(),
        extra={"agent-failures": dict(sorted(failures.items()))} if failures else {},
    )


class ReferenceCache:
    """Transformed references keyed by content hash; on disk when ``root`` is set."""

    def __init__(self, root: str | Path | None, model: str = ""):
        self.root = Path(root) if root else None
        self.model = model
        self._mem: dict[str, object] = {}

    def _key(self, kind: str, text: str) -> str:
        return hash_hex([kind, TEMPLATE_VERSION, self.model, text])

    def get_or_make(self, kind: str, text: str, make: Callable[[], object]):
        key = self._key(kind, text)
        if key in self._mem:
            return self._mem[key]
        path = self.root / f"{key}.json" if self.root else None
        if path is not None and path.exists():
            value = json.loads(path.read_text(encoding="utf-8"))
        else:
            value = make()
            if path is not None:
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(json.dumps(value, ensure_ascii=False), encoding="utf-8")
        self._mem[key] = value
        return value


def reference_5q(task: PaperTask, gateway, cache: ReferenceCache) -> Paper5Q | None:
    if task.reference_5q:
        return Paper5Q(tuple(task.reference_5q))
    if not task.reference_introduction:
        return None
    answers = cache.get_or_make(
        "paper-5q", task.reference_introduction,
        lambda: list(ag.transform_reference_paper(task.reference_introduction, gateway).answers),
    )
    return Paper5Q(tuple(answers))


def reference_bullets(task: ReviewTask, kind: str, gateway, cache: ReferenceCache) -> list[str]:
    """All reference reviews' bullets for one side, concatenated in review order."""
    out: list[str] = []
    for r in task.reference_reviews:
        text = r.strength if kind == "strength" else r.weakness
        if text.strip():
            out.extend(cache.get_or_make(
                f"review-{kind}", text,
                lambda text=text: ag.transform_reference_review(text, gateway, kind),
            ))
    return out


def evaluate_record(
    rec: ResultRecord,
    tasks: dict[str, PaperTask | ReviewTask],
    gateway,
    cache: ReferenceCache,
    judge: bool = False,
) -> ResultRecord:
    base = ResultRecord(**{k: getattr(rec, k) for k in ResultRecord._KEYS}, extra=dict(rec.extra))
    base.metrics = None
    task = tasks.get(rec.task_id)
    if rec.status == "failed" or rec.generated is None:
        base.status = "failed"
        return base
    if task is None:
        base.status = "unevaluated"
        base.error = "no task with this id"
        return base
    try:
        if rec.kind == "paper":
            base.difficulty = getattr(task, "difficulty", None)
            ref = reference_5q(task, gateway, cache)
            if ref is None:
                base.status = "unevaluated"
                base.error = "no reference paper"
                return base
            gen = Paper5Q(tuple(rec.generated["paper"]))
            base.metrics = paper_similarity(gen, ref, gateway).as_metrics()
            if judge:
                base.extra["judge"] = dict(judge_fine_grained(ref, gen, gateway).scores)
        else:
            gen = ReviewRecord(
                tuple(rec.generated["strengths"]), tuple(rec.generated["weaknesses"]), int(rec.generated["score"])
            )
            ref_s = reference_bullets(task, "strength", gateway, cache)
            ref_w = reference_bullets(task, "weakness", gateway, cache)
            if not ref_s or not ref_w:
                base.status = "unevaluated"
                base.error = "reference review has no strength or weakness text"
                return base
            base.metrics = evaluate_review(gen, ref_s, ref_w, task.reference_score, gateway).as_metrics()
    except (GatewayError, ValueError) as exc:
        base.status = "unevaluated"
        base.error = f"{type(exc).__name__}: {exc}"
        return base
    base.status = "ok"
    return base


def report_rows(records: Sequence[ResultRecord], kind: str) -> list[dict]:
    return [
        {"task_id": r.task_id, "mode": r.mode, "difficulty": r.difficulty, "metrics": r.metrics}
        for r in records
        if r.kind == kind and r.metrics
    ]


def build_report(records: Sequence[ResultRecord]):
    """(kind, summaries) for each result kind that has evaluated rows."""
    out = []
    for kind, group_by in (("paper", ("mode", "difficulty")), ("review", ("mode",))):
        rows = report_rows(records, kind)
        if rows:
            out.append((kind, aggregate_report(rows, group_by)))
    return out
