"""Line-delimited JSON task and result files, and difficulty partitioning.

On disk every key is kebab-case. Keys a reader does not know are carried
through untouched in ``extra`` so a load/save cycle never loses data.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

from .graph import AgentNode, CommunityGraph, DataNode, Edge, EdgeKind, PaperKind

SECTION_LABELS = ("related-work", "introduction", "other")
DIFFICULTIES = ("easy", "medium", "hard")


class BenchIOError(ValueError):
    pass


class SchemaError(BenchIOError):
    def __init__(self, line: int, field: str, message: str = ""):
        self.line = line
        self.field = field
        super().__init__(f"line {line}: field {field!r}: {message or 'invalid'}")


def normalize_section(label: str | None) -> str:
    return label if label in SECTION_LABELS else "other"


@dataclass
class Researcher:
    name: str
    publications: list[str]


@dataclass
class CitedPaper:
    abstract: str
    section: str | None = None


@dataclass
class ReferenceReview:
    strength: str
    weakness: str
    score: float


@dataclass
class PaperTask:
    task_id: str
    target_title: str
    authors: list[Researcher]
    cited_papers: list[CitedPaper]
    reference_introduction: str | None = None
    reference_5q: list[str] | None = None
    difficulty: str | None = None
    extra: dict[str, Any] = field(default_factory=dict)


@dataclass
class ReviewTask:
    task_id: str
    full_paper: str
    reviewers: list[Researcher]
    cited_papers: list[CitedPaper]
    reference_reviews: list[ReferenceReview]
    abstract: str | None = None
    authors: list[str] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def reference_score(self) -> float:
        scores = [r.score for r in self.reference_reviews]
        return sum(scores) / len(scores)


# -- field helpers -----------------------------------------------------------


def _req(rec: dict, key: str, line: int, kind: type | tuple = str):
    if key not in rec:
        raise SchemaError(line, key, "missing")
    val = rec[key]
    if not isinstance(val, kind) or isinstance(val, bool):
        raise SchemaError(line, key, f"expected {getattr(kind, '__name__', kind)}")
    return val


def _opt(rec: dict, key: str, line: int, kind: type | tuple = str):
    if rec.get(key) is None:
        return None
    return _req(rec, key, line, kind)


def _researchers(rec: dict, key: str, line: int) -> list[Researcher]:
    out = []
    for i, r in enumerate(_req(rec, key, line, list)):
        if not isinstance(r, dict) or not isinstance(r.get("publications", []), list):
            raise SchemaError(line, f"{key}[{i}]", "expected {name, publications}")
        pubs = r.get("publications", [])
        if not all(isinstance(p, str) for p in pubs):
            raise SchemaError(line, f"{key}[{i}].publications", "expected list of text")
        out.append(Researcher(str(r.get("name", "")), list(pubs)))
    return out


def _cited(rec: dict, line: int) -> list[CitedPaper]:
    out = []
    for i, c in enumerate(rec.get("cited-papers") or []):
        if isinstance(c, str):
            out.append(CitedPaper(c))
        elif isinstance(c, dict) and isinstance(c.get("abstract"), str):
            out.append(CitedPaper(c["abstract"], c.get("section")))
        else:
            raise SchemaError(line, f"cited-papers[{i}]", "expected text or {abstract, section}")
    return out


_PAPER_KEYS = {
    "task-id", "target-title", "authors", "cited-papers",
    "reference-introduction", "reference-5q", "difficulty",
}
_REVIEW_KEYS = {
    "task-id", "full-paper", "reviewers", "cited-papers",
    "reference-reviews", "abstract", "authors",
}


def paper_task_from_record(rec: dict, line: int = 0) -> PaperTask:
    if not isinstance(rec, dict):
        raise SchemaError(line, "<record>", "expected a JSON object")
    # An empty author list loads; agent-based modes then fail that task with no-agents.
    authors = _researchers(rec, "authors", line)
    ref5q = _opt(rec, "reference-5q", line, list)
    if ref5q is not None and (len(ref5q) != 5 or not all(isinstance(a, str) and a.strip() for a in ref5q)):
        raise SchemaError(line, "reference-5q", "expected 5 non-empty answers")
    difficulty = _opt(rec, "difficulty", line)
    if difficulty is not None and difficulty not in DIFFICULTIES:
        raise SchemaError(line, "difficulty", f"expected one of {DIFFICULTIES}")
    return PaperTask(
        task_id=str(_req(rec, "task-id", line, (str, int))),
        target_title=_opt(rec, "target-title", line) or "",
        authors=authors,
        cited_papers=_cited(rec, line),
        reference_introduction=_opt(rec, "reference-introduction", line),
        reference_5q=ref5q,
        difficulty=difficulty,
        extra={k: v for k, v in rec.items() if k not in _PAPER_KEYS},
    )


def review_task_from_record(rec: dict, line: int = 0) -> ReviewTask:
    if not isinstance(rec, dict):
        raise SchemaError(line, "<record>", "expected a JSON object")
    reviewers = _researchers(rec, "reviewers", line)
    if not reviewers:
        raise SchemaError(line, "reviewers", "at least one reviewer required")
    refs = []
    for i, r in enumerate(_req(rec, "reference-reviews", line, list)):
        try:
            score = float(r["score"])
            refs.append(ReferenceReview(str(r.get("strength-text", "")), str(r.get("weakness-text", "")), score))
        except (KeyError, TypeError, ValueError):
            raise SchemaError(line, f"reference-reviews[{i}]", "expected {strength-text, weakness-text, score}") from None
        if not 1 <= score <= 10:
            raise SchemaError(line, f"reference-reviews[{i}].score", "outside [1, 10]")
    if not refs:
        raise SchemaError(line, "reference-reviews", "at least one reference review required")
    authors = rec.get("authors") or []
    return ReviewTask(
        task_id=str(_req(rec, "task-id", line, (str, int))),
        full_paper=_req(rec, "full-paper", line),
        reviewers=reviewers,
        cited_papers=_cited(rec, line),
        reference_reviews=refs,
        abstract=_opt(rec, "abstract", line),
        authors=[str(a) for a in authors],
        extra={k: v for k, v in rec.items() if k not in _REVIEW_KEYS},
    )


def _researcher_records(rs: Sequence[Researcher]) -> list[dict]:
    return [{"name": r.name, "publications": list(r.publications)} for r in rs]


def _cited_records(cs: Sequence[CitedPaper]) -> list[dict]:
    return [{"abstract": c.abstract, **({"section": c.section} if c.section else {})} for c in cs]


def paper_task_to_record(t: PaperTask) -> dict:
    rec: dict[str, Any] = {
        "task-id": t.task_id,
        "target-title": t.target_title,
        "authors": _researcher_records(t.authors),
        "cited-papers": _cited_records(t.cited_papers),
    }
    if t.reference_introduction is not None:
        rec["reference-introduction"] = t.reference_introduction
    if t.reference_5q is not None:
        rec["reference-5q"] = list(t.reference_5q)
    if t.difficulty is not None:
        rec["difficulty"] = t.difficulty
    rec.update(t.extra)
    return rec


def _number(x: float) -> float | int:
    return int(x) if float(x).is_integer() else x


def review_task_to_record(t: ReviewTask) -> dict:
    rec: dict[str, Any] = {
        "task-id": t.task_id,
        "full-paper": t.full_paper,
        "reviewers": _researcher_records(t.reviewers),
        "cited-papers": _cited_records(t.cited_papers),
        "reference-reviews": [
            {"strength-text": r.strength, "weakness-text": r.weakness, "score": _number(r.score)}
            for r in t.reference_reviews
        ],
    }
    if t.abstract is not None:
        rec["abstract"] = t.abstract
    if t.authors:
        rec["authors"] = list(t.authors)
    rec.update(t.extra)
    return rec


# -- files -------------------------------------------------------------------


def iter_jsonl(path: str | os.PathLike) -> Iterator[tuple[int, Any]]:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise BenchIOError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, "<json>", str(exc)) from None


def dumps(rec: Any) -> str:
    return json.dumps(rec, ensure_ascii=False, sort_keys=False, separators=(",", ":"))


def write_jsonl(path: str | os.PathLike, records: Iterable[Any], append: bool = False) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a" if append else "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(dumps(rec) + "\n")


def load_paper_tasks(path) -> list[PaperTask]:
    return [paper_task_from_record(rec, n) for n, rec in iter_jsonl(path)]


def load_review_tasks(path) -> list[ReviewTask]:
    return [review_task_from_record(rec, n) for n, rec in iter_jsonl(path)]


def detect_task_kind(path) -> str:
    for _, rec in iter_jsonl(path):
        if isinstance(rec, dict) and "full-paper" in rec:
            return "review"
        return "paper"
    return "paper"


# -- results -----------------------------------------------------------------


@dataclass
class ResultRecord:
    task_id: str
    kind: str  # "paper" | "review"
    mode: str
    status: str = "ok"  # "ok" | "failed" | "unevaluated"
    generated: dict[str, Any] | None = None
    metrics: dict[str, float] | None = None
    difficulty: str | None = None
    trace_digest: str | None = None
    calls: int = 0
    error: str | None = None
    started: str | None = None
    finished: str | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    _KEYS = (
        "task_id", "kind", "mode", "status", "generated", "metrics", "difficulty",
        "trace_digest", "calls", "error", "started", "finished",
    )

    def to_record(self) -> dict:
        rec: dict[str, Any] = {"record-type": "result"}
        for k in self._KEYS:
            rec[k.replace("_", "-")] = getattr(self, k)
        rec.update(self.extra)
        return rec

    @classmethod
    def from_record(cls, rec: dict, line: int = 0) -> ResultRecord:
        known = {k.replace("_", "-") for k in cls._KEYS} | {"record-type"}
        for key in ("task-id", "kind", "mode"):
            if key not in rec:
                raise SchemaError(line, key, "missing")
        kwargs = {k: rec.get(k.replace("_", "-")) for k in cls._KEYS}
        kwargs["calls"] = kwargs["calls"] or 0
        kwargs["status"] = kwargs["status"] or "ok"
        return cls(**kwargs, extra={k: v for k, v in rec.items() if k not in known})


def save_results(path, records: Iterable[ResultRecord], manifest: dict | None = None, append: bool = False) -> None:
    """Write result records one per line; a manifest, if given, goes first."""
    lines = []
    if manifest is not None:
        lines.append({"record-type": "manifest", **manifest})
    lines.extend(r.to_record() for r in records)
    write_jsonl(path, lines, append=append)


def read_results(path) -> tuple[dict | None, list[ResultRecord]]:
    manifest = None
    out = []
    for n, rec in iter_jsonl(path):
        if not isinstance(rec, dict):
            raise SchemaError(n, "<record>", "expected a JSON object")
        if rec.get("record-type") == "manifest":
            manifest = {k: v for k, v in rec.items() if k != "record-type"}
        else:
            out.append(ResultRecord.from_record(rec, n))
    return manifest, out


def load_results(path) -> list[ResultRecord]:
    return read_results(path)[1]


# -- difficulty --------------------------------------------------------------


def partition_by_difficulty(scored: Sequence[tuple[str, float]]) -> dict[str, list[str]]:
    """Lowest-scoring third is hard, highest third easy, the rest medium.

    hard and easy each get floor(n/3) tasks; ties are broken by task id.
    """
    n = len(scored)
    if n < 3:
        raise BenchIOError(f"need at least 3 scored tasks, got {n}")
    ordered = [tid for tid, _ in sorted(scored, key=lambda ts: (ts[1], ts[0]))]
    third = n // 3
    return {
        "hard": ordered[:third],
        "medium": ordered[third : n - third],
        "easy": ordered[n - third :],
    }


# -- graph builders ----------------------------------------------------------

TARGET = "target"


def paper_task_graph(task: PaperTask) -> CommunityGraph:
    """Masked target paper with its authors (authorship) and cited papers (citation)."""
    g = CommunityGraph()
    g.add_paper(DataNode(TARGET, "", PaperKind.ABSTRACT_ONLY))
    width = len(str(max(len(task.authors), len(task.cited_papers), 1)))
    for i, a in enumerate(task.authors):
        aid = f"a{i:0{width}d}"
        g.add_agent(AgentNode(aid, a.name, None, tuple(a.publications)))
        g.add_edge(Edge(aid, TARGET, EdgeKind.AUTHORSHIP))
    for i, c in enumerate(task.cited_papers):
        pid = f"p{i:0{width}d}"
        g.add_paper(DataNode(pid, c.abstract, PaperKind.ABSTRACT_ONLY))
        g.add_edge(Edge(TARGET, pid, EdgeKind.CITATION, normalize_section(c.section)))
    return g


def review_task_graph(task: ReviewTask, reviewers: Sequence[int] | None = None) -> CommunityGraph:
    """Target paper (masked placeholder) with reviewers and cited papers.

    The target's own content stays empty: reviewing reads the ground-truth
    text passed alongside, never the node.
    """
    g = CommunityGraph()
    g.add_paper(DataNode(TARGET, "", PaperKind.FULL_PAPER))
    idx = range(len(task.reviewers)) if reviewers is None else reviewers
    width = len(str(max(len(task.reviewers), len(task.cited_papers), 1)))
    for i in idx:
        r = task.reviewers[i]
        rid = f"r{i:0{width}d}"
        g.add_agent(AgentNode(rid, r.name, None, tuple(r.publications)))
        g.add_edge(Edge(rid, TARGET, EdgeKind.REVIEW_QUALIFICATION))
    for i, c in enumerate(task.cited_papers):
        pid = f"p{i:0{width}d}"
        g.add_paper(DataNode(pid, c.abstract, PaperKind.ABSTRACT_ONLY))
        g.add_edge(Edge(TARGET, pid, EdgeKind.CITATION, normalize_section(c.section)))
    return g
