"""Reading, writing and reviewing as two text message-passing layers.

Layer 1 (reading) gives every participating researcher a profile built from
their own publications. Layer 2 either writes the masked paper or reviews the
ground-truth paper. Per-agent calls fan out across threads; results are
always merged in node-id order, so concurrency cannot change the output.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, TypeVar

from .. import agents as ag
from ..agents import Paper5Q, ReviewRecord
from ..gateway import hash_hex
from ..graph import CommunityGraph, EdgeKind

logger = logging.getLogger(__name__)

T = TypeVar("T")

SECTIONS = ("related-work", "introduction", "other")


class AggMode(str, enum.Enum):
    SELF = "self"
    AGENT = "agent"
    DATA = "data"
    GLOBAL = "global"

    @property
    def uses_agents(self) -> bool:
        return self in (AggMode.AGENT, AggMode.GLOBAL)

    @property
    def uses_data(self) -> bool:
        return self in (AggMode.DATA, AggMode.GLOBAL)


@dataclass(frozen=True)
class StageConfig:
    mode: AggMode = AggMode.GLOBAL
    max_agents: int | None = None
    max_cited_papers: int | None = None
    citation_filter: str = "all"

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", AggMode(self.mode))
        for name in ("max_agents", "max_cited_papers"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be >= 1 when set")
        if self.citation_filter not in ("all",) + SECTIONS:
            raise ValueError(f"unknown citation filter {self.citation_filter!r}")


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str, node: str | None = None):
        self.stage = stage
        self.node = node
        where = f" [{node}]" if node else ""
        super().__init__(f"{stage}{where}: {message}")


class NoAgentsError(StageError):
    pass


class NoCitationsError(StageError):
    pass


class NoReviewersError(StageError):
    pass


@dataclass(frozen=True)
class TraceEntry:
    stage: str
    node: str
    prompt_hash: str
    reply_hash: str


@dataclass
class Trace:
    entries: list[TraceEntry] = field(default_factory=list)
    failures: dict[str, str] = field(default_factory=dict)

    def count(self, stage: str) -> int:
        return sum(1 for e in self.entries if e.stage == stage)


class _Tap:
    """Gateway proxy that records one trace entry per completed call."""

    def __init__(self, gateway, stage: str, node: str, sink: list[TraceEntry]):
        self._gateway = gateway
        self._stage = stage
        self._node = node
        self._sink = sink

    @property
    def prompt_char_budget(self):
        return getattr(self._gateway, "prompt_char_budget", None)

    def complete(self, messages, params=None):
        reply = self._gateway.complete(messages, params)
        self._sink.append(
            TraceEntry(self._stage, self._node, hash_hex([list(m) for m in messages]), hash_hex(reply))
        )
        return reply

    def embed(self, texts):
        return self._gateway.embed(texts)


def _workers(gateway) -> int:
    cfg = getattr(gateway, "config", None)
    return max(1, getattr(cfg, "concurrency_limit", 1))


def _fan_out(
    gateway,
    trace: Trace,
    stage: str,
    ids: Sequence[str],
    fn: Callable[[str, _Tap], T],
) -> dict[str, T]:
    """Run ``fn`` per id, merging traces in id order; failures go to ``trace.failures``."""

    def one(node: str):
        sink: list[TraceEntry] = []
        try:
            return node, fn(node, _Tap(gateway, stage, node, sink)), None, sink
        except Exception as exc:  # per-agent failure is partial by design
            return node, None, exc, sink

    ids = sorted(ids)
    if len(ids) > 1 and _workers(gateway) > 1:
        with ThreadPoolExecutor(max_workers=min(len(ids), _workers(gateway))) as pool:
            results = list(pool.map(one, ids))
    else:
        results = [one(i) for i in ids]
    out: dict[str, T] = {}
    for node, value, exc, sink in results:
        trace.entries.extend(sink)
        if exc is None:
            out[node] = value
        else:
            logger.warning("%s failed for %s: %s", stage, node, exc)
            trace.failures[f"{stage}:{node}"] = f"{type(exc).__name__}: {exc}"
    return out


def _single(gateway, trace: Trace, stage: str, node: str, fn: Callable[[_Tap], T]) -> T:
    sink: list[TraceEntry] = []
    try:
        return fn(_Tap(gateway, stage, node, sink))
    finally:
        trace.entries.extend(sink)


# -- neighborhood selection --------------------------------------------------


def _require_paper(graph: CommunityGraph, target: str, stage: str) -> None:
    if target not in graph.papers:
        raise StageError(stage, "target must be a paper node", target)


def select_agents(graph: CommunityGraph, target: str, kind: EdgeKind, config: StageConfig) -> list[str]:
    ids = graph.agent_neighbors(target, kind)
    return ids[: config.max_agents] if config.max_agents else ids


def select_cited(graph: CommunityGraph, target: str, config: StageConfig) -> list[str]:
    """Cited-paper contents for ``target``, filtered by citing section, in id order."""
    sections: dict[str, str] = {}
    for e in graph.incident_edges(target, EdgeKind.CITATION):
        other = e.dst if e.src == target else e.src
        sec = e.section if e.section in SECTIONS else "other"
        sections.setdefault(other, sec)
    ids = sorted(
        n for n, sec in sections.items()
        if (config.citation_filter == "all" or sec == config.citation_filter) and graph.papers[n].content
    )
    if config.max_cited_papers:
        ids = ids[: config.max_cited_papers]
    return [graph.papers[n].content for n in ids]


def round_half_up(scores: Sequence[int]) -> int:
    if not scores:
        raise ValueError("no scores to combine")
    return math.floor(Fraction(sum(scores), len(scores)) + Fraction(1, 2))


# -- layer 1 -----------------------------------------------------------------


def stage_paper_reading(
    graph: CommunityGraph,
    target: str,
    gateway,
    *,
    agents: Sequence[str] | None = None,
    trace: Trace | None = None,
) -> CommunityGraph:
    """Give each listed agent neighbor (all by default) a profile if it lacks one."""
    _require_paper(graph, target, "reading")
    trace = trace if trace is not None else Trace()
    if agents is None:
        agents = graph.agent_neighbors(target)
    todo = [a for a in agents if graph.agent(a).profile is None]
    if not todo:
        return graph
    profiles = _fan_out(
        gateway, trace, "reading", todo,
        lambda a, tap: ag.write_profile(graph.agent(a).publications, tap),
    )
    if not profiles:
        raise StageError("reading", f"all {len(todo)} agents failed", target)
    for a, text in sorted(profiles.items()):
        graph = graph.set_profile(a, text)
    return graph


# -- layer 2: writing --------------------------------------------------------


def _profiled(graph: CommunityGraph, ids: Sequence[str], trace: Trace, stage: str) -> list[str]:
    out = []
    for a in ids:
        if graph.agent(a).profile:
            out.append(a)
        else:
            trace.failures.setdefault(f"{stage}:{a}", "agent has no profile")
    return out


def stage_paper_writing(
    graph: CommunityGraph,
    target: str,
    config: StageConfig,
    gateway,
    *,
    trace: Trace | None = None,
) -> Paper5Q:
    _require_paper(graph, target, "writing")
    if not graph.papers[target].masked:
        raise StageError("writing", "target paper must be masked before writing", target)
    trace = trace if trace is not None else Trace()
    mode = config.mode

    if mode is AggMode.SELF:
        return _single(gateway, trace, "writing:aggregate", target, lambda tap: ag.write_proposal([], tap))

    cited = select_cited(graph, target, config) if mode.uses_data else []
    if mode is AggMode.DATA:
        if not cited:
            raise NoCitationsError("writing", "data aggregation needs cited papers", target)
        return _single(
            gateway, trace, "writing:aggregate", target,
            lambda tap: ag.write_proposal(cited, tap, require_cited=True),
        )

    authors = select_agents(graph, target, EdgeKind.AUTHORSHIP, config)
    if not authors:
        raise NoAgentsError("writing", f"{mode.value} aggregation needs author agents", target)
    authors = _profiled(graph, authors, trace, "writing:message")
    drafts = _fan_out(
        gateway, trace, "writing:message", authors,
        lambda a, tap: ag.write_proposal_message(graph.agent(a).profile, cited, tap),
    )
    if not drafts:
        raise StageError("writing", "every author failed to draft a proposal", target)
    ordered = [drafts[a] for a in sorted(drafts)]
    return _single(gateway, trace, "writing:aggregate", target, lambda tap: ag.aggregate_proposals(ordered, tap))


# -- layer 2: reviewing ------------------------------------------------------


def _one_review(profile, paper, cited, tap) -> ReviewRecord:
    strengths = ag.review_strength(profile, paper, cited, _Relabel(tap, "review:strength"))
    weaknesses = ag.review_weakness(profile, paper, cited, _Relabel(tap, "review:weakness"))
    score = ag.review_score(profile, strengths, weaknesses, _Relabel(tap, "review:score"))
    return ReviewRecord(tuple(strengths), tuple(weaknesses), score)


class _Relabel(_Tap):
    def __init__(self, tap: _Tap, stage: str):
        super().__init__(tap._gateway, stage, tap._node, tap._sink)


def stage_review_writing(
    graph: CommunityGraph,
    target: str,
    paper: str,
    config: StageConfig,
    gateway,
    *,
    trace: Trace | None = None,
) -> ReviewRecord:
    """Review ``paper`` (the ground-truth text, never the node's own content)."""
    _require_paper(graph, target, "review")
    if not paper or not paper.strip():
        raise StageError("review", "ground-truth paper text is empty", target)
    trace = trace if trace is not None else Trace()
    mode = config.mode
    cited = select_cited(graph, target, config) if mode.uses_data else []

    if not mode.uses_agents:
        return _single(gateway, trace, "review", target, lambda tap: _one_review(None, paper, cited, tap))

    reviewers = select_agents(graph, target, EdgeKind.REVIEW_QUALIFICATION, config)
    if not reviewers:
        raise NoReviewersError("review", f"{mode.value} aggregation needs reviewers", target)
    reviewers = _profiled(graph, reviewers, trace, "review")
    reviews = _fan_out(
        gateway, trace, "review", reviewers,
        lambda a, tap: _one_review(graph.agent(a).profile, paper, cited, tap),
    )
    if not reviews:
        raise StageError("review", "every reviewer failed", target)
    ordered = [reviews[a] for a in sorted(reviews)]
    strengths = _single(
        gateway, trace, "review:meta-strength", target,
        lambda tap: ag.metareview_strength(paper, ordered, tap),
    )
    weaknesses = _single(
        gateway, trace, "review:meta-weakness", target,
        lambda tap: ag.metareview_weakness(paper, ordered, tap),
    )
    score = round_half_up([r.score for r in ordered])
    return ReviewRecord(tuple(strengths), tuple(weaknesses), score)


# -- full pass ---------------------------------------------------------------


@dataclass(frozen=True)
class SimulationOutput:
    paper: Paper5Q | None
    review: ReviewRecord | None
    trace: tuple[TraceEntry, ...]
    failures: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.paper is None and self.review is None:
            raise ValueError("simulation produced neither a paper nor a review")

    def to_dict(self) -> dict:
        out: dict = {}
        if self.paper is not None:
            out["paper"] = list(self.paper.answers)
        if self.review is not None:
            out["review"] = {
                "strengths": list(self.review.strengths),
                "weaknesses": list(self.review.weaknesses),
                "score": self.review.score,
            }
        out["trace"] = [[e.stage, e.node, e.prompt_hash, e.reply_hash] for e in self.trace]
        if self.failures:
            out["failures"] = dict(sorted(self.failures.items()))
        return out


def run_simulation(
    graph: CommunityGraph,
    target: str,
    config: StageConfig,
    gateway,
    *,
    ground_truth_paper: str | None = None,
    write: bool = True,
) -> SimulationOutput:
    """Reading, then writing and/or reviewing: two layers deep.

    Writing runs when ``write`` is true (the target is masked first if
    needed); reviewing runs when ``ground_truth_paper`` is given. Only the
    agents a stage will actually consult are read.
    """
    _require_paper(graph, target, "simulate")
    if not write and not ground_truth_paper:
        raise ValueError("nothing to simulate: write=False and no ground-truth paper")
    trace = Trace()
    readers: set[str] = set()
    if config.mode.uses_agents:
        if write:
            readers.update(select_agents(graph, target, EdgeKind.AUTHORSHIP, config))
        if ground_truth_paper:
            readers.update(select_agents(graph, target, EdgeKind.REVIEW_QUALIFICATION, config))
    if readers:
        graph = stage_paper_reading(graph, target, gateway, agents=sorted(readers), trace=trace)

    paper = review = None
    if write:
        if not graph.papers[target].masked:
            graph, _ = graph.mask_node(target)
        paper = stage_paper_writing(graph, target, config, gateway, trace=trace)
    if ground_truth_paper:
        review = stage_review_writing(graph, target, ground_truth_paper, config, gateway, trace=trace)
    return SimulationOutput(paper, review, tuple(trace.entries), dict(trace.failures))
