"""Agent functions: profile synthesis, proposal writing/merging, reviewing.

Each function renders one template, sends it through ``gateway.complete``
and parses the reply. A reply that fails to parse is re-requested once with
a stricter format reminder; a second failure raises.
"""

from __future__ import annotations

from typing import Callable, Sequence, TypeVar

from .parsing import (
    Paper5Q,
    ParseError,
    ReviewRecord,
    format_5q,
    format_bullets,
    parse_bullets,
    parse_judge,
    parse_score,
    parse_5q,
)
from .prompts import render

T = TypeVar("T")

JUDGE_FIELDS = (
    "Topic Consistency",
    "Method Consistency",
    "Factual Consistency",
    "Claim Consistency",
    "Application Context Consistency",
    "Overall Semantic Similarity",
    "Novelty of Reference Proposal",
    "Feasibility of Reference Proposal",
    "Novelty of Generated Proposal",
    "Feasibility of Generated Proposal",
)

FIVE_Q_REMINDER = (
    "Answer all five questions. Start each answer on a new line with its marker "
    "[Question 1], [Question 2], [Question 3], [Question 4], [Question 5]."
)
BULLET_REMINDER = "Write only bullet points, one per line, each starting with '-'."
SCORE_REMINDER = "Reply with a single integer from 1 to 10 and nothing else."
JSON_REMINDER = "Reply with the JSON object only, every field an integer."


class PreconditionError(ValueError):
    pass


def _budget(gateway) -> int | None:
    return getattr(gateway, "prompt_char_budget", None)


def _ask(gateway, messages: list[tuple[str, str]], parse: Callable[[str], T], reminder: str) -> T:
    reply = gateway.complete(messages)
    try:
        return parse(reply)
    except ParseError:
        role, text = messages[-1]
        retry = messages[:-1] + [(role, f"{text}\n{reminder}")]
        return parse(gateway.complete(retry))


def _clean(items: Sequence[str]) -> list[str]:
    return [s.strip() for s in items if s and s.strip()]


def write_profile(publications: Sequence[str], gateway) -> str:
    pubs = _clean(publications)
    if not pubs:
        raise PreconditionError("write_profile needs at least one publication")
    messages = render("persona", _budget(gateway), publications=pubs)
    text = gateway.complete(messages).strip()
    if not text:
        raise ParseError("empty persona")
    return text


def write_proposal_message(profile: str, cited: Sequence[str], gateway, *, require_cited: bool = False) -> Paper5Q:
    """Per-agent proposal draft: the agent's profile plus every cited abstract in one prompt."""
    if not profile or not profile.strip():
        raise PreconditionError("write_proposal_message needs a profile")
    cited = _clean(cited)
    if require_cited and not cited:
        raise PreconditionError("no cited papers to write from")
    messages = render("proposal_message", _budget(gateway), profile=profile.strip(), cited=cited)
    return _ask(gateway, messages, parse_5q, FIVE_Q_REMINDER)


def write_proposal(cited: Sequence[str], gateway, *, require_cited: bool = False) -> Paper5Q:
    """Profile-free proposal over the cited abstracts, or from nothing at all."""
    cited = _clean(cited)
    if require_cited and not cited:
        raise PreconditionError("no cited papers to write from")
    messages = render("proposal_message", _budget(gateway), profile=None, cited=cited)
    return _ask(gateway, messages, parse_5q, FIVE_Q_REMINDER)


def aggregate_proposals(candidates: Sequence[Paper5Q], gateway) -> Paper5Q:
    if not candidates:
        raise PreconditionError("aggregate_proposals needs at least one candidate")
    messages = render(
        "proposal_aggregate",
        _budget(gateway),
        profile=None,
        candidates=[format_5q(c) for c in candidates],
    )
    return _ask(gateway, messages, parse_5q, FIVE_Q_REMINDER)


def _review_bullets(template: str, profile, paper: str, cited, gateway) -> list[str]:
    if not paper or not paper.strip():
        raise PreconditionError("review needs the full paper text")
    messages = render(
        template,
        _budget(gateway),
        profile=profile.strip() if profile else None,
        paper=paper.strip(),
        cited=_clean(cited or ()),
    )
    return _ask(gateway, messages, parse_bullets, BULLET_REMINDER)


def review_strength(profile: str | None, paper: str, cited: Sequence[str], gateway) -> list[str]:
    return _review_bullets("review_strength", profile, paper, cited, gateway)


def review_weakness(profile: str | None, paper: str, cited: Sequence[str], gateway) -> list[str]:
    return _review_bullets("review_weakness", profile, paper, cited, gateway)


def review_score(profile: str | None, strengths: Sequence[str], weaknesses: Sequence[str], gateway) -> int:
    if not strengths or not weaknesses:
        raise PreconditionError("review_score needs both strengths and weaknesses")
    messages = render(
        "review_score",
        _budget(gateway),
        profile=profile.strip() if profile else None,
        strength=format_bullets(strengths),
        weakness=format_bullets(weaknesses),
    )
    return _ask(gateway, messages, parse_score, SCORE_REMINDER)


def _metareview(template: str, paper: str, reviews: Sequence[ReviewRecord], gateway) -> list[str]:
    if not reviews:
        raise PreconditionError("metareview needs at least one review")
    messages = render(
        template,
        _budget(gateway),
        paper=paper.strip(),
        reviews=[r.format() for r in reviews],
    )
    return _ask(gateway, messages, parse_bullets, BULLET_REMINDER)


def metareview_strength(paper: str, reviews: Sequence[ReviewRecord], gateway) -> list[str]:
    return _metareview("metareview_strength", paper, reviews, gateway)


def metareview_weakness(paper: str, reviews: Sequence[ReviewRecord], gateway) -> list[str]:
    return _metareview("metareview_weakness", paper, reviews, gateway)


def transform_reference_paper(introduction: str, gateway) -> Paper5Q:
    if not introduction or not introduction.strip():
        raise PreconditionError("reference introduction is empty")
    messages = render("transform_paper", _budget(gateway), introduction=introduction.strip())
    return _ask(gateway, messages, parse_5q, FIVE_Q_REMINDER)


def transform_reference_review(review_text: str, gateway, kind: str = "strength") -> list[str]:
    if kind not in ("strength", "weakness"):
        raise ValueError(f"kind must be 'strength' or 'weakness', not {kind!r}")
    if not review_text or not review_text.strip():
        raise PreconditionError("reference review text is empty")
    messages = render("transform_review", _budget(gateway), review=review_text.strip(), kind=kind)
    return _ask(gateway, messages, parse_bullets, BULLET_REMINDER)


def judge_proposals(reference: Paper5Q, generated: Paper5Q, gateway) -> dict[str, int]:
    messages = render("judge", _budget(gateway), reference=format_5q(reference), generated=format_5q(generated))
    return _ask(gateway, messages, lambda r: parse_judge(r, JUDGE_FIELDS), JSON_REMINDER)
