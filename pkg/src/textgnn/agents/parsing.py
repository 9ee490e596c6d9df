"""Structured output parsing: five-question blocks, bullet lists, scores.

All functions here are pure functions of the reply text.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

QUESTIONS = (
    "What is the problem?",
    "Why is it interesting and important?",
    "Why is it hard?",
    "Why hasn't it been solved before?",
    "What are the key components of my approach and results?",
)


class ParseError(ValueError):
    """A model reply did not match the expected format."""


class NoScoreError(ParseError):
    pass


class ScoreOutOfRangeError(ParseError):
    pass


class FieldOutOfRangeError(ParseError):
    pass


@dataclass(frozen=True)
class Paper5Q:
    answers: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "answers", tuple(self.answers))
        if len(self.answers) != 5:
            raise ValueError(f"Paper5Q needs exactly 5 answers, got {len(self.answers)}")
        for i, a in enumerate(self.answers, 1):
            if not a or not a.strip():
                raise ValueError(f"answer to question {i} is empty")

    def format(self) -> str:
        return format_5q(self)


@dataclass(frozen=True)
class ReviewRecord:
    strengths: tuple[str, ...]
    weaknesses: tuple[str, ...]
    score: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "strengths", tuple(self.strengths))
        object.__setattr__(self, "weaknesses", tuple(self.weaknesses))
        if isinstance(self.score, bool) or not isinstance(self.score, int) or not 1 <= self.score <= 10:
            raise ValueError(f"review score must be an integer in 1..10, got {self.score!r}")

    def format(self) -> str:
        return (
            f"Score: {self.score}\n"
            f"Strength:\n{format_bullets(self.strengths)}\n"
            f"Weakness:\n{format_bullets(self.weaknesses)}"
        )


# "[Question 3]", "Question 3:", "(question 3)", "**[Question 3]**" at line start.
_MARKER = re.compile(r"^[ \t*#]*[\[(]?[ \t]*question[ \t]*([1-5])[ \t]*[\])]?[ \t*]*(.*)$", re.IGNORECASE | re.MULTILINE)


def _strip_title(rest: str, idx: int) -> str:
    rest = rest.strip().lstrip("-:").strip()
    title = QUESTIONS[idx - 1]
    if rest.lower().strip("*_ ").rstrip("?").strip() == title.lower().rstrip("?").strip():
        return ""
    return rest


def parse_5q(text: str) -> Paper5Q:
    """Split a reply into five answers delimited by ``[Question i]`` marker lines."""
    marks = []
    expected = 1
    for m in _MARKER.finditer(text):
        if int(m.group(1)) == expected:
            marks.append(m)
            expected += 1
            if expected > 5:
                break
    if len(marks) < 5:
        raise ParseError(f"missing [Question {expected}] marker")
    answers = []
    for i, m in enumerate(marks):
        end = marks[i + 1].start() if i + 1 < 5 else len(text)
        head = _strip_title(m.group(2), i + 1)
        body = text[m.end() : end].strip()
        answer = "\n".join(p for p in (head, body) if p).strip()
        if not answer:
            raise ParseError(f"empty answer for question {i + 1}")
        answers.append(answer)
    return Paper5Q(tuple(answers))


def format_5q(paper: Paper5Q) -> str:
    return "\n".join(
        f"[Question {i}] - {q}\n{a}" for i, (q, a) in enumerate(zip(QUESTIONS, paper.answers), 1)
    )


def parse_bullets(text: str) -> list[str]:
    """Lines starting with ``-`` open a bullet; other non-blank lines continue the previous one."""
    bullets: list[str] = []
    for line in text.splitlines():
        s = line.strip()
        if not s:
            continue
        if s.startswith("-"):
            bullets.append(s[1:].strip())
        elif bullets:
            bullets[-1] = f"{bullets[-1]} {s}".strip()
    bullets = [b for b in bullets if b]
    if not bullets:
        raise ParseError("no '-' bullet points in reply")
    return bullets


def format_bullets(bullets) -> str:
    return "\n".join(f"- {b}" for b in bullets)


_INT = re.compile(r"(?<![\w.])-?\d+(?![\w.]\d)")


def parse_score(text: str) -> int:
    m = _INT.search(text)
    if m is None:
        raise NoScoreError(f"no integer score in reply {text[:80]!r}")
    value = int(m.group())
    if not 1 <= value <= 10:
        raise ScoreOutOfRangeError(f"score {value} outside 1..10")
    return value


def parse_judge(text: str, fields: tuple[str, ...]) -> dict[str, int]:
    start, end = text.find("{"), text.rfind("}")
    if start < 0 or end < start:
        raise ParseError("no JSON object in judge reply")
    try:
        data = json.loads(text[start : end + 1])
    except json.JSONDecodeError as exc:
        raise ParseError(f"judge reply is not valid JSON: {exc}") from exc
    out = {}
    for f in fields:
        if f not in data:
            raise ParseError(f"judge reply missing field {f!r}")
        v = data[f]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v):
            raise ParseError(f"judge field {f!r} is not an integer: {v!r}")
        if not 0 <= v <= 10:
            raise FieldOutOfRangeError(f"judge field {f!r} = {v} outside 0..10")
        out[f] = int(v)
    return out
