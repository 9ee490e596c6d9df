"""Offline backend whose replies are pure functions of the prompt.

Each prompt family is recognised by an instruction line that only its
template contains; the reply is the smallest well-formed answer of that
family, seeded by a 64-bit hash of the full message list.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import threading
from collections import Counter
from functools import lru_cache
from typing import Sequence

from .base import CompletionParams, Message, stable_hash

EMBED_DIM = 256

QUESTIONS = (
    "What is the problem?",
    "Why is it interesting and important?",
    "Why is it hard?",
    "Why hasn't it been solved before?",
    "What are the key components of my approach and results?",
)

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

# Checked in order; earlier families win when a prompt quotes another family's text.
FAMILIES = (
    ("judge", "Respond strictly in JSON format"),
    ("score", "Your score is:"),
    ("bullet-rewrite", "Please rewrite the following"),
    ("metareview", "Please summarize the important points from the"),
    ("review", "Please write in bullet points."),
    ("persona", "first-person persona"),
    ("five-questions", "[Question 1]"),
)

_WORDS = (
    "graph", "signal", "agent", "model", "benchmark", "theory", "dataset", "scaling",
    "robust", "sparse", "causal", "latent", "kernel", "prior", "policy", "memory",
)


def classify(messages: Sequence[Message]) -> str:
    text = "\n".join(t for _, t in messages)
    for name, sentinel in FAMILIES:
        if sentinel in text:
            return name
    return "other"


def _words(seed: int, n: int) -> str:
    return " ".join(_WORDS[(seed >> (4 * k)) & 15] for k in range(n))


def _five_questions(h: int) -> str:
    lines = []
    for i, q in enumerate(QUESTIONS, 1):
        lines.append(f"[Question {i}] - {q}")
        lines.append(f"A{i}-{h:016x} {_words(h >> i, 6)}")
    return "\n".join(lines)


def _hash_bullets(h: int, n: int = 3) -> str:
    return "\n".join(f"- point {k + 1} {h:016x} {_words(h >> k, 4)}" for k in range(n))


def _echo_bullets(text: str) -> str:
    out = []
    for line in text.splitlines():
        line = line.strip().lstrip("-*").strip()
        if line:
            out.append(f"- {line}")
    return "\n".join(out)


def _collect_bullets(text: str) -> list[str]:
    seen: dict[str, None] = {}
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("-"):
            s = s.lstrip("-").strip()
            if s:
                seen.setdefault(s, None)
    return list(seen)


class MockBackend:
    """Deterministic stand-in for a chat/embedding provider.

    ``calls`` counts completions per prompt family and is lock-protected so
    the engine may fan out across threads.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.calls: Counter[str] = Counter()

    def complete(self, messages: Sequence[Message], params: CompletionParams) -> str:
        family = classify(messages)
        with self._lock:
            self.calls[family] += 1
        h = stable_hash([list(m) for m in messages])
        last = messages[-1][1]
        if family == "judge":
            return json.dumps({k: (h >> (4 * i)) % 11 for i, k in enumerate(JUDGE_FIELDS)}, indent=2)
        if family == "score":
            return str(1 + h % 10)
        if family == "bullet-rewrite":
            body = last.split("Please rewrite the following", 1)[0]
            return _echo_bullets(body) or _hash_bullets(h)
        if family == "metareview":
            reviews = last.split("Here are the reviews:", 1)[-1]
            kind = "weakness" if "'weakness' section" in last else "strength"
            picked = []
            for block in re.split(r"\nReview \d+: ", reviews):
                part = block.split(f"{kind.capitalize()}:", 1)
                if len(part) == 2:
                    section = re.split(r"\n(?:Strength|Weakness|Score):", part[1], maxsplit=1)[0]
                    picked.extend(b for b in _collect_bullets(section) if b not in picked)
            return "\n".join(f"- {b}" for b in picked) or _hash_bullets(h)
        if family == "review":
            return _hash_bullets(h)
        if family == "persona":
            return f"I am a researcher ({h:016x}) working on {_words(h, 8)}."
        if family == "five-questions":
            return _five_questions(h)
        return f"mock reply {h:016x}"

    def embed(self, texts: Sequence[str], model: str) -> list[list[float]]:
        return [trigram_embedding(t) for t in texts]


@lru_cache(maxsize=65536)
def trigram_bucket(gram: str) -> int:
    return int.from_bytes(hashlib.blake2b(gram.encode("utf-8"), digest_size=4).digest(), "big") % EMBED_DIM


def trigrams(text: str) -> list[str]:
    if len(text) < 3:
        return [text]
    return [text[i : i + 3] for i in range(len(text) - 2)]


def trigram_embedding(text: str) -> list[float]:
    """Counts of hashed character trigrams, L2-normalised to unit length."""
    vec = [0.0] * EMBED_DIM
    for g in trigrams(text):
        vec[trigram_bucket(g)] += 1.0
    norm = math.sqrt(sum(x * x for x in vec))
    return [x / norm for x in vec]
