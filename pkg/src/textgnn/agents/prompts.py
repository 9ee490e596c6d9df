"""Template loading and rendering into chat message lists.

A template file is a sequence of sections headed ``<|role|>`` or
``<|role if name|>``; a conditional section is dropped when ``name`` is
falsy in the render context. Section bodies are Jinja2.
"""

from __future__ import annotations

import logging
import re
from functools import lru_cache

import jinja2

logger = logging.getLogger(__name__)

TEMPLATE_VERSION = "1"

_HEADER = re.compile(r"^<\|(system|user|assistant)(?: if (\w+))?\|>$", re.MULTILINE)

# List-valued context keys that may be shortened to fit a prompt budget, most expendable first.
TRUNCATABLE = ("cited", "publications", "reviews", "candidates")

_env = jinja2.Environment(
    loader=jinja2.PackageLoader("textgnn.agents", "templates"),
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=False,
    undefined=jinja2.StrictUndefined,
    autoescape=False,
)


@lru_cache(maxsize=None)
def _sections(name: str) -> list[tuple[str, str | None, jinja2.Template]]:
    source = _env.loader.get_source(_env, f"{name}.txt")[0]
    heads = list(_HEADER.finditer(source))
    if not heads:
        raise ValueError(f"template {name!r} has no role sections")
    out = []
    for i, m in enumerate(heads):
        end = heads[i + 1].start() if i + 1 < len(heads) else len(source)
        body = source[m.end() : end].strip("\n")
        out.append((m.group(1), m.group(2), _env.from_string(body)))
    return out


def _render_once(name: str, ctx: dict) -> list[tuple[str, str]]:
    messages = []
    for role, cond, tmpl in _sections(name):
        if cond is not None and not ctx.get(cond):
            continue
        text = tmpl.render(**ctx).strip()
        if text:
            messages.append((role, text))
    return messages


def prompt_size(messages: list[tuple[str, str]]) -> int:
    return sum(len(t) for _, t in messages)


def _drop_middle(items: list) -> list:
    mid = len(items) // 2
    return items[:mid] + items[mid + 1 :]


def render(name: str, budget: int | None = None, **ctx) -> list[tuple[str, str]]:
    """Render template ``name`` to ``[(role, text), ...]``.

    With a character ``budget``, items are removed from the middle of the
    list sections (cited abstracts first) until the prompt fits or every list
    is down to one item. Instruction text is never cut.
    """
    ctx.setdefault("field", "Machine Learning")
    messages = _render_once(name, ctx)
    if budget is None or prompt_size(messages) <= budget:
        return messages
    ctx = {k: list(v) if k in TRUNCATABLE and v else v for k, v in ctx.items()}
    for key in TRUNCATABLE:
        while ctx.get(key) and len(ctx[key]) > 1 and prompt_size(messages) > budget:
            ctx[key] = _drop_middle(ctx[key])
            messages = _render_once(name, ctx)
    if prompt_size(messages) > budget:
        logger.warning("prompt %s still %d chars over budget %d", name, prompt_size(messages), budget)
    return messages
