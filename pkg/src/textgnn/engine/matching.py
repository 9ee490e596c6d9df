from __future__ import annotations

from typing import Collection, Sequence

from ..evaluation import cosine_matrix


class PoolTooSmallError(ValueError):
    pass


def match_reviewers(
    abstract: str,
    pool: Sequence[tuple[str, str]],
    k: int,
    exclusions: Collection[str] = (),
    gateway=None,
) -> list[str]:
    """Top-``k`` researcher ids by cosine(abstract, profile); ties go to the smaller id.

    Excluded ids (typically the submission's own authors) never appear.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    candidates = [(i, p) for i, p in pool if i not in set(exclusions)]
    if len(candidates) < k:
        raise PoolTooSmallError(f"need {k} reviewers, only {len(candidates)} eligible")
    vecs = gateway.embed([abstract] + [p for _, p in candidates])
    sims = cosine_matrix(vecs[:1], vecs[1:])[0]
    ranked = sorted(zip(candidates, sims), key=lambda cs: (-cs[1], cs[0][0]))
    return [c[0] for c, _ in ranked[:k]]
