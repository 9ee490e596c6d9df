"""Brute-force reference implementations, written without numpy or the package's helpers."""

import hashlib
import math
from decimal import ROUND_HALF_UP, Decimal


def cosine(u, v):
    dot = sum(a * b for a, b in zip(u, v, strict=True))
    return dot / (math.sqrt(sum(a * a for a in u)) * math.sqrt(sum(b * b for b in v)))


def d_p(gen_vecs, ref_vecs):
    sims = [cosine(g, r) for g, r in zip(gen_vecs, ref_vecs, strict=True)]
    return sims, sum(sims) / len(sims)


def d_r(gen_vecs, ref_vecs):
    total = 0.0
    for r in ref_vecs:
        best = -2.0
        for g in gen_vecs:
            best = max(best, cosine(g, r))
        total += best
    return total / len(ref_vecs)


def delta_s(generated, reference_scores):
    return abs(generated - sum(reference_scores) / len(reference_scores))


def half_up_mean(scores):
    return int((Decimal(sum(scores)) / Decimal(len(scores))).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def grouped_means(rows, group_by):
    """{label: (count, {metric: mean})} with label "all" for the overall row."""
    out = {}
    buckets = {"all": rows}
    for r in rows:
        label = ", ".join(f"{g}={r.get(g) or '-'}" for g in group_by)
        if group_by:
            buckets.setdefault(label, []).append(r)
    for label, members in buckets.items():
        keys = sorted({k for m in members for k in m["metrics"]})
        means = {}
        for k in keys:
            vals = [m["metrics"][k] for m in members if k in m["metrics"]]
            means[k] = sum(vals) / len(vals)
        out[label] = (len(members), means)
    return out


def trigram_vector(text, dim=256):
    """Independent re-derivation of the mock embedding."""
    grams = [text] if len(text) < 3 else [text[i : i + 3] for i in range(len(text) - 2)]
    vec = [0.0] * dim
    for g in grams:
        vec[int(hashlib.blake2b(g.encode(), digest_size=4).hexdigest(), 16) % dim] += 1.0
    norm = math.sqrt(sum(x * x for x in vec))
    return [x / norm for x in vec]
