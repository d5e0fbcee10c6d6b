"""Ranking quality metrics with binary relevance.

All functions take a ranked item list and the relevant set; ranks are
1-based.  Conventions for empty inputs follow the guards on each
function: no relevant items means 0 for the hit-style metrics and an
AUC of 1 for windows without mixed pairs.
"""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Ranking:
    """Ranked item ids (best first, no duplicates) plus the relevant set."""

    ranked: tuple
    relevant: frozenset

    def __post_init__(self):
        ranked = tuple(self.ranked)
        if len(set(ranked)) != len(ranked):
            raise ValueError("ranked list contains duplicates")
        object.__setattr__(self, "ranked", ranked)
        object.__setattr__(self, "relevant", frozenset(self.relevant))


def _hits(r: Ranking, k: int | None = None):
    window = r.ranked if k is None else r.ranked[:k]
    return [item in r.relevant for item in window]


def ndcg_at_k(r: Ranking, k: int) -> float:
    """Binary-gain NDCG with 1/log2(rank+1) discounts; 0 when nothing
    is relevant."""
    if k < 1:
        raise ValueError("k must be positive")
    if not r.relevant:
        return 0.0
    hits = _hits(r, k)
    dcg = sum(1.0 / math.log2(rank + 1)
              for rank, hit in enumerate(hits, start=1) if hit)
    ideal = sum(1.0 / math.log2(rank + 1)
                for rank in range(1, min(k, len(r.relevant)) + 1))
    return dcg / ideal if ideal > 0 else 0.0


def mean_average_precision(r: Ranking) -> float:
    """Average precision over hit positions, normalized by
    min(|relevant|, |ranked|)."""
    denom = min(len(r.relevant), len(r.ranked))
    if denom == 0:
        return 0.0
    hits = 0
    total = 0.0
    for rank, item in enumerate(r.ranked, start=1):
        if item in r.relevant:
            hits += 1
            total += hits / rank
    return total / denom


def mrr(r: Ranking) -> float:
    """Reciprocal rank of the first hit; 0 without any hit."""
    for rank, item in enumerate(r.ranked, start=1):
        if item in r.relevant:
            return 1.0 / rank
    return 0.0


def hit_rate_at_k(r: Ranking, k: int) -> float:
    """1 when any of the top k is relevant, else 0."""
    if k < 1:
        raise ValueError("k must be positive")
    return 1.0 if any(_hits(r, k)) else 0.0


def auc_at_k(r: Ranking, k: int) -> float:
    """Pairwise concordance inside the top-k window.

    Counts ordered pairs (i before j) where i is relevant and j is not
    as concordant, the reverse as discordant; windows with no mixed
    pair score 1.
    """
    if k < 1:
        raise ValueError("k must be positive")
    hits = _hits(r, k)
    n_rel = sum(hits)
    n_non = len(hits) - n_rel
    if n_rel == 0 or n_non == 0:
        return 1.0
    concordant = 0
    seen_rel = 0
    for hit in hits:
        if hit:
            seen_rel += 1
        else:
            concordant += seen_rel
    return concordant / (n_rel * n_non)
