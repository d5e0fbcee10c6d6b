"""Determinantal point process selection over the popular-item head.

The ensemble kernel is L = S + D where S is the Gram matrix of the
embeddings of the P most popular items and D puts each item's
popularity weight on the diagonal, so high-determinant subsets balance
spread (near-orthogonal embeddings) against popularity mass.

MAP selection is the classic fast greedy with incremental Cholesky
updates, O(K^2 P) total, followed by an optional 2-swap local search
that replaces one selected item with one outside item whenever that
raises the subset determinant.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ._kernels import greedy_map_order

log = logging.getLogger(__name__)

JITTER = 1e-10
GAIN_FLOOR = 1e-12
SWAP_GAIN = 1e-9


@dataclass(frozen=True)
class Ensemble:
    """Kernel L over item indices 0..P-1 of the popularity-sorted head."""

    L: np.ndarray
    item_indices: np.ndarray  # catalog indices backing each row


def build_ensemble(embeddings: np.ndarray, weights: np.ndarray,
                   p_head: int | None = None) -> Ensemble:
    """L = Emb Emb^T + diag(weights) over the first p_head items.

    Items are assumed popularity-sorted already; a small diagonal jitter
    keeps Cholesky updates stable for duplicate embeddings.
    """
    n = embeddings.shape[0]
    if p_head is None:
        p_head = n
    if not 1 <= p_head <= n:
        raise ValueError(f"head size {p_head} outside 1..{n}")
    emb = np.asarray(embeddings[:p_head], dtype=np.float64)
    w = np.asarray(weights[:p_head], dtype=np.float64)
    L = emb @ emb.T
    L[np.diag_indices_from(L)] += w + JITTER
    return Ensemble(L=L, item_indices=np.arange(p_head))


def subset_log_det(L: np.ndarray, subset) -> float:
    """log det of the principal minor; -inf for a singular minor."""
    subset = np.asarray(list(subset), dtype=np.int64)
    if subset.size == 0:
        return 0.0
    sign, value = np.linalg.slogdet(L[np.ix_(subset, subset)])
    return value if sign > 0 else -np.inf


def greedy_map(ensemble: Ensemble, k: int, exclude=()) -> list[int]:
    """Greedy MAP subset of size k, skipping excluded row indices.

    When the determinant gain floor is reached early, the remainder is
    filled with the most popular unused rows so exactly k items return
    (capped by the available pool).
    """
    L = ensemble.L
    P = L.shape[0]
    exclude = set(int(i) for i in exclude)
    avail = P - len(exclude.intersection(range(P)))
    if k < 0 or k > avail:
        raise ValueError(f"cannot pick {k} items from {avail} available")
    if k == 0:
        return []
    blocked = np.zeros(P, dtype=bool)
    for i in exclude:
        if 0 <= i < P:
            blocked[i] = True
    order = greedy_map_order(L, k, blocked, GAIN_FLOOR)
    chosen = [int(i) for i in order]
    if len(chosen) < k:
        # degenerate kernel: top up by popularity order
        taken = set(chosen) | exclude
        for i in range(P):
            if i not in taken:
                chosen.append(i)
                if len(chosen) == k:
                    break
        log.debug("greedy MAP hit the gain floor; filled %d by popularity",
                  k - int(len(order)))
    return chosen


def local_search_2swap(ensemble: Ensemble, subset, exclude=(),
                       max_rounds: int | None = None) -> list[int]:
    """Improve a subset by single-item swaps until no swap raises det L_S.

    Each round scans selected x outside pairs and applies the best
    improving swap; stops at a local optimum or after max_rounds
    (defaults to 10x the subset size).  Determinant ratios are computed
    from the subset kernel inverse, refreshed after every applied swap.
    """
    L = ensemble.L
    P = L.shape[0]
    subset = [int(i) for i in subset]
    k = len(subset)
    if k == 0:
        return []
    if max_rounds is None:
        max_rounds = 10 * k
    banned = set(int(i) for i in exclude) | set(subset)
    outside = np.array([i for i in range(P) if i not in banned],
                       dtype=np.int64)
    if outside.size == 0:
        return subset
    sel = np.array(subset, dtype=np.int64)
    for _ in range(max_rounds):
        L_ss = L[np.ix_(sel, sel)]
        sign, _ = np.linalg.slogdet(L_ss)
        if sign <= 0:
            # singular current subset: bail out rather than divide by it
            log.debug("local search stopped on singular subset kernel")
            break
        inv = np.linalg.inv(L_ss)
        # best removal/insertion pair via determinant ratio:
        # det(S - s + o) / det(S) = det(M) entries built from inv blocks
        best_gain = 1.0 + SWAP_GAIN
        best = None
        L_so = L[np.ix_(sel, outside)]  # k x n_out
        diag_o = L[outside, outside]
        W = inv @ L_so
        # self terms: removing row a and adding column o
        quad = np.einsum("ij,ij->j", L_so, W)  # l^T inv l per outside item
        for a in range(k):
            denom = inv[a, a]
            if denom <= 0:
                continue
            # det(S - a + o) / det(S) = inv_aa (L_oo - l^T inv l) + (inv_a l)^2
            # from the remove-then-add block identities on the inverse
            t = inv[a] @ L_so
            ratio = (diag_o - quad) * denom + t * t
            idx = int(np.argmax(ratio))
            if ratio[idx] > best_gain:
                best_gain = float(ratio[idx])
                best = (a, idx)
        if best is None:
            break
        a, o_idx = best
        newcomer = int(outside[o_idx])
        leaver = int(sel[a])
        sel[a] = newcomer
        outside[o_idx] = leaver
        log.debug("2-swap: %d -> %d (det ratio %.3g)", leaver, newcomer,
                  best_gain)
    return [int(i) for i in sel]
