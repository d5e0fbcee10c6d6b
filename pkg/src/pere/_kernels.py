"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The JIT path is used when numba imports cleanly and the environment
variable ``PERE_NUMBA`` is not set to ``0``.  Both implementations are
kept importable so benchmarks can compare them directly.
"""

import os

import numpy as np

_ZERO_NORM = 1e-12

try:
    import numba as _nb

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _nb = None
    _HAVE_NUMBA = False

NUMBA_ENABLED = _HAVE_NUMBA and os.environ.get("PERE_NUMBA", "1") != "0"


def _hyperplane_gap_sums_py(cand: np.ndarray, rated: np.ndarray,
                            center: np.ndarray) -> np.ndarray:
    """Sum over rated items of the candidate/rated cut distance at center.

    For candidate v_i and rated v_j the cut between them has normal
    2(v_j - v_i) and offset |v_j|^2 - |v_i|^2; the distance from the
    center to that hyperplane is |a_j - a_i| / (2 |v_j - v_i|) with
    a_x = 2 x.center - |x|^2.  Pairs with near-identical embeddings are
    skipped.
    """
    sq_c = np.einsum("ij,ij->i", cand, cand)
    sq_r = np.einsum("ij,ij->i", rated, rated)
    a_c = 2.0 * cand @ center - sq_c
    a_r = 2.0 * rated @ center - sq_r
    d2 = sq_c[:, None] + sq_r[None, :] - 2.0 * cand @ rated.T
    norms = 2.0 * np.sqrt(np.maximum(d2, 0.0))
    gaps = np.abs(a_r[None, :] - a_c[:, None])
    safe = norms > _ZERO_NORM
    contrib = np.where(safe, gaps / np.where(safe, norms, 1.0), 0.0)
    return contrib.sum(axis=1)


def _hyperplane_gap_sums_loop(cand, rated, center):
    n_c, d = cand.shape
    n_r = rated.shape[0]
    out = np.zeros(n_c)
    a_r = np.empty(n_r)
    for j in range(n_r):
        dot = 0.0
        sq = 0.0
        for t in range(d):
            dot += rated[j, t] * center[t]
            sq += rated[j, t] * rated[j, t]
        a_r[j] = 2.0 * dot - sq
    for i in range(n_c):
        dot = 0.0
        sq = 0.0
        for t in range(d):
            dot += cand[i, t] * center[t]
            sq += cand[i, t] * cand[i, t]
        a_i = 2.0 * dot - sq
        total = 0.0
        for j in range(n_r):
            d2 = 0.0
            for t in range(d):
                diff = rated[j, t] - cand[i, t]
                d2 += diff * diff
            norm = 2.0 * np.sqrt(d2)
            if norm > _ZERO_NORM:
                total += abs(a_r[j] - a_i) / norm
        out[i] = total
    return out


def _greedy_map_py(L: np.ndarray, k: int, blocked: np.ndarray,
                   gain_floor: float) -> tuple[np.ndarray, int]:
    """Greedy MAP for an L-ensemble via incremental Cholesky updates.

    Returns the selection order (padded with -1) and the count actually
    selected; stops early once the best marginal determinant gain drops
    to the floor.  Ties go to the lowest index.
    """
    P = L.shape[0]
    cis = np.zeros((k, P))
    di2 = np.diag(L).astype(np.float64).copy()
    di2[blocked] = -np.inf
    order = np.full(k, -1, dtype=np.int64)
    count = 0
    for step in range(k):
        best = int(np.argmax(di2))
        if not np.isfinite(di2[best]) or di2[best] <= gain_floor:
            break
        order[step] = best
        count += 1
        if step == k - 1:
            break
        d_opt = np.sqrt(di2[best])
        e = (L[best] - cis[:step, best] @ cis[:step]) / d_opt
        cis[step] = e
        di2 -= e * e
        di2[best] = -np.inf
    return order, count


def _greedy_map_loop(L, k, blocked, gain_floor):
    P = L.shape[0]
    cis = np.zeros((k, P))
    di2 = np.empty(P)
    for i in range(P):
        di2[i] = L[i, i]
        if blocked[i]:
            di2[i] = -np.inf
    order = np.full(k, -1, dtype=np.int64)
    count = 0
    for step in range(k):
        best = -1
        best_val = -np.inf
        for i in range(P):
            # strict > keeps the lowest index on ties
            if di2[i] > best_val:
                best_val = di2[i]
                best = i
        if best < 0 or best_val <= gain_floor:
            break
        order[step] = best
        count += 1
        if step == k - 1:
            break
        d_opt = np.sqrt(best_val)
        for i in range(P):
            if di2[i] == -np.inf:
                continue
            dot = 0.0
            for s in range(step):
                dot += cis[s, best] * cis[s, i]
            e = (L[best, i] - dot) / d_opt
            cis[step, i] = e
            di2[i] -= e * e
        di2[best] = -np.inf
    return order, count


if _HAVE_NUMBA:
    _hyperplane_gap_sums_nb = _nb.njit(cache=True)(_hyperplane_gap_sums_loop)
    _greedy_map_nb = _nb.njit(cache=True)(_greedy_map_loop)
else:  # pragma: no cover
    _hyperplane_gap_sums_nb = _hyperplane_gap_sums_loop
    _greedy_map_nb = _greedy_map_loop


def hyperplane_gap_sums(cand, rated, center):
    cand = np.ascontiguousarray(cand, dtype=np.float64)
    rated = np.ascontiguousarray(rated, dtype=np.float64)
    center = np.ascontiguousarray(center, dtype=np.float64)
    if rated.shape[0] == 0:
        return np.zeros(cand.shape[0])
    if NUMBA_ENABLED:
        return _hyperplane_gap_sums_nb(cand, rated, center)
    return _hyperplane_gap_sums_py(cand, rated, center)


def greedy_map_order(L, k, blocked, gain_floor=1e-12):
    L = np.ascontiguousarray(L, dtype=np.float64)
    blocked = np.ascontiguousarray(blocked, dtype=np.bool_)
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    if NUMBA_ENABLED:
        order, count = _greedy_map_nb(L, k, blocked, gain_floor)
    else:
        order, count = _greedy_map_py(L, k, blocked, gain_floor)
    return order[:count]
