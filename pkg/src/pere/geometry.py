"""Preference regions in the unit box and their Chebyshev centers.

A stated preference "liked i over disliked j" pins the user point u to
the side of the perpendicular bisector of (v_i, v_j) nearer v_i:

    |u - v_i|^2 <= |u - v_j|^2   <=>   2 (v_j - v_i).u <= |v_j|^2 - |v_i|^2.

The region is the intersection of those halfspaces with [0, 1]^d.  Its
Chebyshev center is the center of the largest inscribed ball, found by
one linear program; the ball is kept inside the box as well, so the
radius also satisfies r <= u_j <= 1 - r per coordinate.

The max-radius face can leave the center underdetermined, so the center
is canonicalized: fix the optimal radius, then take the midpoint of the
coordinate-sum maximizer and minimizer.  Both are solved warm from the
radius basis, and the midpoint of two optima stays optimal by convexity.

For contradictory preference sets a tolerant variant may discard up to
floor(tau * n_cuts) cuts, chosen by an exact branch-and-bound over
big-M indicator relaxations when the cut count is small and by a greedy
drop-most-violated heuristic otherwise.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleRegionError
from .lp import FEAS_TOL, LinearProgram, SimplexProgram, solve_mip_binary

log = logging.getLogger(__name__)

CONTAIN_TOL = 1e-9
ZERO_NORMAL = 1e-12
EXACT_TOLERANT_MAX_CUTS = 24
MIP_NODE_LIMIT = 500


@dataclass(frozen=True)
class Preference:
    """Item index pair: liked wins over disliked."""

    liked: int
    disliked: int

    def __post_init__(self):
        if self.liked == self.disliked:
            raise ValueError("preference needs two distinct items")


@dataclass(frozen=True)
class Cut:
    """Halfspace normal.u <= offset with the normal's norm cached."""

    normal: np.ndarray
    offset: float
    norm: float

    def satisfied_by(self, u: np.ndarray, tol: float = CONTAIN_TOL) -> bool:
        return float(self.normal @ u) <= self.offset + tol


def cut_between(liked_emb: np.ndarray, disliked_emb: np.ndarray) -> Cut | None:
    """Bisector cut for one preference; None when the embeddings coincide."""
    normal = 2.0 * (np.asarray(disliked_emb, dtype=np.float64)
                    - np.asarray(liked_emb, dtype=np.float64))
    norm = float(np.linalg.norm(normal))
    if norm <= ZERO_NORMAL:
        return None
    offset = float(disliked_emb @ disliked_emb - liked_emb @ liked_emb)
    return Cut(normal, offset, norm)


def cuts_from_preferences(preferences, embeddings: np.ndarray) -> list[Cut]:
    """Build deduplicated cuts from (liked, disliked) index pairs.

    Pairs with identical embeddings produce no constraint and are
    dropped; exact duplicates (same normal bytes and offset) collapse
    to one cut.
    """
    n = embeddings.shape[0]
    cuts = []
    seen = set()
    dropped = 0
    for pref in preferences:
        liked, disliked = pref.liked, pref.disliked
        if not (0 <= liked < n and 0 <= disliked < n):
            raise ValueError(f"preference ({liked}, {disliked}) outside"
                             f" catalog of {n} items")
        cut = cut_between(embeddings[liked], embeddings[disliked])
        if cut is None:
            dropped += 1
            continue
        key = (cut.normal.tobytes(), cut.offset)
        if key in seen:
            continue
        seen.add(key)
        cuts.append(cut)
    if dropped:
        log.debug("dropped %d zero-normal preference pairs", dropped)
    return cuts


@dataclass(frozen=True)
class Region:
    """Preference polytope with its canonical inscribed-ball summary."""

    dim: int
    cuts: tuple[Cut, ...]
    center: np.ndarray
    radius: float


def cut_distance(u: np.ndarray, cut: Cut) -> float:
    """Euclidean distance from u to the cut's hyperplane."""
    if cut.norm <= ZERO_NORMAL:
        raise ValueError("cut normal is numerically zero")
    return abs(float(cut.normal @ u) - cut.offset) / cut.norm


def contains(region: Region, u: np.ndarray, tol: float = CONTAIN_TOL) -> bool:
    """Whether u lies in the box and satisfies every cut, within tol."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (region.dim,):
        raise ValueError(f"point has shape {u.shape}, expected"
                         f" ({region.dim},)")
    if np.any(u < -tol) or np.any(u > 1.0 + tol):
        return False
    return all(c.satisfied_by(u, tol) for c in region.cuts)


def _center_rows(dim: int, cuts) -> tuple[np.ndarray, np.ndarray]:
    """Rows of the inscribed-ball LP over variables (u, r)."""
    n_cuts = len(cuts)
    A = np.zeros((n_cuts + 2 * dim, dim + 1))
    b = np.empty(n_cuts + 2 * dim)
    for i, cut in enumerate(cuts):
        A[i, :dim] = cut.normal
        A[i, dim] = cut.norm
        b[i] = cut.offset
    for j in range(dim):
        r0 = n_cuts + 2 * j
        A[r0, j] = -1.0
        A[r0, dim] = 1.0
        b[r0] = 0.0
        A[r0 + 1, j] = 1.0
        A[r0 + 1, dim] = 1.0
        b[r0 + 1] = 1.0
    return A, b


def _most_violated(point: np.ndarray, cuts) -> int:
    slack = [float(c.normal @ point) - c.offset for c in cuts]
    return int(np.argmax(slack))


def _solve_center(dim: int, cuts) -> tuple[np.ndarray, float]:
    """Canonical inscribed-ball center and radius, or raise when empty."""
    A, b = _center_rows(dim, cuts)
    lower = np.zeros(dim + 1)
    upper = np.append(np.ones(dim), np.inf)
    prog = SimplexProgram(A, b, lower, upper)
    c_r = np.zeros(dim + 1)
    c_r[dim] = 1.0
    stage1 = prog.maximize(c_r)
    if stage1.status != "optimal":
        worst = _most_violated(np.clip(stage1.x[:dim], 0.0, 1.0), cuts)
        raise InfeasibleRegionError(
            "preference cuts admit no point in the unit box",
            most_violated=worst)
    radius = stage1.objective_value
    prog.pin(dim, radius)
    c_sum = np.append(np.ones(dim), 0.0)
    hi = prog.maximize(c_sum)
    lo = prog.maximize(-c_sum)
    center = (hi.x[:dim] + lo.x[:dim]) / 2.0
    return center, radius


def build_region(dim: int, cuts) -> Region:
    """Solve for the canonical center and package the region."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    cuts = tuple(cuts)
    center, radius = _solve_center(dim, cuts)
    return Region(dim=dim, cuts=cuts, center=center, radius=radius)


def chebyshev_center(region: Region) -> tuple[np.ndarray, float]:
    """Canonical max inscribed ball of the region's cut system."""
    return _solve_center(region.dim, region.cuts)


@dataclass(frozen=True)
class TolerantCenter:
    center: np.ndarray
    radius: float
    violated: frozenset[int]  # cut indices relaxed away
    exact: bool  # False when the greedy fallback chose the set


def _ball_violates(center, radius, cut) -> bool:
    reach = float(cut.normal @ center) + cut.norm * radius
    return reach > cut.offset + FEAS_TOL


def chebyshev_center_tolerant(region: Region, tau: float) -> TolerantCenter:
    """Largest inscribed ball allowed to discard a tau-fraction of cuts.

    Relaxation slots are binary indicators with a big-M of 4 * dim,
    which exceeds any cut row's worst-case excess over the box, so an
    active indicator fully disables its row.  With at most
    EXACT_TOLERANT_MAX_CUTS cuts the indicator set is optimized exactly
    by branch-and-bound; beyond that a greedy loop drops the most
    violated cut until the strict solve succeeds.  The reported set
    keeps only indices whose cut the final ball actually breaks.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    if len(region.cuts) == 0:
        raise ValueError("tolerant solve needs at least one cut")
    return tolerant_center_with_budget(
        region, int(np.floor(tau * len(region.cuts))))


def tolerant_center_with_budget(region: Region, budget: int)\
        -> TolerantCenter:
    """chebyshev_center_tolerant with the discard count given directly."""
    cuts = region.cuts
    n_cuts = len(cuts)
    if not 0 <= budget <= n_cuts:
        raise ValueError("budget outside 0..n_cuts")
    if budget == 0:
        center, radius = _solve_center(region.dim, cuts)
        return TolerantCenter(center, radius, frozenset(), exact=True)
    if n_cuts <= EXACT_TOLERANT_MAX_CUTS:
        return _tolerant_exact(region.dim, cuts, budget)
    return _tolerant_greedy(region.dim, cuts, budget)


def _tolerant_exact(dim, cuts, budget) -> TolerantCenter:
    n_cuts = len(cuts)
    big_m = 4.0 * dim
    n_vars = dim + 1 + n_cuts  # u, r, indicators
    A_core, b_core = _center_rows(dim, cuts)
    A = np.zeros((A_core.shape[0], n_vars))
    A[:, :dim + 1] = A_core
    for i in range(n_cuts):
        A[i, dim + 1 + i] = -big_m
    objective = np.zeros(n_vars)
    objective[dim] = 1.0
    lower = np.zeros(n_vars)
    upper = np.concatenate([np.ones(dim), [np.inf], np.ones(n_cuts)])
    lp = LinearProgram(objective, A, b_core, lower, upper)
    sol = solve_mip_binary(lp, range(dim + 1, n_vars), budget,
                           max_nodes=MIP_NODE_LIMIT)
    if sol.status == "node_limit" and np.isnan(sol.x).any():
        log.debug("tolerant search hit the node limit with no incumbent; "
                  "falling back to greedy relaxation")
        return _tolerant_greedy(dim, cuts, budget)
    if sol.status not in ("optimal", "node_limit"):
        raise InfeasibleRegionError(
            "no feasible ball within the relaxation budget")
    dropped = [i for i in range(n_cuts) if sol.assignment[i] == 1]
    kept = [c for i, c in enumerate(cuts) if i not in set(dropped)]
    center, radius = _solve_center(dim, kept)
    violated = frozenset(i for i in dropped
                         if _ball_violates(center, radius, cuts[i]))
    return TolerantCenter(center, radius, violated,
                          exact=sol.status == "optimal")


def _tolerant_greedy(dim, cuts, budget) -> TolerantCenter:
    active = list(range(len(cuts)))
    dropped = []
    while True:
        try:
            center, radius = _solve_center(dim, [cuts[i] for i in active])
            violated = frozenset(i for i in dropped
                                 if _ball_violates(center, radius, cuts[i]))
            return TolerantCenter(center, radius, violated, exact=False)
        except InfeasibleRegionError as err:
            if len(dropped) >= budget:
                raise InfeasibleRegionError(
                    "relaxation budget exhausted before feasibility",
                    most_violated=err.most_violated) from err
            worst = active[err.most_violated]
            active.remove(worst)
            dropped.append(worst)
            log.debug("greedy tolerant solve dropped cut %d", worst)
