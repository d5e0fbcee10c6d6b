"""The elicitation loop: burn-in, adaptive rounds, aggregation, ranking.

A session starts with a static burn-in questionnaire (DPP MAP selection
over the popular head by default), then runs T adaptive rounds.  Each
round scores the remaining popular candidates against the incumbent
region center, asks the m lowest-scoring items, folds the answers into
the preference cut set, and re-solves the center.  The final ranking
sorts unasked items by distance to a recency-weighted average of the
per-round centers.

Candidate scores combine the surrogate experience probability with the
summed hyperplane distances a rating would create: likely-liked items
(distance indicator inside the liked shell) count their cuts against
the disliked set, likely-disliked items the reverse, and undecided
items optimistically take the smaller sum.  Empty rated sides leave the
corresponding sum as an +inf sentinel (an uninformative ask); when every
candidate is sentinel-scored, selection falls back to conditional DPP.
"""

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import dpp, geometry
from ._kernels import hyperplane_gap_sums
from .behavior import Rating, experience_probability, rate_item
from .errors import ExhaustedPoolError, InfeasibleRegionError
from .metrics import (Ranking, auc_at_k, hit_rate_at_k,
                      mean_average_precision, mrr, ndcg_at_k)

log = logging.getLogger(__name__)

BURN_IN_STRATEGIES = ("dpp", "kmedoids", "random", "popularity")


def surrogate_probability(item_emb, center, weight, dim: int,
                          squash: str = "sigmoid") -> float:
    """Experience probability estimate at the incumbent center with the
    decay rate pinned to 1; does not depend on the true kappa."""
    c = float(np.linalg.norm(np.asarray(item_emb, dtype=np.float64)
                             - np.asarray(center, dtype=np.float64)))
    c = min(c, math.sqrt(dim))
    return float(experience_probability(c, weight, 1.0, dim, squash))


def weighted_kmedoids(embeddings: np.ndarray, weights: np.ndarray,
                      k: int) -> list[int]:
    """PAM-style weighted K-medoids: minimize the total weight-scaled
    squared distance of every point to its nearest medoid.

    Starts from the k highest-weight points and applies the best
    improving (medoid, outsider) swap until none exists.  Deterministic;
    ties keep the incumbent.
    """
    n = embeddings.shape[0]
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    d2 = ((embeddings[:, None, :] - embeddings[None, :, :]) ** 2).sum(-1)
    cost_mat = weights[:, None] * d2  # cost of serving row i from medoid j
    medoids = list(range(k))

    def total_cost(meds):
        return float(cost_mat[:, meds].min(axis=1).sum())

    best_cost = total_cost(medoids)
    improved = True
    while improved:
        improved = False
        outside = [i for i in range(n) if i not in set(medoids)]
        best_swap = None
        for a in range(k):
            trial = medoids.copy()
            for o in outside:
                trial[a] = o
                c = total_cost(trial)
                if c < best_cost - 1e-12:
                    best_cost = c
                    best_swap = (a, o)
            trial[a] = medoids[a]
        if best_swap is not None:
            medoids[best_swap[0]] = best_swap[1]
            improved = True
    return sorted(medoids)


def burn_in(catalog, K: int, P: int, strategy: str = "dpp",
            seed: int = 0) -> list[int]:
    """Static opening questionnaire of K items from the top-P head."""
    if strategy not in BURN_IN_STRATEGIES:
        raise ValueError(f"strategy must be one of {BURN_IN_STRATEGIES}")
    if not 1 <= K <= P <= catalog.n_items:
        raise ValueError("need 1 <= K <= P <= catalog size")
    if strategy == "popularity":
        return list(range(K))
    if strategy == "random":
        rng = np.random.default_rng([seed, 0xB0])
        return sorted(int(i) for i in rng.choice(P, size=K, replace=False))
    if strategy == "kmedoids":
        return weighted_kmedoids(catalog.embeddings[:P],
                                 catalog.weights[:P], K)
    ens = dpp.build_ensemble(catalog.embeddings, catalog.weights, P)
    picked = dpp.greedy_map(ens, K)
    return dpp.local_search_2swap(ens, picked)


@dataclass
class Session:
    """Single-user elicitation state; single-writer per instance."""

    catalog: object
    config: object
    burn_in_items: list[int] | None = None
    ensemble: dpp.Ensemble | None = None
    k_burn: int = 0
    liked: list = field(default_factory=list)
    disliked: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    asked: set = field(default_factory=set)
    asked_order: list = field(default_factory=list)
    region: geometry.Region = None
    center_history: list = field(default_factory=list)
    outstanding: list | None = None
    radius_trace: list = field(default_factory=list)
    solve_seconds: list = field(default_factory=list)
    fallback_rounds: int = 0

    def __post_init__(self):
        self.config.validate_against(self.catalog)
        if self.burn_in_items is None:
            self.burn_in_items = burn_in(
                self.catalog, self.config.K, self.config.P,
                strategy="dpp", seed=self.config.seed)
        self.k_burn = len(self.burn_in_items)
        self.region = geometry.Region(
            dim=self.catalog.dim, cuts=(),
            center=np.full(self.catalog.dim, 0.5), radius=0.5)
        self.outstanding = list(self.burn_in_items)

    @property
    def round(self) -> int:
        """Completed adaptive rounds; 0 through burn-in."""
        return max(len(self.center_history) - 1, 0)

    @property
    def center(self) -> np.ndarray:
        return self.region.center

    def _ensemble(self) -> dpp.Ensemble:
        if self.ensemble is None:
            self.ensemble = dpp.build_ensemble(
                self.catalog.embeddings, self.catalog.weights, self.config.P)
        return self.ensemble

    def candidate_pool(self) -> np.ndarray:
        """Top-P popular items not asked yet."""
        head = np.arange(self.config.P)
        return head[~np.isin(head, list(self.asked),
                             assume_unique=False)] if self.asked else head

    def score_candidates(self):
        """Score every candidate against the incumbent center."""
        pool = self.candidate_pool()
        if pool.size == 0:
            raise ExhaustedPoolError("no unasked popular items remain")
        center = self.region.center
        emb = self.catalog.embeddings
        cand_emb = emb[pool]
        d_cand = np.linalg.norm(cand_emb - center, axis=1)
        diag = math.sqrt(self.catalog.dim)
        p_hat = experience_probability(
            np.minimum(d_cand, diag), self.catalog.weights[pool], 1.0,
            self.catalog.dim, self.config.squash)
        if self.liked:
            d_liked_max = float(
                np.linalg.norm(emb[self.liked] - center, axis=1).max())
            ind_plus = d_cand <= d_liked_max
            q_minus = hyperplane_gap_sums(cand_emb, emb[self.liked], center)
        else:
            ind_plus = np.zeros(pool.size, dtype=bool)  # max over empty: -inf
            q_minus = np.full(pool.size, np.inf)
        if self.disliked:
            d_disliked_min = float(
                np.linalg.norm(emb[self.disliked] - center, axis=1).min())
            ind_minus = d_cand >= d_disliked_min
            q_plus = hyperplane_gap_sums(cand_emb, emb[self.disliked], center)
        else:
            ind_minus = np.zeros(pool.size, dtype=bool)  # min over empty: inf
            q_plus = np.full(pool.size, np.inf)
        q_na = np.minimum(q_plus, q_minus)
        contrib = np.where(ind_plus, q_plus, 0.0) \
            + np.where(ind_minus, q_minus, 0.0) \
            + np.where(~ind_plus & ~ind_minus, q_na, 0.0)
        score = np.where(np.isfinite(contrib), (1.0 - p_hat) * contrib,
                         np.inf)
        return pool, score, p_hat, q_plus, q_minus, q_na, ind_plus, ind_minus

    def scored_rows(self):
        """Scored tuples for inspection, in pool order."""
        pool, score, p_hat, q_p, q_m, q_na, i_p, i_m = self.score_candidates()
        return [Scored(int(pool[i]), float(p_hat[i]), float(q_p[i]),
                       float(q_m[i]), float(q_na[i]), int(i_p[i]),
                       int(i_m[i]), float(score[i]))
                for i in range(pool.size)]

    def select_next(self, m: int) -> list[int]:
        """The m lowest-scoring candidates against one incumbent center.

        Ties prefer higher surrogate probability, then higher weight,
        then lower index.  Falls back to conditional DPP when every
        candidate carries the +inf sentinel.
        """
        if m < 1:
            raise ValueError("m must be positive")
        pool, score, p_hat, *_ = self.score_candidates()
        if m > pool.size:
            log.warning("requested %d items but only %d remain", m,
                        pool.size)
            m = pool.size
        if not np.isfinite(score).any():
            self.fallback_rounds += 1
            log.debug("all scores sentinel; conditional-DPP fallback")
            batch = dpp.greedy_map(self._ensemble(), m, exclude=self.asked)
        else:
            w_pool = self.catalog.weights[pool]
            order = np.lexsort((pool, -w_pool, -p_hat, score))
            batch = [int(pool[i]) for i in order[:m]]
        self.outstanding = list(batch)
        return list(batch)

    def submit_ratings(self, ratings: dict) -> None:
        """Apply one batch of answers and re-solve the region.

        Outstanding items missing from the map count as NA.  Raises for
        ratings on items outside the outstanding batch; on an infeasible
        strict solve with tolerant mode off, surfaces advice to turn it
        on.
        """
        if self.outstanding is None:
            raise ValueError("no outstanding batch to rate")
        outstanding = list(self.outstanding)
        extra = set(ratings) - set(outstanding)
        if extra:
            raise ValueError(f"ratings for unasked items: {sorted(extra)}")
        for item in outstanding:
            verdict = ratings.get(item, Rating.NA)
            if not isinstance(verdict, Rating):
                raise ValueError(f"bad rating value {verdict!r}")
            if verdict is Rating.LIKE:
                self.liked.append(item)
            elif verdict is Rating.DISLIKE:
                self.disliked.append(item)
            else:
                self.skipped.append(item)
            self.asked.add(item)
            self.asked_order.append(item)
        self.outstanding = None
        self._resolve_region()

    def _preferences(self):
        return [geometry.Preference(i, j)
                for i in self.liked for j in self.disliked]

    def _resolve_region(self) -> None:
        cuts = geometry.cuts_from_preferences(self._preferences(),
                                              self.catalog.embeddings)
        t0 = time.perf_counter()
        tolerant = (self.config.tolerant_mode or self.config.tau > 0) \
            and len(cuts) > 0
        if tolerant:
            region = self._resolve_tolerant(cuts)
        else:
            try:
                region = geometry.build_region(self.catalog.dim, cuts)
            except InfeasibleRegionError as err:
                raise InfeasibleRegionError(
                    "preferences are contradictory; enable tolerant_mode"
                    " or tau > 0 to relax conflicting cuts",
                    most_violated=err.most_violated) from err
        self.solve_seconds.append(time.perf_counter() - t0)
        self.region = region
        self.center_history.append((len(self.center_history),
                                    region.center))
        self.radius_trace.append(region.radius)

    def _resolve_tolerant(self, cuts) -> geometry.Region:
        """Relaxed solve at the configured tau; on infeasibility retry
        from a tenth of the cuts, doubling the budget until feasible."""
        shell = geometry.Region(dim=self.catalog.dim, cuts=tuple(cuts),
                                center=self.region.center,
                                radius=self.region.radius)
        n_cuts = len(cuts)
        try:
            tol = geometry.chebyshev_center_tolerant(shell, self.config.tau)
        except InfeasibleRegionError:
            budget = max(math.ceil(0.1 * n_cuts),
                         int(np.floor(self.config.tau * n_cuts)) + 1)
            while True:
                try:
                    tol = geometry.tolerant_center_with_budget(
                        shell, min(budget, n_cuts))
                    break
                except InfeasibleRegionError:
                    if budget >= n_cuts:
                        raise
                    budget = min(budget * 2, n_cuts)
                    log.debug("tolerant budget escalated to %d", budget)
        kept = tuple(c for i, c in enumerate(cuts) if i not in tol.violated)
        return geometry.Region(dim=self.catalog.dim, cuts=kept,
                               center=tol.center, radius=tol.radius)

    def aggregate_center(self) -> np.ndarray:
        """Recency-weighted center average: weight K + t*m at round t."""
        if not self.center_history:
            raise ValueError("no solved centers to aggregate")
        k, m = self.k_burn, self.config.m
        weights = np.array([k + t * m for t, _ in self.center_history],
                           dtype=np.float64)
        centers = np.stack([c for _, c in self.center_history])
        return (weights[:, None] * centers).sum(0) / weights.sum()

    def recommend(self, k: int) -> list[int]:
        """k unasked catalog items nearest the aggregated center.

        Ties prefer the higher weight, then the lower index; asks for
        more than the remaining pool return the whole pool.
        """
        if k < 1:
            raise ValueError("k must be positive")
        center = self.aggregate_center()
        pool = np.array([i for i in range(self.catalog.n_items)
                         if i not in self.asked], dtype=np.int64)
        if pool.size == 0:
            return []
        dist = np.linalg.norm(self.catalog.embeddings[pool] - center, axis=1)
        order = np.lexsort((pool, -self.catalog.weights[pool], dist))
        return [int(pool[i]) for i in order[:min(k, pool.size)]]


@dataclass(frozen=True)
class Scored:
    item: int
    p_hat: float
    q_plus: float
    q_minus: float
    q_na: float
    indicator_plus: int
    indicator_minus: int
    score: float


@dataclass(frozen=True)
class StrategyPlan:
    """How a named strategy spends the question budget K + T*m."""

    burn_strategy: str
    k_burn: int
    rounds: int
    round_mode: str | None  # "score" | "cdpp" | "random" | "popularity"


def plan_for_strategy(strategy: str, K: int, m: int, T: int) -> StrategyPlan:
    """Static baselines fold the whole budget into burn-in; adaptive
    ones keep T rounds of m."""
    if strategy == "pere":
        return StrategyPlan("dpp", K, T, "score")
    if strategy == "cdpp":
        return StrategyPlan("dpp", K, T, "cdpp")
    if strategy == "random":
        return StrategyPlan("random", K + T * m, 0, None)
    if strategy == "popularity":
        return StrategyPlan("popularity", K + T * m, 0, None)
    if strategy == "dpp-only":
        return StrategyPlan("dpp", K + T * m, 0, None)
    if strategy == "kmedoids":
        return StrategyPlan("kmedoids", K + T * m, 0, None)
    raise ValueError(f"unknown strategy {strategy!r}")


@dataclass(frozen=True)
class ExperimentResult:
    strategy: str
    user_seed: int
    rounds: int
    metrics: dict
    final_radius: float
    radius_trace: tuple
    regions: tuple
    recommendations: tuple
    solve_seconds: tuple
    fallback_rounds: int


def run_experiment(catalog, user, config, burn_in_items=None,
                   ensemble=None) -> ExperimentResult:
    """One simulated user through the full loop; deterministic per
    (config.seed, user.seed)."""
    plan = plan_for_strategy(config.strategy, config.K, config.m, config.T)
    if burn_in_items is None:
        burn_in_items = burn_in(catalog, plan.k_burn, config.P,
                                strategy=plan.burn_strategy,
                                seed=config.seed)
    session = Session(catalog, config, burn_in_items=list(burn_in_items),
                      ensemble=ensemble)
    rng_rate = np.random.default_rng([config.seed, user.seed, 0])
    rng_select = np.random.default_rng([config.seed, user.seed, 1])
    regions = []
    session.submit_ratings({i: rate_item(user, i, rng_rate)
                            for i in session.outstanding})
    regions.append(session.region)
    for _ in range(plan.rounds):
        batch = round_batch(session, plan, config.m, rng_select)
        session.submit_ratings({i: rate_item(user, i, rng_rate)
                                for i in batch})
        regions.append(session.region)
    recs = session.recommend(config.k_rec)
    ranking = Ranking(tuple(recs), frozenset(int(i) for i in user.liked))
    metric_values = {
        "hr1": hit_rate_at_k(ranking, 1),
        "auc10": auc_at_k(ranking, 10),
        "ndcg10": ndcg_at_k(ranking, 10),
        "ndcg30": ndcg_at_k(ranking, 30),
        "map": mean_average_precision(ranking),
        "mrr": mrr(ranking),
    }
    return ExperimentResult(
        strategy=config.strategy,
        user_seed=user.seed,
        rounds=session.round,
        metrics=metric_values,
        final_radius=session.region.radius,
        radius_trace=tuple(session.radius_trace),
        regions=tuple(regions),
        recommendations=tuple(recs),
        solve_seconds=tuple(session.solve_seconds),
        fallback_rounds=session.fallback_rounds,
    )


def round_batch(session: Session, plan: StrategyPlan, m: int,
                 rng: np.random.Generator) -> list[int]:
    if plan.round_mode == "score":
        return session.select_next(m)
    pool = session.candidate_pool()
    if pool.size == 0:
        raise ExhaustedPoolError("no unasked popular items remain")
    m_eff = min(m, pool.size)
    if plan.round_mode == "cdpp":
        batch = dpp.greedy_map(session._ensemble(), m_eff,
                               exclude=session.asked)
    elif plan.round_mode == "random":
        batch = [int(i) for i in rng.choice(pool, size=m_eff, replace=False)]
    elif plan.round_mode == "popularity":
        batch = [int(i) for i in pool[:m_eff]]
    else:
        raise ValueError(f"bad round mode {plan.round_mode!r}")
    session.outstanding = list(batch)
    return batch
