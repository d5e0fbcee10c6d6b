"""Maximum-likelihood fit of the experience decay rate kappa.

Given an experience matrix E (users x items), center distances c and
popularity weights w, the per-entry likelihood is Bernoulli with
p = w * sigmoid(1/c - kappa/(sqrt(d) - c)).  Dropping the kappa-free
additive constant sum(E log w), the negative log likelihood is

    sum_{m,i} log(1 + exp(t_mi))
      - sum_{m,i} (1 - E_mi) log(1 + exp(t_mi) - w_i),
    t_mi = kappa / (sqrt(d) - c_mi) - 1 / c_mi,

evaluated with softplus-style stabilization for large t.  The fit runs
a golden-section search over [0, kappa_max] by default; a projected
gradient descent is available as an independent cross-check.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericDomainError

GRAD_TOL = 1e-6
BRACKET_TOL = 1e-6
MAX_GRAD_ITER = 10_000
_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class ExperienceData:
    """Observed experience flags with their geometry.

    E[m, i] is 1 when user m experienced item i; distances holds the
    matching center distances and weights the per-item popularity.
    """

    E: np.ndarray  # (M, N) in {0, 1}
    distances: np.ndarray  # (M, N) in [0, sqrt(dim))
    weights: np.ndarray  # (N,) in (0, 1]
    dim: int

    def __post_init__(self):
        E = np.asarray(self.E, dtype=np.float64)
        dist = np.asarray(self.distances, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "distances", dist)
        object.__setattr__(self, "weights", w)
        if E.ndim != 2 or dist.shape != E.shape:
            raise ValueError("E and distances must be equal 2-d shapes")
        if w.shape != (E.shape[1],):
            raise ValueError("weights must match the item axis")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if np.any((E != 0) & (E != 1)):
            raise ValueError("E entries must be 0 or 1")
        diag = math.sqrt(self.dim)
        if np.any(dist <= 0) or np.any(dist >= diag):
            raise ValueError("distances must lie strictly in (0, sqrt(dim))")
        if np.any(w <= 0) or np.any(w > 1):
            raise ValueError("weights must lie in (0, 1]")


def _t_matrix(data: ExperienceData, kappa: float) -> np.ndarray:
    diag = math.sqrt(data.dim)
    return kappa / (diag - data.distances) - 1.0 / data.distances


def _check_domain(arg: np.ndarray):
    if np.any(arg <= 0):
        m, i = np.unravel_index(int(np.argmin(arg)), arg.shape)
        raise NumericDomainError(
            f"log argument {arg[m, i]:.3g} <= 0 at entry ({m}, {i});"
            " weights above 1 make the miss likelihood negative",
            indices=(int(m), int(i)))


def negative_log_likelihood(data: ExperienceData, kappa: float) -> float:
    """NLL up to the kappa-free constant; finite for kappa >= 0."""
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    t = _t_matrix(data, kappa)
    term1 = np.logaddexp(0.0, t)
    # log(1 + exp(t) - w) = t + log1p((1 - w) exp(-t)) for large t
    w = data.weights[None, :]
    big = t > 30.0
    small_arg = 1.0 + np.exp(np.where(big, 0.0, t)) - w
    # the miss term only enters where E=0, so only check those entries
    _check_domain(np.where(big | (data.E == 1.0), 1.0, small_arg))
    term2 = np.where(
        big,
        t + np.log1p((1.0 - w) * np.exp(np.where(big, -t, 0.0))),
        np.log(np.maximum(small_arg, _LOG_FLOOR)),
    )
    return float(np.sum(term1 - (1.0 - data.E) * term2))


def nll_gradient(data: ExperienceData, kappa: float) -> float:
    """d NLL / d kappa in closed form (sigmoid terms, no finite diffs)."""
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    t = _t_matrix(data, kappa)
    diag = math.sqrt(data.dim)
    g = 1.0 / (diag - data.distances)  # dt/dkappa
    sig = np.empty_like(t)
    pos = t >= 0
    sig[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    sig[~pos] = e / (1.0 + e)
    w = data.weights[None, :]
    # d/dt log(1 + exp(t) - w) = exp(t) / (1 + exp(t) - w), stabilized
    big = t > 30.0
    et = np.exp(np.where(big, 0.0, t))
    denom = np.maximum(1.0 + et - w, _LOG_FLOOR)
    frac = np.where(big, 1.0 / (1.0 + (1.0 - w) * np.exp(np.where(big, -t, 0.0))),
                    et / denom)
    grad = g * (sig - (1.0 - data.E) * frac)
    return float(np.sum(grad))


def fit_kappa(data: ExperienceData, kappa_max: float = 20.0,
              method: str = "golden") -> float:
    """Minimize the NLL over [0, kappa_max].

    "golden": golden-section search to a bracket below BRACKET_TOL.
    "gradient": projected gradient descent with backtracking, stopping
    at |gradient| < GRAD_TOL or a vanishing step; kept as an
    independent check on the golden-section result.
    """
    if kappa_max <= 0:
        raise ValueError("kappa_max must be positive")
    if method == "golden":
        return _fit_golden(data, 0.0, kappa_max)
    if method == "gradient":
        return _fit_gradient(data, kappa_max)
    raise ValueError(f"unknown method {method!r}")


def _fit_golden(data, lo, hi) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc = negative_log_likelihood(data, c)
    fd = negative_log_likelihood(data, d)
    while b - a > BRACKET_TOL:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = negative_log_likelihood(data, c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = negative_log_likelihood(data, d)
    return (a + b) / 2.0


def _fit_gradient(data, kappa_max) -> float:
    kappa = kappa_max / 2.0
    lr = 1.0
    f = negative_log_likelihood(data, kappa)
    for _ in range(MAX_GRAD_ITER):
        g = nll_gradient(data, kappa)
        if abs(g) < GRAD_TOL:
            break
        step = lr
        while step > 1e-12:
            cand = min(max(kappa - step * g, 0.0), kappa_max)
            fc = negative_log_likelihood(data, cand)
            if fc < f - 1e-12 * abs(f):
                break
            step /= 2.0
        else:
            break  # no descent step left: boundary or flat optimum
        if cand == kappa:
            break
        kappa, f = cand, fc
        lr = min(step * 2.0, 1e6)
    return kappa


def simulate_experience(n_users: int, n_items: int, dim: int, kappa: float,
                        seed: int) -> ExperienceData:
    """Synthetic experience matrix drawn from the model itself.

    User points and item embeddings are uniform in the box, weights
    follow a normalized 1/rank profile, and each E entry is one
    Bernoulli draw at the true kappa.
    """
    rng = np.random.default_rng([seed, 0xE57])
    users = rng.uniform(0.0, 1.0, (n_users, dim))
    items = rng.uniform(0.0, 1.0, (n_items, dim))
    weights = 1.0 / np.arange(1, n_items + 1)
    dist = np.linalg.norm(users[:, None, :] - items[None, :, :], axis=2)
    diag = math.sqrt(dim)
    dist = np.clip(dist, 1e-9, diag * (1.0 - 1e-12))
    with np.errstate(divide="ignore"):
        t = 1.0 / dist - kappa / (diag - dist)
    p = weights[None, :] / (1.0 + np.exp(-np.clip(t, -500, 500)))
    E = (rng.random((n_users, n_items)) < p).astype(np.float64)
    return ExperienceData(E=E, distances=dist, weights=weights, dim=dim)
