"""User response model: experience probability and simulated raters.

An item at distance c from the user point is experienced with

    p = w * squash(1/c - kappa / (sqrt(d) - c))

where w is the item's popularity weight and squash is the logistic
sigmoid (or a clamped tanh variant).  The probability is 1 * w at c = 0,
falls monotonically, and hits 0 at the box diagonal sqrt(d).
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

SQUASHES = ("sigmoid", "tanh")


class Rating(enum.Enum):
    LIKE = "+1"
    DISLIKE = "-1"
    NA = "NA"


def _squash(t: np.ndarray, kind: str) -> np.ndarray:
    if kind == "sigmoid":
        # guard exp overflow for very negative t
        out = np.empty_like(t)
        pos = t >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
        e = np.exp(t[~pos])
        out[~pos] = e / (1.0 + e)
        return out
    if kind == "tanh":
        return np.maximum(np.tanh(t), 0.0)
    raise ValueError(f"unknown squash {kind!r}")


def experience_probability(distance, weight, kappa: float, dim: int,
                           squash: str = "sigmoid"):
    """Probability that an item at the given center distance was
    experienced; accepts scalars or aligned arrays.

    Valid for distances in [0, sqrt(dim)]; the boundary cases pin to
    weight (at 0) and 0 (at sqrt(dim)).
    """
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    if squash not in SQUASHES:
        raise ValueError(f"unknown squash {squash!r}")
    c = np.asarray(distance, dtype=np.float64)
    w = np.asarray(weight, dtype=np.float64)
    diag = math.sqrt(dim)
    if np.any(c < 0) or np.any(c > diag):
        raise ValueError("distance outside [0, sqrt(dim)]")
    scalar = c.ndim == 0
    c = np.atleast_1d(c)
    w = np.broadcast_to(np.atleast_1d(w), c.shape)
    out = np.empty_like(c)
    at_zero = c == 0.0
    at_diag = c == diag
    mid = ~at_zero & ~at_diag
    with np.errstate(divide="ignore", over="ignore"):
        t = 1.0 / c[mid] - kappa / (diag - c[mid])
    out[mid] = w[mid] * _squash(t, squash)
    out[at_zero] = w[at_zero]  # squash(+inf) = 1 for both kinds
    out[at_diag] = 0.0
    np.clip(out, 0.0, 1.0, out=out)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class SimulatedUser:
    """Ground-truth rater: fixed point, experience draw, liked head."""

    true_embedding: np.ndarray
    kappa: float
    experienced: np.ndarray  # bool per catalog item
    liked: np.ndarray  # item indices, the k_rel nearest
    flip_prob: float
    seed: int
    liked_set: frozenset = field(repr=False, default=frozenset())
    experienced_set: frozenset = field(repr=False, default=frozenset())

    @property
    def disliked_set(self) -> frozenset:
        return self.experienced_set - self.liked_set


def generate_user(catalog, kappa: float, k_rel: int, flip_prob: float,
                  seed: int, true_embedding=None) -> SimulatedUser:
    """Draw a user point, its experience mask, and its liked ground truth.

    The liked set is the k_rel catalog items nearest the point (ties to
    the lower index) regardless of experience; those items are marked
    experienced as a consistency repair, since a liked-but-unseen item
    would contradict the response model.  The rest of the experience
    mask is one Bernoulli draw per item from the distance/popularity
    model; disliked is experienced-minus-liked.
    """
    if not 0.0 <= flip_prob <= 1.0:
        raise ValueError("flip_prob must lie in [0, 1]")
    if k_rel < 1:
        raise ValueError("k_rel must be positive")
    rng = np.random.default_rng([seed, 0x7E5E])
    d = catalog.dim
    if true_embedding is None:
        true_embedding = rng.uniform(0.0, 1.0, d)
    else:
        true_embedding = np.asarray(true_embedding, dtype=np.float64)
        if true_embedding.shape != (d,):
            raise ValueError("true embedding dimension mismatch")
    dist = np.linalg.norm(catalog.embeddings - true_embedding, axis=1)
    dist = np.minimum(dist, math.sqrt(d))  # corner points can round past
    probs = experience_probability(dist, catalog.weights, kappa, d)
    experienced = rng.random(catalog.n_items) < probs
    order = np.argsort(dist, kind="stable")
    liked = np.sort(order[:min(k_rel, catalog.n_items)])
    experienced[liked] = True  # liked items count as experienced
    return SimulatedUser(
        true_embedding=true_embedding,
        kappa=kappa,
        experienced=experienced,
        liked=liked,
        flip_prob=flip_prob,
        seed=seed,
        liked_set=frozenset(int(i) for i in liked),
        experienced_set=frozenset(np.flatnonzero(experienced).tolist()),
    )


def rate_item(user: SimulatedUser, item: int, rng: np.random.Generator)\
        -> Rating:
    """LIKE for liked items, DISLIKE for experienced-but-not-liked,
    NA otherwise; signed answers flip with probability flip_prob.

    Consumes at most one uniform draw, and only for signed answers.
    """
    if item in user.liked_set:
        base = Rating.LIKE
    elif item in user.experienced_set:
        base = Rating.DISLIKE
    else:
        return Rating.NA
    if user.flip_prob > 0.0 and rng.random() < user.flip_prob:
        return Rating.DISLIKE if base is Rating.LIKE else Rating.LIKE
    return base
