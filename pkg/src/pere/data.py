"""Catalog ingestion, normalization, synthesis, and run configuration.

Canonical catalog file: UTF-8 CSV with header ``id,weight,e0,...,e{d-1}``,
LF line endings, decimal dot, floats at full round-trip precision.  On
load, weights are divided by their max and rows re-sorted by weight
descending; any embedding column with values outside [0, 1] is min-max
rescaled (the affine map is recorded in ``norm_meta``).  Loading an
already-canonical file is a no-op, so save(load(x)) round-trips
bit-exact.
"""

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import CatalogFormatError, ConfigError

log = logging.getLogger(__name__)

DEFAULT_POPULAR = 1000


@dataclass(frozen=True)
class Catalog:
    """Items sorted by popularity weight descending."""

    ids: tuple
    embeddings: np.ndarray  # (N, d) in [0, 1]
    weights: np.ndarray  # (N,) in [0, 1], non-increasing
    popular_count: int
    norm_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        emb = np.asarray(self.embeddings, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "embeddings", emb)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "ids", tuple(self.ids))
        if emb.ndim != 2 or emb.shape[0] != len(self.ids):
            raise ValueError("embeddings must be (n_items, dim)")
        if w.shape != (emb.shape[0],):
            raise ValueError("weights must align with items")
        if np.any(w[:-1] < w[1:]):
            raise ValueError("weights must be non-increasing")
        if np.any((w < 0) | (w > 1)):
            raise ValueError("weights must lie in [0, 1]")
        if np.any((emb < 0) | (emb > 1)):
            raise ValueError("embeddings must lie in the unit box")
        if not 1 <= self.popular_count <= emb.shape[0]:
            raise ValueError("popular_count outside 1..n_items")

    @property
    def n_items(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]


def _parse_row(row, n_fields, has_weight, line_no):
    if len(row) != n_fields:
        raise CatalogFormatError(
            f"line {line_no}: expected {n_fields} fields, got {len(row)}",
            line=line_no)
    try:
        weight = float(row[1]) if has_weight else 1.0
        emb = [float(x) for x in row[2 if has_weight else 1:]]
    except ValueError as err:
        raise CatalogFormatError(f"line {line_no}: {err}",
                                 line=line_no) from err
    return row[0], weight, emb


def load_catalog(path, popular_count: int | None = None) -> Catalog:
    """Read and normalize a catalog CSV; see the module docstring."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CatalogFormatError("empty file", line=0) from None
        if len(header) < 2 or header[0] != "id":
            raise CatalogFormatError(
                f"bad header {header!r}: expected id,weight,e0,...", line=1)
        has_weight = header[1] == "weight"
        emb_names = header[2:] if has_weight else header[1:]
        d = len(emb_names)
        if d == 0 or emb_names != [f"e{j}" for j in range(d)]:
            raise CatalogFormatError(
                f"bad embedding columns {emb_names!r}", line=1)
        if not has_weight:
            log.warning("catalog %s has no weight column; using uniform 1.0",
                        path)
        ids, weights, embs = [], [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            item_id, w, e = _parse_row(row, len(header), has_weight, line_no)
            ids.append(item_id)
            weights.append(w)
            embs.append(e)
    if not ids:
        raise CatalogFormatError("no data rows", line=1)
    emb = np.array(embs, dtype=np.float64)
    w = np.array(weights, dtype=np.float64)
    if np.any(w < 0):
        raise CatalogFormatError("negative weight")
    w_max = w.max()
    if w_max > 0:
        w = w / w_max
    else:
        log.warning("all weights zero; using uniform 1.0")
        w = np.ones_like(w)
    norm_meta = {}
    for j in range(d):
        col = emb[:, j]
        lo, hi = float(col.min()), float(col.max())
        if lo < 0.0 or hi > 1.0:
            span = hi - lo
            emb[:, j] = (col - lo) / span if span > 0 else 0.5
            norm_meta[f"e{j}"] = (lo, hi)
    if norm_meta:
        log.info("rescaled %d embedding columns into [0,1]", len(norm_meta))
    order = np.argsort(-w, kind="stable")
    if not np.array_equal(order, np.arange(len(ids))):
        emb = emb[order]
        w = w[order]
        ids = [ids[i] for i in order]
    if popular_count is None:
        popular_count = min(DEFAULT_POPULAR, len(ids))
    return Catalog(ids=tuple(ids), embeddings=emb, weights=w,
                   popular_count=popular_count, norm_meta=norm_meta)


def save_catalog(catalog: Catalog, path) -> None:
    """Write the canonical CSV form (LF endings, shortest exact floats)."""
    path = Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    d = catalog.dim
    writer.writerow(["id", "weight"] + [f"e{j}" for j in range(d)])
    for i, item_id in enumerate(catalog.ids):
        writer.writerow([item_id, repr(float(catalog.weights[i]))]
                        + [repr(float(x)) for x in catalog.embeddings[i]])
    path.write_text(buf.getvalue(), encoding="utf-8")


def synth_catalog(n_items: int, dim: int, clusters: int, seed: int,
                  popular_count: int | None = None) -> Catalog:
    """Gaussian-mixture catalog with Zipf popularity, deterministic per seed.

    Cluster means are drawn with a minimum pairwise separation when the
    box allows it; weights follow 1/rank assigned to items at random, so
    popularity is independent of cluster structure.
    """
    if not 1 <= clusters <= n_items:
        raise ValueError("need n_items >= clusters >= 1")
    if dim < 1:
        raise ValueError("dim must be positive")
    rng = np.random.default_rng([seed, 0xCA7])
    target_sep = 0.4 if clusters > 1 else 0.0
    best_means, best_sep = None, -1.0
    for _ in range(200):
        means = rng.uniform(0.15, 0.85, (clusters, dim))
        if clusters == 1:
            best_means = means
            break
        diff = means[:, None, :] - means[None, :, :]
        sep = np.sqrt((diff ** 2).sum(-1))
        sep = sep[~np.eye(clusters, dtype=bool)].min()
        if sep > best_sep:
            best_means, best_sep = means, sep
        if sep >= target_sep:
            break
    assign = rng.integers(0, clusters, n_items)
    emb = best_means[assign] + rng.normal(0.0, 0.06, (n_items, dim))
    emb = np.clip(emb, 0.0, 1.0)
    ranks = rng.permutation(n_items) + 1
    w = 1.0 / ranks
    order = np.argsort(-w, kind="stable")
    emb = emb[order]
    w = w[order]
    ids = tuple(f"item-{i:05d}" for i in range(n_items))
    if popular_count is None:
        popular_count = min(DEFAULT_POPULAR, n_items)
    return Catalog(ids=ids, embeddings=emb, weights=w,
                   popular_count=popular_count, norm_meta={})


SQUASH_CHOICES = ("sigmoid", "tanh")
STRATEGY_CHOICES = ("pere", "dpp-only", "cdpp", "random", "popularity",
                    "kmedoids")


@dataclass(frozen=True)
class Config:
    """Pipeline parameters; defaults follow the reference setup."""

    K: int = 50
    m: int = 10
    T: int = 5
    P: int = 1000
    k_rec: int = 50
    k_rel: int = 50
    kappa: float = 1.5
    tau: float = 0.0
    squash: str = "sigmoid"
    seed: int = 0
    strategy: str = "pere"
    tolerant_mode: bool = False

    def __post_init__(self):
        if self.K < 1 or self.m < 1 or self.T < 0:
            raise ConfigError("need K >= 1, m >= 1, T >= 0")
        if self.P < self.K:
            raise ConfigError("need K <= P")
        if self.k_rec < 1 or self.k_rel < 1:
            raise ConfigError("k_rec and k_rel must be positive")
        if self.kappa < 0:
            raise ConfigError("kappa must be non-negative")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError("tau must lie in [0, 1]")
        if self.squash not in SQUASH_CHOICES:
            raise ConfigError(f"squash must be one of {SQUASH_CHOICES}")
        if self.strategy not in STRATEGY_CHOICES:
            raise ConfigError(f"strategy must be one of {STRATEGY_CHOICES}")

    def validate_against(self, catalog: Catalog) -> None:
        if self.P > catalog.n_items:
            raise ConfigError(f"P={self.P} exceeds catalog size"
                              f" {catalog.n_items}")


_CONFIG_FIELDS = {f for f in Config.__dataclass_fields__}


def load_config(path) -> Config:
    """Read a TOML or JSON config; unknown keys are rejected."""
    path = Path(path)
    try:
        if path.suffix == ".json":
            raw = json.loads(path.read_text(encoding="utf-8"))
        else:
            with path.open("rb") as fh:
                raw = tomllib.load(fh)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as err:
        raise ConfigError(f"cannot parse {path}: {err}") from err
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table/object")
    unknown = set(raw) - _CONFIG_FIELDS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return Config(**raw)
    except TypeError as err:
        raise ConfigError(str(err)) from err
