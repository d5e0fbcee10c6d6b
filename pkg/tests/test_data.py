"""Catalog loading/normalization, synthesis, and configuration."""

import numpy as np
import pytest
from sklearn.cluster import KMeans
from sklearn.metrics import silhouette_score

from pere.data import (
    Catalog,
    Config,
    load_catalog,
    load_config,
    save_catalog,
    synth_catalog,
)
from pere.errors import CatalogFormatError, ConfigError


def write(tmp_path, text, name="cat.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_normalizes_weights(tmp_path):
    p = write(tmp_path, "id,weight,e0\na,10,0.1\nb,5,0.9\n")
    cat = load_catalog(p)
    assert cat.ids == ("a", "b")
    assert cat.weights.tolist() == [1.0, 0.5]


def test_load_rescales_out_of_box_column(tmp_path):
    p = write(tmp_path, "id,weight,e0,e1\na,2,1.2,0.5\nb,1,0.0,0.25\n")
    cat = load_catalog(p)
    assert cat.embeddings[:, 0].max() == 1.0
    assert cat.embeddings[:, 0].min() == 0.0
    # in-range column untouched
    assert cat.embeddings[:, 1].tolist() == [0.5, 0.25]
    assert "e0" in cat.norm_meta and "e1" not in cat.norm_meta


def test_load_resorts_by_weight(tmp_path):
    p = write(tmp_path, "id,weight,e0\nlow,1,0.1\nhigh,4,0.9\n")
    cat = load_catalog(p)
    assert cat.ids == ("high", "low")
    assert cat.weights.tolist() == [1.0, 0.25]


def test_load_missing_weight_column_uniform(tmp_path, caplog):
    p = write(tmp_path, "id,e0\na,0.1\nb,0.9\n")
    with caplog.at_level("WARNING"):
        cat = load_catalog(p)
    assert cat.weights.tolist() == [1.0, 1.0]
    assert any("weight" in m for m in caplog.messages)


def test_load_errors(tmp_path):
    with pytest.raises(CatalogFormatError):
        load_catalog(write(tmp_path, ""))
    with pytest.raises(CatalogFormatError):
        load_catalog(write(tmp_path, "name,weight,e0\na,1,0.5\n"))
    with pytest.raises(CatalogFormatError):
        load_catalog(write(tmp_path, "id,weight,x0\na,1,0.5\n"))
    with pytest.raises(CatalogFormatError):
        load_catalog(write(tmp_path, "id,weight,e0\n"))
    with pytest.raises(CatalogFormatError):
        load_catalog(write(tmp_path, "id,weight,e0\na,1,0.5\nb,-2,0.5\n"))
    err = None
    try:
        load_catalog(write(tmp_path, "id,weight,e0\na,1,0.5\nb,oops,0.5\n"))
    except CatalogFormatError as exc:
        err = exc
    assert err is not None and err.line == 3
    try:
        load_catalog(write(tmp_path, "id,weight,e0\na,1,0.5,9\n"))
    except CatalogFormatError as exc:
        assert exc.line == 2


def test_round_trip_bit_exact(tmp_path):
    src = write(tmp_path,
                "id,weight,e0,e1\na,7,0.125,0.3333333333333333\n"
                "b,3,0.875,0.1\nc,1,0.5,0.9\n")
    cat = load_catalog(src)
    out1 = tmp_path / "canon1.csv"
    out2 = tmp_path / "canon2.csv"
    save_catalog(cat, out1)
    reloaded = load_catalog(out1)
    save_catalog(reloaded, out2)
    assert out1.read_bytes() == out2.read_bytes()
    assert np.array_equal(cat.embeddings, reloaded.embeddings)
    assert np.array_equal(cat.weights, reloaded.weights)
    assert cat.ids == reloaded.ids


def test_normalization_idempotent(tmp_path):
    src = write(tmp_path, "id,weight,e0\na,4,0.2\nb,2,0.8\n")
    first = load_catalog(src)
    canon = tmp_path / "canon.csv"
    save_catalog(first, canon)
    second = load_catalog(canon)
    assert np.array_equal(first.embeddings, second.embeddings)
    assert np.array_equal(first.weights, second.weights)
    assert second.norm_meta == {}


def test_catalog_validation():
    with pytest.raises(ValueError):
        Catalog(ids=("a", "b"), embeddings=np.ones((2, 2)),
                weights=np.array([0.5, 1.0]), popular_count=2)
    with pytest.raises(ValueError):
        Catalog(ids=("a",), embeddings=np.array([[1.5]]),
                weights=np.array([1.0]), popular_count=1)
    with pytest.raises(ValueError):
        Catalog(ids=("a",), embeddings=np.array([[0.5]]),
                weights=np.array([1.0]), popular_count=2)


def test_synth_single_item():
    cat = synth_catalog(1, 2, 1, seed=0)
    assert cat.n_items == 1
    assert cat.weights.tolist() == [1.0]
    assert cat.embeddings.shape == (1, 2)


def test_synth_deterministic():
    a = synth_catalog(40, 3, 2, seed=9)
    b = synth_catalog(40, 3, 2, seed=9)
    assert np.array_equal(a.embeddings, b.embeddings)
    assert np.array_equal(a.weights, b.weights)
    c = synth_catalog(40, 3, 2, seed=10)
    assert not np.array_equal(a.embeddings, c.embeddings)


def test_synth_zipf_weights():
    cat = synth_catalog(25, 2, 1, seed=3)
    expected = 1.0 / np.arange(1, 26)
    assert cat.weights == pytest.approx(expected)
    assert np.all(cat.embeddings >= 0.0) and np.all(cat.embeddings <= 1.0)


def test_synth_two_clusters_separate():
    cat = synth_catalog(300, 2, 2, seed=5)
    labels = KMeans(n_clusters=2, n_init=10,
                    random_state=0).fit_predict(cat.embeddings)
    assert silhouette_score(cat.embeddings, labels) > 0.5


def test_synth_validation():
    with pytest.raises(ValueError):
        synth_catalog(2, 2, 3, seed=0)
    with pytest.raises(ValueError):
        synth_catalog(2, 0, 1, seed=0)


def test_config_defaults_and_validation():
    cfg = Config()
    assert (cfg.K, cfg.m, cfg.T) == (50, 10, 5)
    for bad in (
        dict(K=0),
        dict(m=0),
        dict(T=-1),
        dict(K=20, P=10),
        dict(k_rec=0),
        dict(k_rel=0),
        dict(kappa=-1.0),
        dict(tau=1.5),
        dict(squash="relu"),
        dict(strategy="oracle"),
    ):
        with pytest.raises(ConfigError):
            Config(**bad)


def test_config_validate_against_catalog():
    cat = synth_catalog(30, 2, 1, seed=1)
    Config(K=5, P=30).validate_against(cat)
    with pytest.raises(ConfigError):
        Config(K=5, P=31).validate_against(cat)


def test_load_config_toml_and_json(tmp_path):
    toml = tmp_path / "run.toml"
    toml.write_text('K = 5\nP = 20\nstrategy = "random"\n')
    cfg = load_config(toml)
    assert (cfg.K, cfg.P, cfg.strategy) == (5, 20, "random")
    js = tmp_path / "run.json"
    js.write_text('{"K": 6, "P": 25, "tau": 0.1}')
    cfg = load_config(js)
    assert (cfg.K, cfg.P, cfg.tau) == (6, 25, 0.1)


def test_load_config_rejects_unknown_keys(tmp_path):
    js = tmp_path / "run.json"
    js.write_text('{"K": 6, "mystery": 1}')
    with pytest.raises(ConfigError) as exc:
        load_config(js)
    assert "mystery" in str(exc.value)


def test_load_config_parse_errors(tmp_path):
    bad = tmp_path / "run.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(arr)
    with pytest.raises(ConfigError):
        badtoml = tmp_path / "run.toml"
        badtoml.write_text("K = = 5")
        load_config(badtoml)
