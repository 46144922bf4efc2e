import json

import numpy as np
import pytest

from gcrwcs import synth
from gcrwcs.gcn import GcnConfig, accuracy, forward, load_features_csv, load_labels, random_split, train
from gcrwcs.graph import bfs_distances, degrees, from_edges, load_edge_list
from gcrwcs.perturb import load_vector_csv
from gcrwcs.synth import SynthSpec, barabasi_albert, make_synthetic, synth_features_labels, write_synthetic


def test_attach_one_grows_a_tree():
    g = barabasi_albert(SynthSpec(n=5, attach=1, seed=3))
    assert g.edge_count == 4
    assert (bfs_distances(g, 0) >= 0).all()


@pytest.mark.parametrize("attach", [1, 2, 3, 5])
def test_edge_count_and_connectivity(attach):
    spec = SynthSpec(n=200, attach=attach, seed=attach)
    g = barabasi_albert(spec)
    seed_clique = attach * (attach - 1) // 2
    assert g.edge_count == attach * (spec.n - attach) + seed_clique
    assert (bfs_distances(g, 0) >= 0).all()


def test_degrees_are_heavy_tailed():
    for seed in range(10):
        d = degrees(barabasi_albert(SynthSpec(n=3000, attach=2, seed=seed))) - 1
        assert d.max() > 2 * d.mean()


def test_same_seed_same_data():
    a, b = make_synthetic(SynthSpec(n=300, seed=4)), make_synthetic(SynthSpec(n=300, seed=4))
    np.testing.assert_array_equal(a.graph.indices, b.graph.indices)
    for f in ("x", "y", "w"):
        np.testing.assert_array_equal(getattr(a, f), getattr(b, f))
    c = make_synthetic(SynthSpec(n=300, seed=5))
    assert not np.array_equal(a.w, c.w)


def test_features_nonnegative_and_labels_binary():
    data = make_synthetic(SynthSpec(n=500, seed=1))
    assert (data.x >= 0).all()
    assert set(np.unique(data.y)) == {0, 1}
    assert data.important == sorted(np.argsort(-np.abs(data.w))[:2].tolist())
    imp = data.disclosed_importance()
    assert np.flatnonzero(imp).tolist() == data.important


def test_zero_weights_force_regeneration(monkeypatch):
    g = barabasi_albert(SynthSpec(n=50, seed=0))
    spec = SynthSpec(n=50, seed=0)
    with pytest.raises(RuntimeError):
        synth_features_labels(g, spec, np.random.default_rng(0), w=np.zeros(10))
    real = synth._draw_weights
    calls = []

    def zero_first(s, rng):
        calls.append(1)
        return np.zeros(s.d_features) if len(calls) == 1 else real(s, rng)

    monkeypatch.setattr(synth, "_draw_weights", zero_first)
    _, y, _, _ = synth_features_labels(g, spec, np.random.default_rng(0))
    assert len(calls) == 2 and 0 < y.sum() < 50
    monkeypatch.setattr(synth, "_draw_weights", lambda s, rng: np.zeros(s.d_features))
    with pytest.raises(RuntimeError, match="10 draws"):
        synth_features_labels(g, spec, np.random.default_rng(0))


def test_positive_weights_single_node():
    spec = SynthSpec(n=2, attach=1, d_features=3, n_important=1)
    g = from_edges(1, [])
    # one node and positive weights: every label is 1, which is single-class
    with pytest.raises(RuntimeError):
        synth_features_labels(g, spec, np.random.default_rng(0), w=np.ones(3))
    x = np.abs(np.random.default_rng(0).standard_normal((1, 3)))
    assert (x @ np.ones(3) > 0).all()


def test_positive_push_raises_sigmoid_argument():
    spec = SynthSpec(n=100, seed=2)
    g = barabasi_albert(spec)
    w = np.abs(np.random.default_rng(1).standard_normal(10))
    x = np.abs(np.random.default_rng(2).standard_normal((100, 10)))
    base = (g.adjacency_matrix() @ x + x) @ w
    x2 = x.copy()
    x2[7] += 0.5 * w
    bumped = (g.adjacency_matrix() @ x2 + x2) @ w
    assert (bumped >= base).all() and bumped[7] > base[7]


def test_written_files_load_back(tmp_path):
    spec = SynthSpec(n=120, seed=3)
    data = make_synthetic(spec)
    paths = write_synthetic(data, spec, tmp_path)
    g = load_edge_list(paths["graph"])
    np.testing.assert_array_equal(g.indices, data.graph.indices)
    np.testing.assert_array_equal(load_features_csv(paths["features"]), data.x)
    np.testing.assert_array_equal(load_labels(paths["labels"]), data.y)
    np.testing.assert_array_equal(load_vector_csv(paths["importance"]), data.disclosed_importance())
    side = json.loads(open(paths["sidecar"]).read())
    assert side["important_features"] == data.important and len(side["w"]) == 10


@pytest.mark.slow
def test_two_layer_gcn_reaches_80_percent():
    accs = []
    for seed in range(10):
        data = make_synthetic(SynthSpec(seed=seed))
        split = random_split(data.graph.n, seed)
        model = train(data.graph, data.x, data.y, split, GcnConfig(seed=seed))
        accs.append(accuracy(forward(model, data.graph, data.x), data.y, split.test))
    assert np.mean(accs) >= 0.80
