import json

import numpy as np
import pytest

import tagsiege


def test_generate_is_deterministic_and_balanced():
    g = tagsiege.generate(nodes=60, classes=3, seed=2)
    assert g.node_count == 60
    assert g == tagsiege.generate(nodes=60, classes=3, seed=2)
    counts = np.bincount(g.labels)
    assert counts.max() - counts.min() <= 1
    assert all(u < v for u, v in g.edges)


def test_save_load_round_trip(tmp_path):
    g = tagsiege.generate(nodes=40, seed=1)
    g.save(tmp_path / "g")
    assert tagsiege.load_graph(tmp_path / "g") == g


def test_tfidf_and_homophily():
    g = tagsiege.generate(nodes=80, seed=3)
    x, terms = tagsiege.tfidf(g)
    assert x.shape == (80, len(terms))
    h = tagsiege.homophily_edge(g, x)
    assert 0.0 <= h <= 1.0
    assert tagsiege.homophily_edge(g, np.ones_like(x)) == pytest.approx(1.0)


def test_retrieval_matches_numpy():
    rng = np.random.default_rng(0)
    z = rng.normal(size=(30, 4))
    got = tagsiege.retrieve_influencers(z, 0, 5)
    norm = z / np.linalg.norm(z, axis=1, keepdims=True)
    dis = 1.0 - norm @ norm[0]
    dis[0] = -np.inf
    order = sorted(range(30), key=lambda i: (-dis[i], i))[:5]
    assert [n for n, _ in got] == order


def test_errors_carry_kind():
    with pytest.raises(tagsiege.TagsiegeError, match="config"):
        tagsiege.generate(p_in=0.001)


def test_pipeline_and_replay(tmp_path):
    data = tmp_path / "data"
    code, m = tagsiege.run("synth", out=data, nodes=120, seed=4)
    assert code == 0 and m["dataset"]["nodes"] == 120
    code, m = tagsiege.run("attack", dataset=data, out=tmp_path / "atk", targets="test:6",
                           encoder_epochs=40)
    assert code == 0
    assert m["query_count"] == 2 * m["completed"]
    code, _ = tagsiege.replay(tmp_path / "atk" / "manifest.json", out=tmp_path / "atk2")
    assert code == 0
    assert (tmp_path / "atk" / "plan.jsonl").read_bytes() == (tmp_path / "atk2" / "plan.jsonl").read_bytes()


def test_unknown_key_is_reported():
    with pytest.raises(tagsiege.TagsiegeError):
        tagsiege.run("attack", edge_budgte=1)
    assert "attack" in tagsiege.commands()
    assert tagsiege.defaults("attack")["text_budget"] == "8"
