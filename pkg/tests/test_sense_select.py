import math

import numpy as np
import pytest

from senseforge.clustering import kmeans_adaptive, kmeans_assign
from senseforge.sense_select import (NULL_LABEL, AttentionParams, SenseEmbeddingTable,
                                     att_context, att_scores, att_weights,
                                     avg_weights, concat_token, grad_check,
                                     init_att_ini, top_sense, weighted_sense)


def test_concat_basic():
    assert np.array_equal(concat_token([1, 2], [3]), [1, 2, 3])


def test_concat_zero_sense_pads_with_zeros():
    out = concat_token([1.5, -2.0], [0.0, 0.0, 0.0])
    assert np.array_equal(out, [1.5, -2.0, 0.0, 0.0, 0.0])


def test_concat_paper_dimensions():
    out = concat_token(np.ones(300), np.zeros(200))
    assert out.shape == (500,)


def test_concat_rejects_non_finite():
    with pytest.raises(ValueError):
        concat_token([np.nan], [1.0])


# ---------------------------------------------------------------- table


def test_table_add_and_top_sense():
    table = SenseEmbeddingTable()
    table.add("rock.noun", ["rock.noun.0", "rock.noun.1"], [[1, 0], [0, 1]])
    assert np.array_equal(top_sense(table, "rock.noun", "rock.noun.1"), [0, 1])
    with pytest.raises(KeyError):
        top_sense(table, "rock.noun", "nope")
    with pytest.raises(KeyError):
        top_sense(table, "missing.noun", "rock.noun.0")


def test_top_sense_is_exact_entry():
    table = SenseEmbeddingTable()
    vecs = [np.array([0.1, 0.2]), np.array([0.3, 0.4])]
    table.add("k", ["a", "b"], vecs)
    for j, label in enumerate(["a", "b"]):
        assert np.array_equal(top_sense(table, "k", label), vecs[j])


def test_table_caps_at_max_senses():
    table = SenseEmbeddingTable(max_senses=5)
    labels = ["s%d" % i for i in range(8)]
    table.add("k", labels, [[float(i)] for i in range(8)])
    assert table.labels("k") == labels[:5]
    assert len(table.vectors("k")) == 5


def test_table_monosemous_entries():
    table = SenseEmbeddingTable()
    table.add_monosemous("cat", [1.0, 2.0])
    assert table.labels("cat") == ["cat"]
    table.add_monosemous("dog", [3.0, 4.0], use_null_label=True)
    assert table.labels("dog") == [NULL_LABEL]


def test_table_round_trip(tmp_path):
    table = SenseEmbeddingTable()
    table.add("rock.noun", ["a", "b"], [[1.0, 0.5], [0.25, -1.0]])
    table.add_monosemous("cat", [2.0, 3.0])
    path = tmp_path / "table.json"
    table.save(path)
    loaded = SenseEmbeddingTable.load(path)
    assert sorted(loaded.keys()) == ["cat", "rock.noun"]
    assert loaded.labels("rock.noun") == ["a", "b"]
    assert np.array_equal(loaded.vectors("rock.noun")[1], [0.25, -1.0])


def test_top_sense_round_trips_with_kmeans_assign():
    contexts = [(1.0, 0.0)] * 12 + [(0.0, 1.0)] * 12
    model = kmeans_adaptive(contexts, [(0.9, 0.1), (0.1, 0.9)], ["k.0", "k.1"],
                            min_cluster_size=10, max_iters=20, key="k")
    table = SenseEmbeddingTable.from_cluster_models({"k": model})
    assigned = kmeans_assign(model, (0.1, 0.9))
    vec = top_sense(table, "k", assigned.label)
    match = next(c for c in model.clusters if c.label == assigned.label)
    assert np.array_equal(vec, match.centroid)


# -------------------------------------------------------------- weights


def test_avg_weights_logistic_single_sense():
    w = avg_weights([0.4], "logistic")
    assert np.allclose(w.weights, [1.0])
    assert w.mode == "avg_logistic"


def test_avg_weights_logistic_symmetric():
    for x in (0.0, 0.3, 1.7):
        assert np.allclose(avg_weights([x, x], "logistic").weights, [0.5, 0.5])


def test_avg_weights_linear_hand_case():
    w = avg_weights([0.2, 0.8], "linear")
    assert np.allclose(w.weights, [0.8, 0.2])
    assert w.mode == "avg_linear"


def test_avg_weights_linear_zero_distances_error():
    with pytest.raises(ValueError, match="zero"):
        avg_weights([0.0, 0.0], "linear")


def test_avg_weights_linear_can_go_negative_and_renormalize():
    w = avg_weights([1.5, 0.5], "linear")
    assert w.weights[0] < 0.0
    assert not math.isclose(w.weights.sum(), 1.0)
    r = avg_weights([1.5, 0.5], "linear", renormalize=True)
    assert np.all(r.weights >= 0.0)
    assert math.isclose(r.weights.sum(), 1.0, abs_tol=1e-12)


def test_avg_weights_logistic_sums_to_one():
    rng = np.random.default_rng(1)
    for _ in range(50):
        d = rng.uniform(0, 2, size=rng.integers(1, 6))
        w = avg_weights(d, "logistic").weights
        assert abs(w.sum() - 1.0) <= 1e-12
        assert np.all(w >= 0.0)


def test_weighted_sense_cases():
    assert np.allclose(weighted_sense([1.0], [[2.0, 5.0]]), [2.0, 5.0])
    assert np.allclose(weighted_sense([0.5, 0.5], [[2, 0], [0, 2]]), [1, 1])
    assert np.allclose(weighted_sense([1.0, 0.0], [[2, 0], [0, 2]]), [2, 0])
    with pytest.raises(ValueError):
        weighted_sense([1.0], [[1, 0], [0, 1]])


def test_weighted_sense_convex_hull_property():
    rng = np.random.default_rng(2)
    for _ in range(50):
        k = int(rng.integers(1, 6))
        senses = rng.normal(size=(k, 4))
        w = rng.uniform(0, 1, size=k)
        w /= w.sum()
        out = weighted_sense(w, senses)
        assert np.all(out <= senses.max(axis=0) + 1e-12)
        assert np.all(out >= senses.min(axis=0) - 1e-12)


# -------------------------------------------------------------- context


def test_att_context_two_tokens():
    assert np.allclose(att_context([[1, 0], [0, 1]], 0), [0, 1])


def test_att_context_hand_mean():
    assert np.allclose(att_context([[1, 0], [0, 1], [1, 1]], 0), [0.5, 1.0])


def test_att_context_all_equal():
    E = [[0.3, 0.7]] * 4
    for i in range(4):
        assert np.allclose(att_context(E, i), [0.3, 0.7])


def test_att_context_single_token_error():
    with pytest.raises(ValueError):
        att_context([[1, 0]], 0)


# ------------------------------------------------------------ attention


def test_att_scores_tanh_zero_v():
    params = AttentionParams("tanh", W=np.ones((3, 2)), U=np.ones((3, 2)), v=np.zeros(3))
    scores = att_scores([1.0, 2.0], [[1, 0], [0, 1]], params)
    assert np.allclose(scores, [0.0, 0.0])


def test_att_scores_bilinear_identity():
    params = AttentionParams("bilinear", W=np.eye(2))
    assert np.allclose(att_scores([1, 0], [[1, 0], [0, 1]], params), [1, 0])


def test_att_scores_bilinear_zero_context():
    params = AttentionParams("bilinear", W=np.eye(2))
    assert np.allclose(att_scores([0, 0], [[1, 0], [0, 1]], params), [0, 0])


def test_att_scores_shape_mismatch():
    params = AttentionParams("bilinear", W=np.eye(2))
    with pytest.raises(ValueError):
        att_scores([1, 0, 0], [[1, 0], [0, 1]], params)
    tanh = AttentionParams("tanh", W=np.ones((3, 2)), U=np.ones((3, 4)), v=np.ones(3))
    with pytest.raises(ValueError):
        att_scores([1, 0], [[1, 0], [0, 1]], tanh)


def test_attention_params_validation():
    with pytest.raises(ValueError):
        AttentionParams("tanh", W=np.ones((3, 2)))  # missing U, v
    with pytest.raises(ValueError):
        AttentionParams("tanh", W=np.ones((3, 2)), U=np.ones((4, 2)), v=np.ones(3))
    with pytest.raises(ValueError):
        AttentionParams("bilinear", W=np.array([[np.inf]]))
    with pytest.raises(ValueError):
        AttentionParams("sigmoid", W=np.eye(2))


def test_attention_params_round_trip(tmp_path):
    for variant in ("tanh", "bilinear"):
        params = AttentionParams.random(variant, d_c=3, d_s=4, width=2, seed=9)
        path = tmp_path / (variant + ".json")
        params.save(path)
        loaded = AttentionParams.load(path)
        assert loaded.variant == variant
        assert np.allclose(loaded.W, params.W)


def test_att_weights_cases():
    assert np.allclose(att_weights([0.0, 0.0]).weights, [0.5, 0.5])
    assert np.allclose(att_weights([3.7]).weights, [1.0])
    assert np.allclose(att_weights([math.log(2.0), 0.0]).weights, [2 / 3, 1 / 3])


def test_att_weights_shift_invariance_and_sum():
    rng = np.random.default_rng(4)
    for _ in range(50):
        s = rng.normal(size=rng.integers(1, 6)) * 3
        w = att_weights(s).weights
        assert abs(w.sum() - 1.0) <= 1e-12
        for shift in (-5.0, 0.37, 12.0):
            assert np.allclose(att_weights(s + shift).weights, w, atol=1e-12)


# ---------------------------------------------------------- ATT_ini init


def test_init_att_ini_prefix_and_pad_range():
    words = {"rock": np.arange(300, dtype=float)}
    word_table, _ = init_att_ini(words, {}, target_word_dim=500, pad_range=0.1, seed=3)
    vec = word_table["rock"]
    assert vec.shape == (500,)
    assert np.array_equal(vec[:300], words["rock"])
    assert np.all(np.abs(vec[300:]) <= 0.1)


def test_init_att_ini_deterministic_per_seed():
    words = {"a": np.ones(4), "b": np.zeros(4)}
    models = {}
    t1 = init_att_ini(words, models, target_word_dim=8, seed=42)
    t2 = init_att_ini(words, models, target_word_dim=8, seed=42)
    for key in words:
        assert np.array_equal(t1[0][key], t2[0][key])
    t3 = init_att_ini(words, models, target_word_dim=8, seed=43)
    assert not np.array_equal(t1[0]["a"], t3[0]["a"])


def test_init_att_ini_insertion_order_does_not_matter():
    w1 = {"a": np.ones(4), "b": np.zeros(4)}
    w2 = {"b": np.zeros(4), "a": np.ones(4)}
    t1, _ = init_att_ini(w1, {}, target_word_dim=6, seed=5)
    t2, _ = init_att_ini(w2, {}, target_word_dim=6, seed=5)
    for key in w1:
        assert np.array_equal(t1[key], t2[key])


def test_init_att_ini_absent_words_get_full_range_vectors():
    word_table, sense_table = init_att_ini(
        {"known": np.ones(4)}, {}, target_word_dim=6, pad_range=0.1, seed=0,
        vocab=["unknown"], extra_sense_labels={"cat": ["cat"]})
    assert word_table["unknown"].shape == (6,)
    assert np.all(np.abs(word_table["unknown"]) <= 0.1)
    assert sense_table.labels("cat") == ["cat"]
    assert np.all(np.abs(sense_table.vectors("cat")[0]) <= 0.1)


def test_init_att_ini_pads_centroids():
    contexts = [(1.0, 0.0)] * 12 + [(0.0, 1.0)] * 12
    model = kmeans_adaptive(contexts, [(0.9, 0.1), (0.1, 0.9)], ["k.0", "k.1"],
                            min_cluster_size=10, max_iters=20, key="k")
    _, sense_table = init_att_ini({}, {"k": model}, target_word_dim=5, seed=1)
    vecs = sense_table.vectors("k")
    assert all(v.shape == (5,) for v in vecs)
    assert np.array_equal(vecs[0][:2], model.clusters[0].centroid)


def test_init_att_ini_rejects_oversized_source():
    with pytest.raises(ValueError):
        init_att_ini({"w": np.ones(10)}, {}, target_word_dim=5, seed=0)


# ----------------------------------------------------------- grad check


def test_grad_check_tanh_zero_v():
    rng = np.random.default_rng(0)
    params = AttentionParams("tanh", W=rng.normal(size=(3, 4)) * 0.5,
                             U=rng.normal(size=(3, 2)) * 0.5, v=np.zeros(3))
    err = grad_check(params, rng.normal(size=4), rng.normal(size=(3, 2)))
    assert err < 1e-6


def test_grad_check_bilinear_small_instance():
    rng = np.random.default_rng(1)
    params = AttentionParams("bilinear", W=rng.normal(size=(4, 4)) * 0.5)
    err = grad_check(params, rng.normal(size=4), rng.normal(size=(3, 4)))
    assert err < 1e-5


def test_grad_check_zero_loss():
    params = AttentionParams("bilinear", W=np.eye(2))
    err = grad_check(params, [1.0, 0.5], [[1, 0], [0, 1]],
                     loss_fn=lambda m: 0.0, loss_grad=lambda m: np.zeros_like(m))
    assert err == 0.0


@pytest.mark.parametrize("variant", ["tanh", "bilinear"])
def test_grad_check_randomized(variant):
    for seed in range(20):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 6))
        d_c = int(rng.integers(2, 9))
        d_s = int(rng.integers(2, 9))
        width = int(rng.integers(2, 7))
        params = AttentionParams.random(variant, d_c, d_s, width=width,
                                        seed=seed + 1000, scale=0.6)
        u = rng.normal(size=d_c)
        senses = rng.normal(size=(k, d_s))
        assert grad_check(params, u, senses) < 1e-5


def test_grad_check_custom_loss_needs_gradient():
    params = AttentionParams("bilinear", W=np.eye(2))
    with pytest.raises(ValueError):
        grad_check(params, [1.0, 0.0], [[1, 0]], loss_fn=lambda m: float(m.sum()))
