"""Classifier trainers: gradients against finite differences, capacity
checks on small geometric datasets, closed-form naive Bayes arithmetic,
the featureizer, and the classifier file format."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import logreg_gradient_error, mlp_gradient_error
from otherlex.classify import (
    ClassifierModel,
    LabeledVector,
    MlpConfig,
    bow_features,
    load_classifier,
    predict,
    predict_proba,
    save_classifier,
    train_gnb,
    train_logreg,
    train_mlp,
)
from otherlex.errors import DataError, NumericalError
from otherlex.parse import heuristic_parse


def labeled(rows, labels):
    return [LabeledVector(np.asarray(r, dtype=float), l) for r, l in zip(rows, labels)]


XOR = labeled([(0, 0), (0, 1), (1, 0), (1, 1)], [0, 1, 1, 0])


def blobs(seed=7, n=50, gap=4.0):
    """Two Gaussian clouds (unit sigma) with centers gap apart."""
    rng = np.random.default_rng(seed)
    pts0 = rng.normal(loc=(0.0, 0.0), scale=1.0, size=(n, 2))
    pts1 = rng.normal(loc=(gap, 0.0), scale=1.0, size=(n, 2))
    data = labeled(list(pts0) + list(pts1), [0] * n + [1] * n)
    return data, np.vstack([pts0, pts1]), np.array([0] * n + [1] * n)


def accuracy(model, X, y):
    return float(((predict_proba(model, X) >= 0.5).astype(int) == y).mean())


class TestMlpConfig:
    def test_defaults(self):
        cfg = MlpConfig()
        assert (cfg.hidden_layers, cfg.hidden_units, cfg.epochs) == (2, 5, 200)
        assert cfg.activation == "tanh"
        assert cfg.lr == 0.05

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"hidden_layers": 0},
            {"hidden_units": 0},
            {"epochs": 0},
            {"activation": "relu"},
            {"lr": 0.0},
        ],
    )
    def test_invalid_config_rejected(self, kwargs):
        with pytest.raises(ValueError):
            MlpConfig(**kwargs)


class TestGradients:
    @pytest.mark.parametrize("seed", range(6))
    def test_mlp_backprop_matches_finite_differences(self, seed):
        err = mlp_gradient_error(np.random.default_rng(seed), n=3)
        assert err < 1e-4

    @pytest.mark.parametrize("seed", range(6))
    def test_logreg_gradient_matches_finite_differences(self, seed):
        err = logreg_gradient_error(np.random.default_rng(seed), l2=0.1)
        assert err < 1e-4

    def test_unregularized_logreg_gradient(self):
        err = logreg_gradient_error(np.random.default_rng(0), l2=0.0)
        assert err < 1e-4


class TestMlpTraining:
    def test_xor_is_learnable_for_some_seed(self):
        X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
        y = np.array([0, 1, 1, 0])
        perfect = []
        for seed in range(10):
            model = train_mlp(XOR, MlpConfig(epochs=5000, lr=0.2, seed=seed))
            perfect.append(accuracy(model, X, y) == 1.0)
        assert any(perfect)

    def test_separable_blobs_reach_high_accuracy(self):
        data, X, y = blobs()
        model = train_mlp(data, MlpConfig(seed=3))
        assert accuracy(model, X, y) >= 0.99

    def test_training_is_deterministic(self):
        data, _, _ = blobs(seed=1, n=20)
        a = train_mlp(data, MlpConfig(epochs=50, seed=4))
        b = train_mlp(data, MlpConfig(epochs=50, seed=4))
        for name in a.arrays:
            assert np.array_equal(a.arrays[name], b.arrays[name])

    def test_different_seeds_differ(self):
        data, _, _ = blobs(seed=1, n=20)
        a = train_mlp(data, MlpConfig(epochs=50, seed=4))
        b = train_mlp(data, MlpConfig(epochs=50, seed=5))
        assert not np.array_equal(a.arrays["W0"], b.arrays["W0"])

    def test_single_class_data_rejected(self):
        data = labeled([(0, 0), (1, 1)], [1, 1])
        with pytest.raises(DataError, match="single class"):
            train_mlp(data)

    def test_inconsistent_dimensions_rejected(self):
        data = [
            LabeledVector(np.array([0.0, 1.0]), 0),
            LabeledVector(np.array([1.0]), 1),
        ]
        with pytest.raises(DataError):
            train_mlp(data)

    def test_non_finite_features_rejected(self):
        data = labeled([(0.0, np.nan), (1.0, 2.0)], [0, 1])
        with pytest.raises(DataError, match="non-finite"):
            train_mlp(data)

    def test_divergence_reports_epoch(self):
        with pytest.raises(NumericalError, match="epoch"):
            train_mlp(XOR, MlpConfig(epochs=10, lr=1e308, seed=0))

    def test_layer_shapes_follow_config(self):
        data, _, _ = blobs(seed=2, n=10)
        model = train_mlp(data, MlpConfig(hidden_layers=3, hidden_units=4, epochs=5))
        assert model.arrays["W0"].shape == (2, 4)
        assert model.arrays["W1"].shape == (4, 4)
        assert model.arrays["W3"].shape == (4, 1)
        assert model.n_features == 2


class TestLogreg:
    def test_separable_blobs_reach_high_accuracy(self):
        data, X, y = blobs()
        model = train_logreg(data, epochs=500)
        assert accuracy(model, X, y) >= 0.99

    def test_zero_features_give_sigmoid_of_bias(self):
        data = labeled([(0.0, 0.0)] * 6, [0, 1, 0, 1, 1, 0])
        model = train_logreg(data)
        bias = model.arrays["b"][0]
        expected = 1.0 / (1.0 + math.exp(-bias))
        for _ in range(3):
            p, _ = predict(model, np.zeros(2))
            assert p == pytest.approx(expected, abs=1e-12)

    def test_training_is_deterministic(self):
        data, _, _ = blobs(seed=5, n=15)
        a = train_logreg(data, epochs=40, seed=2)
        b = train_logreg(data, epochs=40, seed=2)
        assert np.array_equal(a.arrays["w"], b.arrays["w"])
        assert np.array_equal(a.arrays["b"], b.arrays["b"])

    def test_l2_shrinks_weights(self):
        data, _, _ = blobs(seed=5)
        plain = train_logreg(data, l2=0.0, epochs=300)
        shrunk = train_logreg(data, l2=1.0, epochs=300)
        assert np.linalg.norm(shrunk.arrays["w"]) < np.linalg.norm(plain.arrays["w"])

    def test_single_class_data_rejected(self):
        with pytest.raises(DataError, match="single class"):
            train_logreg(labeled([(0,), (1,)], [0, 0]))

    def test_negative_l2_rejected(self):
        with pytest.raises(ValueError):
            train_logreg(labeled([(0,), (1,)], [0, 1]), l2=-0.1)


class TestGnb:
    def test_one_example_per_class_recovers_means(self):
        data = labeled([(0.0, 1.0), (4.0, -2.0)], [0, 1])
        model = train_gnb(data)
        assert np.allclose(model.arrays["mean"][0], [0.0, 1.0])
        assert np.allclose(model.arrays["mean"][1], [4.0, -2.0])
        for lv in data:
            _, label = predict(model, lv.features)
            assert label == lv.label

    def test_symmetric_classes_give_half_at_origin(self):
        pts = [(1.0, 2.0), (3.0, -1.0), (2.0, 0.5)]
        mirrored = [(-a, -b) for a, b in pts]
        data = labeled(pts + mirrored, [1] * 3 + [0] * 3)
        model = train_gnb(data)
        p, _ = predict(model, np.zeros(2))
        assert p == pytest.approx(0.5, abs=1e-9)

    def test_posterior_matches_brute_force_arithmetic(self):
        pts0 = [(0.0, 0.0), (2.0, 0.0), (1.0, 3.0)]
        pts1 = [(4.0, 1.0), (6.0, 3.0)]
        data = labeled(pts0 + pts1, [0] * 3 + [1] * 2)
        model = train_gnb(data)
        x = (3.0, 1.0)
        p, _ = predict(model, np.asarray(x))

        def fit(points):
            n = len(points)
            mean = [sum(p[d] for p in points) / n for d in (0, 1)]
            var = [sum((p[d] - mean[d]) ** 2 for p in points) / n for d in (0, 1)]
            return mean, var

        def density(point, mean, var):
            out = 1.0
            for d in (0, 1):
                out *= math.exp(-((point[d] - mean[d]) ** 2) / (2 * var[d]))
                out /= math.sqrt(2 * math.pi * var[d])
            return out

        mean0, var0 = fit(pts0)
        mean1, var1 = fit(pts1)
        joint0 = (3 / 5) * density(x, mean0, var0)
        joint1 = (2 / 5) * density(x, mean1, var1)
        assert p == pytest.approx(joint1 / (joint0 + joint1), abs=1e-9)

    def test_posteriors_sum_to_one(self):
        # swapping the labels swaps the classes, so the two class-1
        # probabilities are independent computations of p1 and p0
        pts = [(0.0, 0.0), (2.0, 1.0), (4.0, 1.0), (6.0, 3.0), (1.0, 1.0)]
        data = labeled(pts, [0, 0, 1, 1, 0])
        flipped = labeled(pts, [1, 1, 0, 0, 1])
        model = train_gnb(data)
        model_flipped = train_gnb(flipped)
        for x in ([1.0, 0.5], [3.0, 1.0], [5.0, 2.0]):
            p1, _ = predict(model, np.asarray(x))
            p0, _ = predict(model_flipped, np.asarray(x))
            assert p1 + p0 == pytest.approx(1.0, abs=1e-12)

    def test_variance_floor_applied(self):
        data = labeled([(1.0, 0.0), (1.0, 2.0), (3.0, 5.0), (4.0, 6.0)], [0, 0, 1, 1])
        model = train_gnb(data, var_floor=1e-6)
        assert model.arrays["var"][0][0] == 1e-6  # constant feature in class 0

    def test_missing_class_rejected(self):
        with pytest.raises(DataError, match="class 1"):
            train_gnb(labeled([(0.0,), (1.0,)], [0, 0]))

    def test_bad_var_floor_rejected(self):
        with pytest.raises(ValueError):
            train_gnb(labeled([(0.0,), (1.0,)], [0, 1]), var_floor=0.0)


class TestPredict:
    def test_exact_half_is_class_one(self):
        model = ClassifierModel("logreg", {"w": np.zeros(2), "b": np.zeros(1)})
        p, label = predict(model, np.array([3.0, -1.0]))
        assert p == 0.5
        assert label == 1

    def test_near_zero_probability_is_class_zero(self):
        model = ClassifierModel("logreg", {"w": np.zeros(2), "b": np.array([-30.0])})
        p, label = predict(model, np.array([1.0, 1.0]))
        assert p < 1e-12
        assert label == 0

    @given(x=st.lists(st.floats(-100, 100), min_size=2, max_size=2))
    def test_zero_model_is_half_everywhere(self, x):
        model = ClassifierModel("logreg", {"w": np.zeros(2), "b": np.zeros(1)})
        p, label = predict(model, np.asarray(x))
        assert p == 0.5
        assert label == 1

    def test_dimension_mismatch_rejected(self):
        model = ClassifierModel("logreg", {"w": np.zeros(2), "b": np.zeros(1)})
        with pytest.raises(DataError, match="dimension"):
            predict(model, np.zeros(3))

    def test_custom_threshold(self):
        model = ClassifierModel("logreg", {"w": np.zeros(1), "b": np.zeros(1)}, threshold=0.6)
        p, label = predict(model, np.zeros(1))
        assert p == 0.5
        assert label == 0

    @pytest.mark.parametrize("seed", range(3))
    def test_probability_in_unit_interval(self, seed):
        data, X, _ = blobs(seed=seed, n=10)
        for trainer in (lambda d: train_mlp(d, MlpConfig(epochs=20)), train_logreg, train_gnb):
            model = trainer(data)
            probs = predict_proba(model, X)
            assert np.all(probs >= 0.0) and np.all(probs <= 1.0)


class TestBowFeatures:
    def test_unigram_counts(self):
        X, names = bow_features([["a", "b"], ["a"]], n_range=(1, 1))
        assert names == ["a", "b"]
        assert X.tolist() == [[1.0, 1.0], [1.0, 0.0]]

    def test_max_features_one_keeps_lexicographic_winner(self):
        X, names = bow_features([["b"], ["a"]], n_range=(1, 1), max_features=1)
        assert names == ["a"]
        assert X.tolist() == [[0.0], [1.0]]

    def test_bigram_range(self):
        _, names = bow_features([["a", "b", "c"]], n_range=(1, 2))
        assert set(names) == {"a", "b", "c", "a b", "b c"}

    def test_term_frequency_values(self):
        X, names = bow_features([["a", "a", "a", "b"]], n_range=(1, 1))
        assert dict(zip(names, X[0])) == {"a": 3.0, "b": 1.0}

    def test_dependency_ngrams_added_with_parses(self):
        docs = [["we", "hate", "them"], ["the", "dog"]]
        parses = [heuristic_parse(doc) for doc in docs]
        _, names = bow_features(docs, n_range=(1, 1), parses=parses)
        assert "nsubj(hate,we)" in names
        assert "dobj(hate,them)" in names
        assert "det(dog,the)" in names

    def test_hateful_terms_are_binary(self):
        X, names = bow_features(
            [["hate", "hate", "hate"], ["love"]],
            n_range=(1, 1),
            hateful_terms=["hate"],
        )
        col = names.index("hateful:hate")
        assert X[:, col].tolist() == [1.0, 0.0]
        assert X[0][names.index("hate")] == 3.0

    def test_empty_corpus_rejected(self):
        with pytest.raises(DataError, match="empty"):
            bow_features([])

    def test_misaligned_parses_rejected(self):
        with pytest.raises(DataError, match="aligned"):
            bow_features([["a"], ["b"]], parses=[None])

    def test_document_order_only_permutes_rows(self):
        docs = [["a", "b"], ["c", "a", "a"], ["b", "b", "c"]]
        X1, names1 = bow_features(docs, n_range=(1, 2))
        X2, names2 = bow_features(docs[::-1], n_range=(1, 2))
        assert names1 == names2
        assert np.array_equal(X1, X2[::-1])

    @settings(max_examples=50)
    @given(
        docs=st.lists(
            st.lists(st.sampled_from("abcd"), min_size=1, max_size=6),
            min_size=1,
            max_size=6,
        )
    )
    def test_row_sums_match_raw_ngram_counts(self, docs):
        # with no cap, each row's total equals the number of n-gram slots
        X, _ = bow_features(docs, n_range=(1, 2), max_features=10_000)
        for row, doc in zip(X, docs):
            slots = len(doc) + max(len(doc) - 1, 0)
            assert row.sum() == slots


class TestClassifierFile:
    @pytest.mark.parametrize("kind", ["mlp", "logreg", "gnb"])
    def test_round_trip(self, kind, tmp_path):
        data, X, _ = blobs(seed=11, n=12)
        trainers = {
            "mlp": lambda d: train_mlp(d, MlpConfig(epochs=30, seed=2)),
            "logreg": lambda d: train_logreg(d, epochs=30),
            "gnb": train_gnb,
        }
        model = trainers[kind](data)
        path = tmp_path / "clf.bin"
        save_classifier(model, path)
        loaded = load_classifier(path)
        assert loaded.kind == kind
        assert loaded.threshold == model.threshold
        assert set(loaded.arrays) == set(model.arrays)
        for name in model.arrays:
            assert np.array_equal(
                loaded.arrays[name], model.arrays[name].astype(np.float32).astype(np.float64)
            )
        assert np.allclose(predict_proba(loaded, X), predict_proba(model, X), atol=1e-5)

    def test_threshold_preserved(self, tmp_path):
        model = ClassifierModel("logreg", {"w": np.zeros(2), "b": np.zeros(1)}, threshold=0.75)
        save_classifier(model, tmp_path / "clf.bin")
        assert load_classifier(tmp_path / "clf.bin").threshold == 0.75

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOPE" + b"\x00" * 40)
        with pytest.raises(DataError, match="magic"):
            load_classifier(path)

    def test_truncated_file_rejected(self, tmp_path):
        model = ClassifierModel("logreg", {"w": np.ones(3), "b": np.zeros(1)})
        path = tmp_path / "clf.bin"
        save_classifier(model, path)
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(DataError, match="truncated"):
            load_classifier(path)

    def test_unknown_kind_code_rejected(self, tmp_path):
        model = ClassifierModel("logreg", {"w": np.ones(2), "b": np.zeros(1)})
        path = tmp_path / "clf.bin"
        save_classifier(model, path)
        raw = bytearray(path.read_bytes())
        raw[5] = 99  # kind byte
        path.write_bytes(bytes(raw))
        with pytest.raises(DataError, match="kind"):
            load_classifier(path)
