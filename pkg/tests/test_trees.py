import numpy as np
import pytest

from bridgedss.learners.trees import CartModel, best_split, gini_impurity
from bridgedss.learners.c45 import C45Model, entropy, gain_ratio, pessimistic_errors
from bridgedss.rules.dataset import Dataset, Feature


def make_ds(X, y, kinds=None, n_classes=None):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    n_feat = X.shape[1]
    kinds = kinds or ["numeric"] * n_feat
    features = tuple(
        Feature(f"f{i}", k, tuple(f"v{j}" for j in range(10)) if k == "categorical" else ())
        for i, k in enumerate(kinds)
    )
    return Dataset(features, X, y, n_classes or int(y.max()) + 1)


XOR = make_ds([[0, 0], [0, 1], [1, 0], [1, 1]], [0, 1, 1, 0])


class TestGini:
    def test_pure_node(self):
        assert gini_impurity([6, 0]) == 0.0

    def test_symmetric(self):
        assert gini_impurity([3, 3]) == pytest.approx(0.5)

    def test_three_class(self):
        # 1 - (1/36 + 4/36 + 9/36) = 11/18
        assert gini_impurity([1, 2, 3]) == pytest.approx(11.0 / 18.0)

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            gini_impurity([0, 0])


def brute_force_best_split(ds):
    """Independent enumeration of all candidate splits with the same
    tie-break rule (lower feature, lower threshold/category)."""
    n = len(ds)
    parent = gini_impurity(np.bincount(ds.y, minlength=ds.n_classes))
    best = None
    for j, f in enumerate(ds.features):
        col = ds.X[:, j]
        if f.kind == "numeric":
            values = sorted(set(col))
            candidates = [(a + b) / 2.0 for a, b in zip(values, values[1:])]
            masks = [col <= t for t in candidates]
        else:
            candidates = sorted(set(int(v) for v in col))
            if len(candidates) < 2:
                continue
            masks = [col.astype(int) == c for c in candidates]
        for value, mask in zip(candidates, masks):
            left, right = ds.y[mask], ds.y[~mask]
            if len(left) == 0 or len(right) == 0:
                continue
            dec = parent - (
                len(left) / n * gini_impurity(np.bincount(left, minlength=ds.n_classes))
                + len(right) / n * gini_impurity(np.bincount(right, minlength=ds.n_classes))
            )
            cand = (dec, j, float(value))
            if best is None or dec > best[0] + 1e-15 or (
                abs(dec - best[0]) <= 1e-15 and (j, float(value)) < (best[1], best[2])
            ):
                best = cand
    return best


class TestBestSplit:
    def test_single_midpoint(self):
        ds = make_ds([[1.0], [2.0]], [0, 1])
        split = best_split(ds)
        assert split["value"] == pytest.approx(1.5)
        assert split["decrease"] == pytest.approx(0.5)

    def test_pure_node_no_split(self):
        ds = make_ds([[1.0], [2.0]], [0, 0])
        assert best_split(ds) is None

    def test_constant_features_no_split(self):
        ds = make_ds([[1.0], [1.0]], [0, 1])
        assert best_split(ds) is None

    def test_matches_brute_force_on_random_datasets(self, rng):
        for trial in range(100):
            X = rng.integers(0, 6, size=(20, 3)).astype(float)
            y = rng.integers(0, 3, size=20)
            if len(set(y.tolist())) < 2:
                continue
            ds = make_ds(X, y, n_classes=3)
            mine = best_split(ds)
            oracle = brute_force_best_split(ds)
            if oracle is None:
                assert mine is None
                continue
            assert mine["decrease"] == pytest.approx(oracle[0], abs=1e-12)
            assert (mine["feature"], mine["value"]) == (oracle[1], oracle[2])

    def test_categorical_one_vs_rest(self, rng):
        X = rng.integers(0, 4, size=(30, 2)).astype(float)
        y = (X[:, 0] == 2).astype(int)
        ds = make_ds(X, y, kinds=["categorical", "categorical"])
        split = best_split(ds)
        assert split["feature"] == 0
        assert int(split["value"]) == 2


class TestCart:
    def test_pure_dataset_single_leaf(self):
        ds = make_ds([[1.0], [2.0], [3.0]], [1, 1, 1], n_classes=2)
        model = CartModel.fit(ds)
        assert model.node_count() == 1
        assert (model.predict(ds.X) == 1).all()

    def test_xor_depth_two_perfect(self):
        model = CartModel.fit(XOR)
        assert model.depth() == 2
        assert (model.predict(XOR.X) == XOR.y).all()

    def test_conflict_free_training_is_exact(self, rng):
        X = rng.random((60, 3))
        y = rng.integers(0, 4, size=60)
        ds = make_ds(X, y, n_classes=4)
        model = CartModel.fit(ds)
        assert (model.predict(X) == y).all()

    def test_row_permutation_invariant_predictions(self, rng):
        X = rng.integers(0, 5, (40, 3)).astype(float)
        y = rng.integers(0, 3, 40)
        ds = make_ds(X, y, n_classes=3)
        perm = rng.permutation(40)
        ds_p = ds.subset(perm)
        probe = rng.integers(0, 5, (25, 3)).astype(float)
        assert np.array_equal(
            CartModel.fit(ds).predict(probe), CartModel.fit(ds_p).predict(probe)
        )

    def test_serialization_roundtrip(self, rng):
        X = rng.random((30, 2))
        y = rng.integers(0, 3, 30)
        ds = make_ds(X, y, n_classes=3)
        model = CartModel.fit(ds)
        clone = CartModel.from_state(model.state_dict())
        probe = rng.random((20, 2))
        assert np.array_equal(model.predict(probe), clone.predict(probe))


class TestC45:
    def test_perfect_binary_feature_gain_ratio_one(self):
        y = np.array([0, 0, 1, 1])
        parent_h = entropy(np.bincount(y))
        ratio, gain = gain_ratio(parent_h, [y[:2], y[2:]], 2)
        assert gain == pytest.approx(1.0)
        assert ratio == pytest.approx(1.0)

    def test_pure_dataset_single_leaf(self):
        ds = make_ds([[0.0], [1.0]], [1, 1], n_classes=2)
        model = C45Model.fit(ds)
        assert model.root.is_leaf

    def test_xor_trains_to_100(self):
        model = C45Model.fit(XOR)
        assert (model.predict(XOR.X) == XOR.y).all()

    def test_multiway_categorical_split(self):
        X = np.array([[0.0], [1.0], [2.0], [0.0], [1.0], [2.0]])
        y = np.array([0, 1, 2, 0, 1, 2])
        ds = make_ds(X, y, kinds=["categorical"], n_classes=3)
        model = C45Model.fit(ds)
        assert not model.root.is_leaf
        assert len(model.root.children) == 10  # one child per declared category
        assert (model.predict(X) == y).all()

    def test_pessimistic_bound_exceeds_observed_rate(self):
        # upper confidence bound is above the raw error count
        assert pessimistic_errors(2, 10) > 2
        assert pessimistic_errors(0, 4) == pytest.approx(4 * (1 - 0.25**0.25))

    def test_pruning_collapses_noise_splits(self, rng):
        # one informative feature, one pure-noise feature
        X = np.column_stack([rng.integers(0, 2, 400), rng.random(400)])
        y = X[:, 0].astype(int).copy()
        flip = rng.random(400) < 0.05
        y[flip] = 1 - y[flip]
        ds = make_ds(X.astype(float), y, n_classes=2)
        pruned = C45Model.fit(ds, prune=True)
        unpruned = C45Model.fit(ds, prune=False)

        def count(node):
            return 1 if node.is_leaf else 1 + sum(count(c) for c in node.children)

        assert count(pruned.root) < count(unpruned.root)

    def test_serialization_roundtrip(self, rng):
        X = rng.random((30, 2))
        y = rng.integers(0, 3, 30)
        ds = make_ds(X, y, n_classes=3)
        model = C45Model.fit(ds)
        clone = C45Model.from_state(model.state_dict())
        probe = rng.random((20, 2))
        assert np.array_equal(model.predict(probe), clone.predict(probe))
