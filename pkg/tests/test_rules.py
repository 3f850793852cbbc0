import numpy as np
import pytest

from bridgedss.rules import (
    BRIDGE_FEATURES,
    DEFAULT_PARTITION_OVERRIDES,
    Dataset,
    Feature,
    build_partitions,
    discrete_filter,
    extract_rules,
    instances_from_records,
    normal_filter,
    read_dataset_csv,
    rule_base_to_dataset,
    write_arff,
    write_dataset_csv,
    write_dataset_jsonl,
)
from bridgedss.rules.fuzzy import FuzzyPartition


def numeric_dataset(columns: dict[str, list[float]], y: list[int]) -> Dataset:
    features = tuple(Feature(name, "numeric") for name in columns)
    X = np.column_stack([np.asarray(v, dtype=float) for v in columns.values()])
    return Dataset(features, X, np.asarray(y))


class TestPartitions:
    def test_uniform_centers(self):
        ds = numeric_dataset({"f": [0.0, 0.3, 1.0]}, [0, 1, 0])
        parts = build_partitions(ds, k=5)
        assert parts["f"].centers == (0.0, 0.25, 0.5, 0.75, 1.0)

    def test_membership_at_center(self):
        part = FuzzyPartition("f", (0.0, 0.25, 0.5, 0.75, 1.0))
        assert np.allclose(part.memberships(0.25), [0, 1, 0, 0, 0])

    def test_membership_at_midpoint(self):
        part = FuzzyPartition("f", (0.0, 0.25, 0.5, 0.75, 1.0))
        assert np.allclose(part.memberships(0.375), [0, 0.5, 0.5, 0, 0])

    def test_interior_memberships_sum_to_one(self):
        part = FuzzyPartition("f", tuple(np.linspace(-2.0, 3.0, 7)))
        for x in np.linspace(-2.0, 3.0, 501):
            assert abs(part.memberships(x).sum() - 1.0) <= 1e-12

    def test_constant_feature_degenerates(self):
        ds = numeric_dataset({"f": [4.2, 4.2, 4.2]}, [0, 1, 0])
        parts = build_partitions(ds, k=5)
        assert parts["f"].centers == (4.2,)
        assert parts["f"].memberships(99.0) == pytest.approx([1.0])

    def test_empty_dataset_rejected(self):
        ds = numeric_dataset({"f": []}, [])
        with pytest.raises(ValueError):
            build_partitions(ds, k=5)

    def test_shouldered_ends(self):
        part = FuzzyPartition("f", (0.0, 0.5, 1.0))
        assert part.memberships(-3.0)[0] == 1.0
        assert part.memberships(7.0)[-1] == 1.0


class TestExtractRules:
    def test_single_instance_single_rule(self):
        ds = numeric_dataset({"a": [0.2], "b": [0.6]}, [3])
        parts = build_partitions(ds, k=5)
        # degenerate single-value partitions: degree = 1 * 1
        base = extract_rules(ds, parts)
        assert len(base) == 1
        rule = next(iter(base.rules.values()))
        assert rule.consequent == 3
        assert rule.degree == 1.0

    def test_degree_is_product_of_max_memberships(self):
        ds = numeric_dataset({"a": [0.0, 1.0, 0.3], "b": [0.0, 1.0, 0.55]}, [0, 0, 1])
        parts = build_partitions(ds, k=5)
        base = extract_rules(ds, parts)
        # instance (0.3, 0.55): terms a->1 (m=0.8), b->2 (m=0.8)
        rule = base.rules[(1, 2)]
        assert rule.degree == pytest.approx(0.8 * 0.8)

    def test_conflict_keeps_max_degree(self):
        # same antecedent: class 1 at degree 0.95 beats class 0 at degree 0.6
        ds = numeric_dataset({"a": [0.0, 1.0, 0.525, 0.7]}, [0, 0, 1, 0])
        parts = build_partitions(ds, k=3)
        base = extract_rules(ds, parts)
        rule = base.rules[(1,)]
        assert rule.consequent == 1
        assert rule.degree == pytest.approx(0.95)

    def test_conflict_tie_breaks_lower_class(self):
        ds = numeric_dataset({"a": [0.0, 1.0, 0.4, 0.6]}, [0, 0, 2, 1])
        parts = build_partitions(ds, k=3)
        # both map to term 1 with degree 0.8: tie -> lower class id
        base = extract_rules(ds, parts)
        assert base.rules[(1,)].consequent == 1

    def test_out_of_range_clamped_not_rejected(self):
        ds = numeric_dataset({"a": [0.0, 1.0]}, [0, 1])
        parts = build_partitions(ds, k=3)
        probe = numeric_dataset({"a": [2.5]}, [1])
        base = extract_rules(probe, parts)
        assert base.rules[(2,)].degree == 1.0

    def test_no_duplicate_antecedents(self, rng):
        X = rng.random((200, 2))
        y = rng.integers(0, 3, 200)
        ds = numeric_dataset({"a": X[:, 0], "b": X[:, 1]}, y)
        parts = build_partitions(ds, k=4)
        base = extract_rules(ds, parts)
        assert len(base) == len(set(base.rules))
        assert len(base) <= 16


class TestRuleBaseToDataset:
    def test_center_lookup(self):
        ds = numeric_dataset({"a": [0.0, 1.0, 0.5]}, [0, 1, 2])
        parts = build_partitions(ds, k=5)
        base = extract_rules(ds, parts)
        out = rule_base_to_dataset(base, parts, ds)
        values = sorted(out.column("a"))
        assert values == [0.0, 0.5, 1.0]

    def test_roundtrip_preserves_count_for_unique_antecedents(self):
        ds = numeric_dataset({"a": [0.0, 0.25, 0.5, 0.75, 1.0]}, [0, 1, 2, 3, 4])
        parts = build_partitions(ds, k=5)
        base = extract_rules(ds, parts)
        out = rule_base_to_dataset(base, parts, ds)
        assert len(out) == len(ds)

    def test_conflicting_pair_collapses_to_one(self):
        ds = numeric_dataset({"a": [0.475, 0.525]}, [0, 1])
        parts = build_partitions(numeric_dataset({"a": [0.0, 1.0]}, [0, 0]), k=3)
        base = extract_rules(ds, parts)
        out = rule_base_to_dataset(base, parts, ds)
        assert len(out) == 1


class TestNormalFilter:
    def test_min_max(self):
        ds = numeric_dataset({"a": [2.0, 4.0, 6.0]}, [0, 1, 0])
        out, _ = normal_filter(ds)
        assert list(out.column("a")) == [0.0, 0.5, 1.0]

    def test_constant_maps_to_zero(self):
        ds = numeric_dataset({"a": [7.0, 7.0]}, [0, 1])
        out, _ = normal_filter(ds)
        assert list(out.column("a")) == [0.0, 0.0]

    def test_idempotent_on_unit_interval(self):
        ds = numeric_dataset({"a": [0.0, 1.0, 0.25]}, [0, 1, 0])
        out, _ = normal_filter(ds)
        assert np.array_equal(out.X, ds.X)

    def test_params_score_unseen(self):
        ds = numeric_dataset({"a": [2.0, 4.0, 6.0]}, [0, 1, 0])
        _, filt = normal_filter(ds)
        row = filt.transform_row(ds.features, np.array([5.0]))
        assert row[0] == pytest.approx(0.75)

    def test_output_in_unit_interval(self, rng):
        ds = numeric_dataset({"a": rng.normal(5, 3, 100), "b": rng.random(100) * 40}, rng.integers(0, 2, 100))
        out, _ = normal_filter(ds)
        assert out.X.min() >= 0.0 and out.X.max() <= 1.0

    def test_order_independence(self, rng):
        X = rng.random(30)
        y = rng.integers(0, 2, 30)
        ds = numeric_dataset({"a": X}, y)
        perm = rng.permutation(30)
        ds_p = ds.subset(perm)
        out, _ = normal_filter(ds)
        out_p, _ = normal_filter(ds_p)
        assert np.array_equal(out.X[perm], out_p.X)


class TestDiscreteFilter:
    def test_bin_placement(self):
        ds = numeric_dataset({"a": [0.0, 1.0, 0.55]}, [0, 1, 0])
        out, _ = discrete_filter(ds, bins=10)
        assert out.column("a")[2] == 5

    def test_max_in_last_bin(self):
        ds = numeric_dataset({"a": [0.0, 1.0]}, [0, 1])
        out, _ = discrete_filter(ds, bins=10)
        assert out.column("a")[1] == 9

    def test_constant_single_bin(self):
        ds = numeric_dataset({"a": [3.0, 3.0, 3.0]}, [0, 1, 0])
        out, _ = discrete_filter(ds, bins=10)
        assert list(out.column("a")) == [0.0, 0.0, 0.0]

    def test_output_becomes_categorical(self):
        ds = numeric_dataset({"a": [0.0, 1.0]}, [0, 1])
        out, _ = discrete_filter(ds, bins=4)
        assert out.features[0].kind == "categorical"
        assert out.features[0].categories == ("b0", "b1", "b2", "b3")

    def test_values_in_bin_range(self, rng):
        ds = numeric_dataset({"a": rng.normal(0, 2, 200)}, rng.integers(0, 2, 200))
        out, _ = discrete_filter(ds, bins=10)
        assert set(np.unique(out.column("a"))) <= set(range(10))

    def test_bins_below_two_rejected(self):
        ds = numeric_dataset({"a": [0.0, 1.0]}, [0, 1])
        with pytest.raises(ValueError):
            discrete_filter(ds, bins=1)


class TestBridgePipeline:
    def test_exactly_11520_rules(self, bridge_records, factors):
        ds = instances_from_records(bridge_records, factors)
        parts = build_partitions(ds, k=5, overrides=DEFAULT_PARTITION_OVERRIDES)
        base = extract_rules(ds, parts)
        assert len(base) == 11520
        rule_ds = rule_base_to_dataset(base, parts, ds)
        assert len(rule_ds) == 11520

    def test_io_roundtrip(self, bridge_records, factors, tmp_path):
        ds = instances_from_records(bridge_records[:200], factors)
        csv_path = tmp_path / "ds.csv"
        write_dataset_csv(ds, csv_path)
        back = read_dataset_csv(csv_path, ds.features)
        assert np.allclose(back.X, ds.X)
        assert np.array_equal(back.y, ds.y)
        write_dataset_jsonl(ds, tmp_path / "ds.jsonl")
        write_arff(ds, tmp_path / "ds.arff")
        text = (tmp_path / "ds.arff").read_text()
        assert text.count("@attribute") == len(ds.features) + 1
        assert "{snowing,raining,foggy,wet}" in text
