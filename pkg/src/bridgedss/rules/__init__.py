from .dataset import (
    BRIDGE_FEATURES,
    Dataset,
    Feature,
    instances_from_records,
    read_dataset_csv,
    write_arff,
    write_dataset_csv,
    write_dataset_jsonl,
)
from .filters import DiscreteFilter, NormalFilter, discrete_filter, normal_filter
from .fuzzy import (
    DEFAULT_PARTITION_OVERRIDES,
    FuzzyPartition,
    FuzzyRule,
    RuleBase,
    build_partitions,
    extract_rules,
    rule_base_to_dataset,
)

__all__ = [
    "Dataset",
    "Feature",
    "BRIDGE_FEATURES",
    "instances_from_records",
    "read_dataset_csv",
    "write_dataset_csv",
    "write_dataset_jsonl",
    "write_arff",
    "NormalFilter",
    "DiscreteFilter",
    "normal_filter",
    "discrete_filter",
    "FuzzyPartition",
    "FuzzyRule",
    "RuleBase",
    "build_partitions",
    "extract_rules",
    "rule_base_to_dataset",
    "DEFAULT_PARTITION_OVERRIDES",
]
