"""Dataset utilities for the sparse oblique forest trainer."""

from .dataset_reader import (
    ColumnarDataset, DatasetError, SampleIndexSet,
    load_csv, load_excel, load_feature_matrix, load_libsvm, write_csv,
)
from .sampling import bootstrap_sample, generate_trunk, train_test_split

__all__ = [
    'ColumnarDataset', 'DatasetError', 'SampleIndexSet',
    'load_csv', 'load_excel', 'load_feature_matrix', 'load_libsvm', 'write_csv',
    'bootstrap_sample', 'generate_trunk', 'train_test_split',
]
