"""Tests for dataset loading and columnar storage."""

import numpy as np
import pandas as pd
import pytest

from utils.dataset_reader import (
    ColumnarDataset,
    DatasetError,
    SampleIndexSet,
    load_csv,
    load_excel,
    load_feature_matrix,
    load_libsvm,
    map_labels,
    write_csv,
)
from utils.sampling import generate_trunk


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:

    def test_feature_major_layout_and_label_order(self, tmp_path):
        path = _write(tmp_path, 'd.csv', "a,b,label\n1.5,2,cat\n3,4.25,dog\n5,6,cat\n")
        ds = load_csv(path)
        assert ds.columns.shape == (2, 3)
        assert ds.dtype == np.float32
        np.testing.assert_array_equal(ds.columns[0], [1.5, 3.0, 5.0])
        np.testing.assert_array_equal(ds.columns[1], [2.0, 4.25, 6.0])
        np.testing.assert_array_equal(ds.labels, [0, 1, 0])
        assert ds.label_names == ('cat', 'dog')
        assert ds.class_count == 2

    def test_label_column_by_name_and_position(self, tmp_path):
        path = _write(tmp_path, 'd.csv', "y,a,b\n0,1,2\n1,3,4\n")
        by_name = load_csv(path, label_column='y')
        by_index = load_csv(path, label_column=0)
        np.testing.assert_array_equal(by_name.columns, by_index.columns)
        np.testing.assert_array_equal(by_name.columns[0], [1.0, 3.0])

    def test_headerless(self, tmp_path):
        path = _write(tmp_path, 'd.csv', "1,2,a\n3,4,b\n")
        ds = load_csv(path, has_header=False)
        assert ds.n_features == 2
        assert ds.n_samples == 2

    def test_float64_storage(self, tmp_path):
        path = _write(tmp_path, 'd.csv', "a,label\n0.1,x\n0.2,y\n")
        ds = load_csv(path, dtype=np.float64)
        assert ds.columns[0, 0] == 0.1

    def test_short_row_is_reported(self, tmp_path):
        path = _write(tmp_path, 'd.csv', "a,b,label\n1,2,x\n3,4\n5,6,y\n")
        with pytest.raises(DatasetError, match="Ragged row 3"):
            load_csv(path)

    def test_long_row_is_reported(self, tmp_path):
        path = _write(tmp_path, 'd.csv', "a,b,label\n1,2,x\n3,4,y,9\n")
        with pytest.raises(DatasetError, match="Ragged"):
            load_csv(path)

    def test_unparseable_cell_names_row_and_column(self, tmp_path):
        path = _write(tmp_path, 'd.csv', "a,b,label\n1,2,x\n3,oops,y\n")
        with pytest.raises(DatasetError, match=r"row 3, column 'b'"):
            load_csv(path)

    def test_non_finite_cell_rejected(self, tmp_path):
        path = _write(tmp_path, 'd.csv', "a,label\n1,x\ninf,y\n")
        with pytest.raises(DatasetError, match="not a finite number"):
            load_csv(path)

    def test_single_class_rejected(self, tmp_path):
        path = _write(tmp_path, 'd.csv', "a,label\n1,x\n2,x\n")
        with pytest.raises(DatasetError, match="fewer than 2 classes"):
            load_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / 'absent.csv')

    def test_unknown_label_column(self, tmp_path):
        path = _write(tmp_path, 'd.csv', "a,label\n1,x\n2,y\n")
        with pytest.raises(DatasetError, match="not found"):
            load_csv(path, label_column='target')

    def test_known_vocabulary(self, tmp_path):
        path = _write(tmp_path, 'd.csv', "a,label\n1,dog\n2,dog\n")
        ds = load_csv(path, label_names=('cat', 'dog'))
        np.testing.assert_array_equal(ds.labels, [1, 1])
        assert ds.class_count == 2

    def test_unknown_label_against_vocabulary(self, tmp_path):
        path = _write(tmp_path, 'd.csv', "a,label\n1,cat\n2,bird\n")
        with pytest.raises(DatasetError, match="bird"):
            load_csv(path, label_names=('cat', 'dog'))


class TestRoundTrip:

    def test_write_then_load_is_exact(self, tmp_path):
        original = generate_trunk(60, 5, seed=1)
        path = tmp_path / 'trunk.csv'
        write_csv(original, path)
        loaded = load_csv(path)
        np.testing.assert_array_equal(loaded.columns, original.columns)
        np.testing.assert_array_equal(loaded.labels, original.labels)
        assert loaded.label_names == original.label_names

    def test_header_layout(self, tmp_path):
        path = tmp_path / 'trunk.csv'
        write_csv(generate_trunk(4, 3, seed=0), path)
        assert path.read_text().splitlines()[0] == 'f0,f1,f2,label'


class TestLoadLibsvm:

    def test_sparse_rows_fill_zeros(self, tmp_path):
        path = _write(tmp_path, 'd.svm', "1 1:0.5 3:2\n0 2:1.5\n1 3:-1\n")
        ds = load_libsvm(path, n_features=3)
        expected = np.array([[0.5, 0.0, 0.0],
                             [0.0, 1.5, 0.0],
                             [2.0, 0.0, -1.0]], dtype=np.float32)
        np.testing.assert_array_equal(ds.columns, expected)
        np.testing.assert_array_equal(ds.labels, [0, 1, 0])
        assert ds.label_names == ('1', '0')

    def test_malformed_token(self, tmp_path):
        path = _write(tmp_path, 'd.svm', "1 1:0.5\n0 two:1.5\n")
        with pytest.raises(DatasetError):
            load_libsvm(path, n_features=3)

    def test_index_above_feature_count(self, tmp_path):
        path = _write(tmp_path, 'd.svm', "1 1:0.5\n0 5:1.5\n")
        with pytest.raises(DatasetError):
            load_libsvm(path, n_features=3)


class TestLoadExcel:

    def test_worksheet(self, tmp_path):
        path = tmp_path / 'd.xlsx'
        pd.DataFrame({'a': [1.0, 2.0, 3.0], 'label': ['x', 'y', 'x']}).to_excel(path, index=False)
        ds = load_excel(path)
        np.testing.assert_array_equal(ds.columns[0], [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(ds.labels, [0, 1, 0])

    def test_wrong_suffix(self, tmp_path):
        path = _write(tmp_path, 'd.csv', "a,label\n1,x\n")
        with pytest.raises(DatasetError, match="Invalid file format"):
            load_excel(path)


class TestColumnarDataset:

    def test_subset_keeps_mapping(self):
        ds = ColumnarDataset(columns=np.arange(8, dtype=np.float32).reshape(2, 4),
                             labels=np.array([0, 1, 1, 0]), class_count=2,
                             label_names=('a', 'b'))
        sub = ds.subset(np.array([1, 3]))
        np.testing.assert_array_equal(sub.columns, [[1, 3], [5, 7]])
        np.testing.assert_array_equal(sub.labels, [1, 0])
        assert sub.label_names == ('a', 'b')

    def test_default_label_names(self):
        ds = ColumnarDataset(columns=np.zeros((1, 2)), labels=np.array([0, 1]), class_count=2)
        assert ds.label_names == ('0', '1')

    def test_label_count_mismatch(self):
        with pytest.raises(ValueError):
            ColumnarDataset(columns=np.zeros((1, 3)), labels=np.array([0, 1]), class_count=2)

    def test_row_is_a_copy(self):
        ds = ColumnarDataset(columns=np.arange(6, dtype=np.float32).reshape(2, 3),
                             labels=np.array([0, 1, 0]), class_count=2)
        row = ds.row(2)
        np.testing.assert_array_equal(row, [2, 5])
        row[0] = -1
        assert ds.columns[0, 2] == 2


class TestSampleIndexSet:

    def test_full(self):
        np.testing.assert_array_equal(SampleIndexSet.full(4).indices, [0, 1, 2, 3])

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            SampleIndexSet(np.array([2, 1])).validate(5)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            SampleIndexSet(np.array([0, 5])).validate(5)


def test_map_labels_first_appearance():
    ids, names = map_labels(['b', 'a', 'b', 'c'])
    np.testing.assert_array_equal(ids, [0, 1, 0, 2])
    assert names == ('b', 'a', 'c')


def test_load_feature_matrix(tmp_path):
    path = _write(tmp_path, 'x.csv', "a,b\n1,2\n3,4\n5,6\n")
    columns = load_feature_matrix(path)
    assert columns.shape == (2, 3)
    np.testing.assert_array_equal(columns[1], [2, 4, 6])
